//! C ABI surface for the citerec citation toolkit.
//!
//! Handles are opaque; every function returns a [`CiterecStatus`] (or a
//! pointer with NULL signalling failure) and records a per-thread error
//! message retrievable via [`citerec_last_error`]. Strings returned through
//! `out` parameters are NUL-terminated UTF-8 owned by the caller and must be
//! released with [`citerec_string_free`]. Results are JSON so that binding
//! layers do not need to mirror struct layouts.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use citerec::cf::CfModel;
use citerec::citation::{AuthorityIndex, CitationExtractor, CitationVocabulary, Normalizer};
use citerec::context::{context_vector, ContextBank, TextVocabulary};
use citerec::corpus::tokenize;
use citerec::ranked::RankedList;
use citerec::Error;

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiterecStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// An input string was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A file could not be read.
    IoError = 3,
    /// A file or input string could not be parsed.
    ParseError = 4,
    /// A referenced artifact is missing; build it with the CLI first.
    MissingArtifact = 5,
    /// Internal invariant failure.
    InternalError = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> CiterecStatus {
    match err {
        Error::Io { .. } => CiterecStatus::IoError,
        Error::MissingArtifact { .. } => CiterecStatus::MissingArtifact,
        Error::Json { .. }
        | Error::Csv { .. }
        | Error::Invalid { .. }
        | Error::ArtifactFormat { .. } => CiterecStatus::ParseError,
        Error::DimMismatch { .. } | Error::Config(_) => CiterecStatus::InternalError,
    }
}

fn fail(status: CiterecStatus, message: impl Into<String>) -> CiterecStatus {
    set_error(message.into());
    status
}

/// Runs a body with panic isolation; panics become `InternalError`.
fn guarded(body: impl FnOnce() -> CiterecStatus) -> CiterecStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(CiterecStatus::InternalError, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be NULL or a valid NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, CiterecStatus> {
    if ptr.is_null() {
        return Err(fail(CiterecStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(CiterecStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `ptr` must be NULL or a valid NUL-terminated string.
unsafe fn read_opt_str<'a>(
    ptr: *const c_char,
    what: &str,
) -> Result<Option<&'a str>, CiterecStatus> {
    if ptr.is_null() {
        Ok(None)
    } else {
        read_str(ptr, what).map(Some)
    }
}

fn write_out_string(out: *mut *mut c_char, value: String) -> CiterecStatus {
    if out.is_null() {
        return fail(CiterecStatus::NullArgument, "out pointer is NULL");
    }
    match CString::new(value) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            CiterecStatus::Ok
        }
        Err(_) => fail(CiterecStatus::InternalError, "result contained a NUL byte"),
    }
}

fn ranked_json(ranked: &RankedList, vocab: &CitationVocabulary) -> String {
    let items: Vec<serde_json::Value> = ranked
        .items()
        .iter()
        .map(|&(index, score)| {
            serde_json::json!({
                "index": index,
                "key": vocab.key_of(index),
                "class": vocab.class_of(index).as_str(),
                "score": score,
            })
        })
        .collect();
    serde_json::json!({ "items": items }).to_string()
}

// ---------------------------------------------------------------------------
// Parser handle: extraction + normalization
// ---------------------------------------------------------------------------

pub struct CiterecParser {
    extractor: CitationExtractor,
    index: AuthorityIndex,
}

/// Creates a parser. `authorities_csv_path` may be NULL, in which case case
/// citations cannot be resolved and normalize to the unknown sentinel.
///
/// # Safety
/// `authorities_csv_path` must be NULL or a valid NUL-terminated path; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn citerec_parser_new(
    authorities_csv_path: *const c_char,
    out: *mut *mut CiterecParser,
) -> CiterecStatus {
    guarded(|| {
        clear_error();
        if out.is_null() {
            return fail(CiterecStatus::NullArgument, "out pointer is NULL");
        }
        let path = match read_opt_str(authorities_csv_path, "authorities_csv_path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let index = match path {
            None => AuthorityIndex::empty(),
            Some(p) => match AuthorityIndex::from_csv_path(Path::new(p)) {
                Ok(index) => index,
                Err(e) => return fail(status_of(&e), e.to_string()),
            },
        };
        let parser = Box::new(CiterecParser {
            extractor: CitationExtractor::with_default_reporters(),
            index,
        });
        *out = Box::into_raw(parser);
        CiterecStatus::Ok
    })
}

/// # Safety
/// `parser` must be NULL or a pointer from [`citerec_parser_new`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn citerec_parser_free(parser: *mut CiterecParser) {
    if !parser.is_null() {
        drop(Box::from_raw(parser));
    }
}

/// Extracts raw citation spans from text as a JSON array of
/// `{"text","start","end","kind"}` objects (byte offsets).
///
/// # Safety
/// All pointers must be valid; `text` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn citerec_parser_extract_json(
    parser: *const CiterecParser,
    text: *const c_char,
    out_json: *mut *mut c_char,
) -> CiterecStatus {
    guarded(|| {
        clear_error();
        if parser.is_null() {
            return fail(CiterecStatus::NullArgument, "parser is NULL");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        let found: Vec<serde_json::Value> = (*parser)
            .extractor
            .extract(text)
            .into_iter()
            .map(|raw| {
                serde_json::json!({
                    "text": raw.text,
                    "start": raw.span.0,
                    "end": raw.span.1,
                    "kind": raw.kind_hint.as_str(),
                })
            })
            .collect();
        write_out_string(out_json, serde_json::Value::Array(found).to_string())
    })
}

/// Extracts and normalizes citations as a JSON array of
/// `{"start","end","class","key"}` objects, one per normalized citation
/// (multi-section citations contribute several entries sharing a span).
///
/// # Safety
/// All pointers must be valid; `text` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn citerec_parser_normalize_json(
    parser: *const CiterecParser,
    text: *const c_char,
    out_json: *mut *mut c_char,
) -> CiterecStatus {
    guarded(|| {
        clear_error();
        if parser.is_null() {
            return fail(CiterecStatus::NullArgument, "parser is NULL");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        let parser = &*parser;
        let normalizer = Normalizer::new(&parser.index);
        let mut entries = Vec::new();
        for raw in parser.extractor.extract(text) {
            for citation in normalizer.normalize(&raw) {
                entries.push(serde_json::json!({
                    "start": raw.span.0,
                    "end": raw.span.1,
                    "class": citation.class.as_str(),
                    "key": citation.key,
                }));
            }
        }
        write_out_string(out_json, serde_json::Value::Array(entries).to_string())
    })
}

// ---------------------------------------------------------------------------
// Collaborative-filtering recommender handle
// ---------------------------------------------------------------------------

pub struct CiterecCfRecommender {
    model: CfModel,
    vocab: CitationVocabulary,
}

fn open_vocab(path: &Path) -> Result<CitationVocabulary, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    CitationVocabulary::read_tsv(file, path)
}

/// Opens a collaborative-filtering recommender from a trained model artifact
/// and its citation vocabulary.
///
/// # Safety
/// Paths must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn citerec_cf_open(
    model_path: *const c_char,
    vocab_path: *const c_char,
    out: *mut *mut CiterecCfRecommender,
) -> CiterecStatus {
    guarded(|| {
        clear_error();
        if out.is_null() {
            return fail(CiterecStatus::NullArgument, "out pointer is NULL");
        }
        let model_path = match read_str(model_path, "model_path") {
            Ok(p) => PathBuf::from(p),
            Err(status) => return status,
        };
        let vocab_path = match read_str(vocab_path, "vocab_path") {
            Ok(p) => PathBuf::from(p),
            Err(status) => return status,
        };
        let vocab = match open_vocab(&vocab_path) {
            Ok(v) => v,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let model = match CfModel::load_json(&model_path) {
            Ok(m) => m,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        *out = Box::into_raw(Box::new(CiterecCfRecommender { model, vocab }));
        CiterecStatus::Ok
    })
}

/// # Safety
/// `handle` must be NULL or a pointer from [`citerec_cf_open`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn citerec_cf_free(handle: *mut CiterecCfRecommender) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Recommends citations for a partial citation list given as a JSON array of
/// vocabulary keys, e.g. `["CLA#6456776","38 U.S.C. § 5108"]`. Unknown keys
/// map to the UNK sentinel. The result is
/// `{"items":[{"index","key","class","score"}]}` ranked best-first.
///
/// # Safety
/// All pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn citerec_cf_recommend_json(
    handle: *const CiterecCfRecommender,
    keys_json: *const c_char,
    top_n: usize,
    out_json: *mut *mut c_char,
) -> CiterecStatus {
    guarded(|| {
        clear_error();
        if handle.is_null() {
            return fail(CiterecStatus::NullArgument, "handle is NULL");
        }
        let keys_json = match read_str(keys_json, "keys_json") {
            Ok(k) => k,
            Err(status) => return status,
        };
        let keys: Vec<String> = match serde_json::from_str(keys_json) {
            Ok(k) => k,
            Err(e) => {
                return fail(
                    CiterecStatus::ParseError,
                    format!("keys_json must be a JSON array of strings: {e}"),
                )
            }
        };
        let handle = &*handle;
        let partial: Vec<u32> = keys.iter().map(|k| handle.vocab.lookup(k)).collect();
        let ranked = handle.model.recommend(&partial, top_n);
        write_out_string(out_json, ranked_json(&ranked, &handle.vocab))
    })
}

// ---------------------------------------------------------------------------
// Context recommender handle
// ---------------------------------------------------------------------------

pub struct CiterecContextRecommender {
    bank: ContextBank,
    text_vocab: TextVocabulary,
    vocab: CitationVocabulary,
    index: AuthorityIndex,
    extractor: CitationExtractor,
}

/// Opens a context recommender from trained artifacts. The authority list is
/// optional (NULL) and only affects how case citations inside query text are
/// resolved back into vocabulary tokens.
///
/// # Safety
/// Paths must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn citerec_context_open(
    bank_path: *const c_char,
    text_vocab_path: *const c_char,
    vocab_path: *const c_char,
    authorities_csv_path: *const c_char,
    out: *mut *mut CiterecContextRecommender,
) -> CiterecStatus {
    guarded(|| {
        clear_error();
        if out.is_null() {
            return fail(CiterecStatus::NullArgument, "out pointer is NULL");
        }
        let bank_path = match read_str(bank_path, "bank_path") {
            Ok(p) => PathBuf::from(p),
            Err(status) => return status,
        };
        let tv_path = match read_str(text_vocab_path, "text_vocab_path") {
            Ok(p) => PathBuf::from(p),
            Err(status) => return status,
        };
        let vocab_path = match read_str(vocab_path, "vocab_path") {
            Ok(p) => PathBuf::from(p),
            Err(status) => return status,
        };
        let auth = match read_opt_str(authorities_csv_path, "authorities_csv_path") {
            Ok(p) => p,
            Err(status) => return status,
        };

        let vocab = match open_vocab(&vocab_path) {
            Ok(v) => v,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let text_vocab = match std::fs::File::open(&tv_path)
            .map_err(|e| Error::io(&tv_path, e))
            .and_then(|f| TextVocabulary::read_tsv(f, &tv_path, &vocab))
        {
            Ok(tv) => tv,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let bank = match ContextBank::load_json(&bank_path) {
            Ok(b) => b,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let index = match auth {
            None => AuthorityIndex::empty(),
            Some(p) => match AuthorityIndex::from_csv_path(Path::new(p)) {
                Ok(i) => i,
                Err(e) => return fail(status_of(&e), e.to_string()),
            },
        };
        *out = Box::into_raw(Box::new(CiterecContextRecommender {
            bank,
            text_vocab,
            vocab,
            index,
            extractor: CitationExtractor::with_default_reporters(),
        }));
        CiterecStatus::Ok
    })
}

/// # Safety
/// `handle` must be NULL or a pointer from [`citerec_context_open`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn citerec_context_free(handle: *mut CiterecContextRecommender) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Recommends citations for a draft text snippet: the text is tokenized, the
/// trailing context window becomes the query, and banked citations are ranked
/// by mean squared context similarity. Result shape matches
/// [`citerec_cf_recommend_json`].
///
/// # Safety
/// All pointers must be valid; `text` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn citerec_context_recommend_json(
    handle: *const CiterecContextRecommender,
    text: *const c_char,
    top_n: usize,
    out_json: *mut *mut c_char,
) -> CiterecStatus {
    guarded(|| {
        clear_error();
        if handle.is_null() {
            return fail(CiterecStatus::NullArgument, "handle is NULL");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        let handle = &*handle;
        let tokens = tokenize(text, &handle.vocab, &handle.index, &handle.extractor);
        let start = tokens.len().saturating_sub(handle.bank.context_len());
        let query = context_vector(&tokens[start..], &handle.text_vocab);
        let ranked = handle.bank.recommend(&query, top_n);
        write_out_string(out_json, ranked_json(&ranked, &handle.vocab))
    })
}

// ---------------------------------------------------------------------------
// Strings, errors, version
// ---------------------------------------------------------------------------

/// Frees a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn citerec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the current thread's most recent failure, or NULL. The pointer
/// stays valid until the next citerec call on this thread.
#[no_mangle]
pub extern "C" fn citerec_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn citerec_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}
