//! C ABI over the clarisim core.
//!
//! Every fallible function returns a [`ClarisimStatus`]. On failure the
//! message is available from [`clarisim_last_error_message`] on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. Strings returned through out-pointers are owned by the caller
//! and released with [`clarisim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clarisim::catalog::Catalog;
use clarisim::corpus::{builtin_domain, label_underspec, Corpus, UnderspecLabel};
use clarisim::dialogue::ConversationHistory;
use clarisim::metapolicy::{build_training_set, HashingFeaturizer, MetaPolicy, QStarConfig, QStarRecord};
use clarisim::strategies::{classify_tau, ResponseStrategy};
use clarisim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClarisimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad argument or configuration value.
    InvalidArgument = 3,
    /// Malformed JSON or schema violation.
    Parse = 4,
    /// Any other library error.
    Failed = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClarisimUnderspec {
    CriticalUnder = 0,
    MinorUnder = 1,
    Sufficient = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClarisimStrategy {
    Refuse = 0,
    DirectResponse = 1,
    Hedge = 2,
    Clarify = 3,
    Interrogate = 4,
    MissingResponse = 5,
    Misc = 6,
}

impl From<UnderspecLabel> for ClarisimUnderspec {
    fn from(l: UnderspecLabel) -> Self {
        match l {
            UnderspecLabel::CriticalUnder => Self::CriticalUnder,
            UnderspecLabel::MinorUnder => Self::MinorUnder,
            UnderspecLabel::Sufficient => Self::Sufficient,
        }
    }
}

impl From<ResponseStrategy> for ClarisimStrategy {
    fn from(t: ResponseStrategy) -> Self {
        match t {
            ResponseStrategy::Refuse => Self::Refuse,
            ResponseStrategy::DirectResponse => Self::DirectResponse,
            ResponseStrategy::Hedge => Self::Hedge,
            ResponseStrategy::Clarify => Self::Clarify,
            ResponseStrategy::Interrogate => Self::Interrogate,
            ResponseStrategy::MissingResponse => Self::MissingResponse,
            ResponseStrategy::Misc => Self::Misc,
        }
    }
}

/// Opaque corpus handle.
pub struct ClarisimCorpus(Corpus);

/// Opaque catalog handle.
pub struct ClarisimCatalog(Catalog);

/// Opaque meta-policy handle.
pub struct ClarisimMetaPolicy(MetaPolicy);

struct Failure(ClarisimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            _ if e.is_config() => ClarisimStatus::InvalidArgument,
            Error::Json(_) | Error::Schema(_) => ClarisimStatus::Parse,
            _ => ClarisimStatus::Failed,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(ClarisimStatus::Parse, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ClarisimStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ClarisimStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&msg);
            ClarisimStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ClarisimStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(ClarisimStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(ClarisimStatus::Failed, e.to_string()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn clarisim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn clarisim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clarisim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_label_underspec(
    revealed_count: usize,
    total_count: usize,
    out_label: *mut ClarisimUnderspec,
) -> ClarisimStatus {
    guard(|| {
        *out(out_label, "out_label")? = label_underspec(revealed_count, total_count)?.into();
        Ok(())
    })
}

/// # Safety
/// `response` must be a NUL-terminated string and `out_strategy` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_classify_tau(
    response: *const c_char,
    out_strategy: *mut ClarisimStrategy,
) -> ClarisimStatus {
    guard(|| {
        let t = text(response, "response")?;
        *out(out_strategy, "out_strategy")? = classify_tau(t).into();
        Ok(())
    })
}

/// Cognitive cost of a response: its whitespace-separated token count.
///
/// # Safety
/// `response` must be a NUL-terminated string and `out_cost` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_cost(response: *const c_char, out_cost: *mut usize) -> ClarisimStatus {
    guard(|| {
        *out(out_cost, "out_cost")? = text(response, "response")?.split_whitespace().count();
        Ok(())
    })
}

/// Generates `n` goal records for a built-in intent.
///
/// # Safety
/// `intent` must be a NUL-terminated string and `out_corpus` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_corpus_generate(
    intent: *const c_char,
    n: usize,
    seed: u64,
    out_corpus: *mut *mut ClarisimCorpus,
) -> ClarisimStatus {
    guard(|| {
        let slot = out(out_corpus, "out_corpus")?;
        let domain = builtin_domain(text(intent, "intent")?)?;
        *slot = Box::into_raw(Box::new(ClarisimCorpus(Corpus::generate(&domain, n, seed))));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn clarisim_corpus_len(corpus: *const ClarisimCorpus, out_len: *mut usize) -> ClarisimStatus {
    guard(|| {
        *out(out_len, "out_len")? = handle(corpus, "corpus")?.0.records.len();
        Ok(())
    })
}

/// Label of the masked query of record `index`.
///
/// # Safety
/// `corpus` must be a live handle and `out_label` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_corpus_label(
    corpus: *const ClarisimCorpus,
    index: usize,
    out_label: *mut ClarisimUnderspec,
) -> ClarisimStatus {
    guard(|| {
        let c = &handle(corpus, "corpus")?.0;
        let r = c.records.get(index).ok_or_else(|| {
            Failure(ClarisimStatus::InvalidArgument, format!("index {index} >= {}", c.records.len()))
        })?;
        *out(out_label, "out_label")? = r.masked.label.into();
        Ok(())
    })
}

/// # Safety
/// `corpus` must be a live handle and `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_corpus_to_json(
    corpus: *const ClarisimCorpus,
    out_json: *mut *mut c_char,
) -> ClarisimStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = owned_string(serde_json::to_string(&handle(corpus, "corpus")?.0)?)?;
        Ok(())
    })
}

/// # Safety
/// `corpus` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clarisim_corpus_free(corpus: *mut ClarisimCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Generates a catalog for the corpus's domain, with an exact match injected
/// for every corpus goal.
///
/// # Safety
/// `corpus` must be a live handle and `out_catalog` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_catalog_generate(
    corpus: *const ClarisimCorpus,
    size: usize,
    seed: u64,
    out_catalog: *mut *mut ClarisimCatalog,
) -> ClarisimStatus {
    guard(|| {
        let slot = out(out_catalog, "out_catalog")?;
        let c = &handle(corpus, "corpus")?.0;
        let mut catalog = Catalog::generate(&c.domain, size, seed)?;
        catalog.inject_exact_matches(c.goals())?;
        *slot = Box::into_raw(Box::new(ClarisimCatalog(catalog)));
        Ok(())
    })
}

/// # Safety
/// `catalog` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clarisim_catalog_free(catalog: *mut ClarisimCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// Computes Q\* records for every query in the corpus and returns them as a
/// JSON array.
///
/// # Safety
/// Handles must be live and `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_qstar_json(
    corpus: *const ClarisimCorpus,
    catalog: *const ClarisimCatalog,
    n_mc: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> ClarisimStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        let c = &handle(corpus, "corpus")?.0;
        let k = &handle(catalog, "catalog")?.0;
        let cfg = QStarConfig { n_mc, seed, ..QStarConfig::default() };
        let records = build_training_set(&c.queries(), k, &HashingFeaturizer::default(), &cfg)?;
        *slot = owned_string(serde_json::to_string(&records)?)?;
        Ok(())
    })
}

/// Fits a k-NN meta-policy from a JSON array of Q\* records.
///
/// # Safety
/// `qstar_json` must be a NUL-terminated string and `out_meta` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_metapolicy_from_qstar_json(
    qstar_json: *const c_char,
    k: usize,
    lambda: f64,
    out_meta: *mut *mut ClarisimMetaPolicy,
) -> ClarisimStatus {
    guard(|| {
        let slot = out(out_meta, "out_meta")?;
        let records: Vec<QStarRecord> = serde_json::from_str(text(qstar_json, "qstar_json")?)?;
        let meta = MetaPolicy::fit(HashingFeaturizer::default(), &records, k)?.with_lambda(lambda);
        *slot = Box::into_raw(Box::new(ClarisimMetaPolicy(meta)));
        Ok(())
    })
}

/// Strategy β selects at turn 0 for the masked query of record `index`.
///
/// # Safety
/// Handles must be live and `out_strategy` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn clarisim_metapolicy_select(
    meta: *const ClarisimMetaPolicy,
    corpus: *const ClarisimCorpus,
    index: usize,
    out_strategy: *mut ClarisimStrategy,
) -> ClarisimStatus {
    guard(|| {
        let m = &handle(meta, "meta")?.0;
        let c = &handle(corpus, "corpus")?.0;
        let r = c.records.get(index).ok_or_else(|| {
            Failure(ClarisimStatus::InvalidArgument, format!("index {index} >= {}", c.records.len()))
        })?;
        *out(out_strategy, "out_strategy")? = m.select(&ConversationHistory::new(r.masked.clone()))?.into();
        Ok(())
    })
}

/// # Safety
/// `meta` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clarisim_metapolicy_free(meta: *mut ClarisimMetaPolicy) {
    if !meta.is_null() {
        drop(Box::from_raw(meta));
    }
}
