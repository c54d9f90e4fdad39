//! C ABI over the coldstart engine.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `cs_*_load`/`cs_*_fit` call and released by the matching `cs_*_free`.
//! Functions return a [`CsStatus`]; on failure `cs_last_error()` holds a
//! message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use coldstart::cf::{build_item_neighborhoods, recommend, ItemNeighborhoods, Metric, RatingMatrix};
use coldstart::corpus::{load_corpus, Document, Tokenizer};
use coldstart::embedding::{BackendKind, Embedder, FitSettings};
use coldstart::enrichment::{enrich_all, EnrichmentConfig};
use coldstart::matcher::{pair_cold_items, PairingTable};
use coldstart::pairing::{augment_inverted, invert_pairs, Provenance};
use coldstart::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Data = 5,
    NotFound = 6,
    Internal = 7,
}

impl From<&Error> for CsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => CsStatus::Io,
            Error::Parse { .. } => CsStatus::Parse,
            Error::InvalidParameter(_) | Error::KindMismatch(..) => CsStatus::InvalidArgument,
            Error::UnknownDocument(_) | Error::UnknownItem(_) | Error::UnknownUser(_) => CsStatus::NotFound,
            Error::Model(_) => CsStatus::Internal,
            _ => CsStatus::Data,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let msg = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn guard(f: impl FnOnce() -> Result<(), (CsStatus, String)>) -> CsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CsStatus::Internal
        }
    }
}

fn fail(e: Error) -> (CsStatus, String) {
    (CsStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (CsStatus, String) {
    (CsStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (CsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (CsStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// A loaded corpus.
pub struct CsCorpus {
    docs: Vec<Document>,
}

/// A fitted embedding backend together with its text preparation.
pub struct CsEmbedder {
    embedder: Embedder,
    enrichment: EnrichmentConfig,
}

pub struct CsPairingTable {
    table: PairingTable,
}

/// Ratings plus the item neighborhoods built from them.
pub struct CsRatings {
    ratings: RatingMatrix,
    neighborhoods: ItemNeighborhoods,
}

/// An augmented recommendation list.
pub struct CsRecommendation {
    items: Vec<(CString, Provenance)>,
}

/// Loads a JSON-lines corpus.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_corpus_load(path: *const c_char, out: *mut *mut CsCorpus) -> CsStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        let docs = load_corpus(path).map_err(fail)?;
        put(out, CsCorpus { docs })
    })
}

/// Number of documents, 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_corpus_len(corpus: *const CsCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.docs.len())
}

/// Number of documents flagged warm, 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_corpus_warm_count(corpus: *const CsCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.docs.iter().filter(|d| d.warm).count())
}

/// # Safety
/// `corpus` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_corpus_free(corpus: *mut CsCorpus) {
    free(corpus)
}

fn settings(seed: u64) -> FitSettings {
    let mut s = FitSettings::default();
    s.doc2vec.seed = seed;
    s.inference.seed = seed;
    s
}

/// Fits `backend` ("tfidf", "lda" or "doc2vec") on every document, after
/// appending the contextual fields `enrich_n` times.
///
/// # Safety
/// `corpus` must be a live handle, `backend` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_embedder_fit(
    corpus: *const CsCorpus,
    backend: *const c_char,
    enrich_n: usize,
    seed: u64,
    out: *mut *mut CsEmbedder,
) -> CsStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let kind: BackendKind = c_str(backend, "backend")?.parse().map_err(fail)?;
        let enrichment = EnrichmentConfig {
            n_repeats: enrich_n,
            ..EnrichmentConfig::default()
        };
        let docs = Tokenizer::default().tokenize_all(&enrich_all(&corpus.docs, &enrichment));
        let embedder = Embedder::fit(kind, &docs, &settings(seed)).map_err(fail)?;
        put(out, CsEmbedder { embedder, enrichment })
    })
}

/// Writes the model files into directory `dir`.
///
/// # Safety
/// `embedder` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cs_embedder_save(embedder: *const CsEmbedder, dir: *const c_char) -> CsStatus {
    guard(|| {
        let e = handle(embedder, "embedder")?;
        let dir = c_str(dir, "dir")?;
        e.embedder.save_dir(Path::new(dir)).map(drop).map_err(fail)
    })
}

/// Loads model files written by `cs_embedder_save` or `coldstart train`.
///
/// # Safety
/// `backend` and `dir` must be NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_embedder_load(
    backend: *const c_char,
    dir: *const c_char,
    enrich_n: usize,
    seed: u64,
    out: *mut *mut CsEmbedder,
) -> CsStatus {
    guard(|| {
        let kind: BackendKind = c_str(backend, "backend")?.parse().map_err(fail)?;
        let dir = c_str(dir, "dir")?;
        let embedder = Embedder::load_dir(kind, Path::new(dir), settings(seed).inference).map_err(fail)?;
        let enrichment = EnrichmentConfig {
            n_repeats: enrich_n,
            ..EnrichmentConfig::default()
        };
        put(out, CsEmbedder { embedder, enrichment })
    })
}

/// # Safety
/// `embedder` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_embedder_free(embedder: *mut CsEmbedder) {
    free(embedder)
}

/// Pairs the corpus's cold documents with its warm documents.
///
/// # Safety
/// `corpus` and `embedder` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_pair(
    corpus: *const CsCorpus,
    embedder: *const CsEmbedder,
    top_m: usize,
    threshold: f64,
    out: *mut *mut CsPairingTable,
) -> CsStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let e = handle(embedder, "embedder")?;
        let docs = Tokenizer::default().tokenize_all(&enrich_all(&corpus.docs, &e.enrichment));
        let (warm, cold): (Vec<_>, Vec<_>) = docs.into_iter().zip(&corpus.docs).partition(|(_, d)| d.warm);
        let warm: Vec<_> = warm.into_iter().map(|(t, _)| t).collect();
        let cold: Vec<_> = cold.into_iter().map(|(t, _)| t).collect();
        let table = pair_cold_items(&cold, &warm, &e.embedder, top_m, threshold).map_err(fail)?;
        put(out, CsPairingTable { table })
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_pairing_load(path: *const c_char, out: *mut *mut CsPairingTable) -> CsStatus {
    guard(|| {
        let table = PairingTable::load(c_str(path, "path")?).map_err(fail)?;
        put(out, CsPairingTable { table })
    })
}

/// # Safety
/// `table` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cs_pairing_save(table: *const CsPairingTable, path: *const c_char) -> CsStatus {
    guard(|| {
        let t = handle(table, "table")?;
        t.table.save(c_str(path, "path")?).map_err(fail)
    })
}

/// Cold items with at least one partner, 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_pairing_paired_count(table: *const CsPairingTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.paired_count())
}

/// Cold items without a partner, 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_pairing_unpaired_count(table: *const CsPairingTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.unpaired_count())
}

/// # Safety
/// `table` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_pairing_free(table: *mut CsPairingTable) {
    free(table)
}

/// Loads a ratings TSV and builds item neighborhoods of size `k` using
/// `metric` ("pearson" or "cosine").
///
/// # Safety
/// `path` and `metric` must be NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_ratings_load(
    path: *const c_char,
    metric: *const c_char,
    k: usize,
    out: *mut *mut CsRatings,
) -> CsStatus {
    guard(|| {
        let metric: Metric = c_str(metric, "metric")?.parse().map_err(fail)?;
        let ratings = RatingMatrix::load(c_str(path, "path")?).map_err(fail)?;
        let neighborhoods = build_item_neighborhoods(&ratings, metric, k).map_err(fail)?;
        put(out, CsRatings { ratings, neighborhoods })
    })
}

/// # Safety
/// `ratings` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_ratings_free(ratings: *mut CsRatings) {
    free(ratings)
}

/// Top-`n` CF recommendations for `user`, with paired cold items inserted
/// when `pairs` is not NULL. The output is capped at `max_len` items.
///
/// # Safety
/// `ratings` must be a live handle, `pairs` NULL or a live handle, `user` a
/// NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_recommend(
    ratings: *const CsRatings,
    pairs: *const CsPairingTable,
    user: *const c_char,
    n: usize,
    max_len: usize,
    out: *mut *mut CsRecommendation,
) -> CsStatus {
    guard(|| {
        let r = handle(ratings, "ratings")?;
        let user = c_str(user, "user")?;
        let inverted = pairs.as_ref().map(|p| invert_pairs(&p.table)).unwrap_or_default();
        let rec = recommend(&r.ratings, &r.neighborhoods, user, n.min(max_len)).map_err(fail)?;
        let aug = augment_inverted(&rec, &inverted, max_len);
        let items = aug
            .items
            .into_iter()
            .map(|(id, p)| (CString::new(id).unwrap_or_default(), p))
            .collect();
        put(out, CsRecommendation { items })
    })
}

/// Number of items, 0 for NULL.
///
/// # Safety
/// `rec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_recommendation_len(rec: *const CsRecommendation) -> usize {
    rec.as_ref().map_or(0, |r| r.items.len())
}

/// Item id at `index` (valid while `rec` lives) and whether it was inserted
/// by the pairing layer.
///
/// # Safety
/// `rec` must be a live handle; `item` and `paired` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_recommendation_get(
    rec: *const CsRecommendation,
    index: usize,
    item: *mut *const c_char,
    paired: *mut bool,
) -> CsStatus {
    guard(|| {
        let r = handle(rec, "recommendation")?;
        if item.is_null() || paired.is_null() {
            return Err(null("output pointer"));
        }
        let (id, prov) = r
            .items
            .get(index)
            .ok_or_else(|| (CsStatus::InvalidArgument, format!("index {index} out of range")))?;
        *item = id.as_ptr();
        *paired = *prov == Provenance::Paired;
        Ok(())
    })
}

/// # Safety
/// `rec` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_recommendation_free(rec: *mut CsRecommendation) {
    free(rec)
}

/// Cosine similarity of two dense vectors of length `len`.
///
/// # Safety
/// `a` and `b` must point to `len` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_cosine(a: *const f64, b: *const f64, len: usize, out: *mut f64) -> CsStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return Err(null("vector or output"));
        }
        let (a, b) = (std::slice::from_raw_parts(a, len), std::slice::from_raw_parts(b, len));
        *out = coldstart::matcher::cosine_dense(a, b).map_err(fail)?;
        Ok(())
    })
}
