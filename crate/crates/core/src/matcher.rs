//! Cosine similarity, exhaustive top-k retrieval and cold-to-warm pairing.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use log::{debug, warn};
use rayon::prelude::*;

use crate::corpus::TokenizedDocument;
use crate::embedding::{BackendKind, Embedder, Embedding};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_TOP_M: usize = 1;

/// Cosine of two embeddings of the same kind, clamped to [-1, 1].
pub fn cosine(u: &Embedding, v: &Embedding) -> Result<f64> {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((u.dot(v)? / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn cosine_dense(u: &[f64], v: &[f64]) -> Result<f64> {
    cosine(&Embedding::Dense(u.to_vec()), &Embedding::Dense(v.to_vec()))
}

/// Descending score, then ascending id.
pub(crate) fn rank_order(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Keeps the `k` best entries under [`rank_order`], sorted.
pub(crate) fn top_sorted(mut scored: Vec<(String, f64)>, k: usize) -> Vec<(String, f64)> {
    if k == 0 {
        return Vec::new();
    }
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, rank_order);
        scored.truncate(k);
    }
    scored.sort_by(rank_order);
    scored
}

#[derive(Debug, Clone)]
pub struct SimilarityIndex {
    kind: BackendKind,
    ids: Vec<String>,
    vectors: Vec<Embedding>,
    norms: Vec<f64>,
    seen: HashSet<String>,
}

impl SimilarityIndex {
    pub fn new(kind: BackendKind) -> Self {
        SimilarityIndex {
            kind,
            ids: Vec::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Rejects zero-norm vectors and duplicate ids.
    pub fn insert(&mut self, id: impl Into<String>, vector: Embedding) -> Result<()> {
        let id = id.into();
        let norm = vector.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        if let Some(first) = self.vectors.first() {
            if std::mem::discriminant(first) != std::mem::discriminant(&vector) {
                return Err(Error::KindMismatch(first.kind_name(), vector.kind_name()));
            }
        }
        if !self.seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        self.ids.push(id);
        self.vectors.push(vector);
        self.norms.push(norm);
        Ok(())
    }

    /// The `k` most similar entries, descending by cosine with ties broken by
    /// ascending id; `exclude` suppresses one id (usually the query itself).
    pub fn top_k(&self, query: &Embedding, k: usize, exclude: Option<&str>) -> Result<Vec<(String, f64)>> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if self.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let qn = query.norm();
        if qn == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut scored = Vec::with_capacity(self.len());
        for ((id, v), n) in self.ids.iter().zip(&self.vectors).zip(&self.norms) {
            if exclude == Some(id.as_str()) {
                continue;
            }
            let s = (query.dot(v)? / (qn * n)).clamp(-1.0, 1.0);
            scored.push((id.clone(), s));
        }
        Ok(top_sorted(scored, k))
    }
}

pub fn top_k_similar(
    index: &SimilarityIndex,
    query: &Embedding,
    k: usize,
    exclude: Option<&str>,
) -> Result<Vec<(String, f64)>> {
    index.top_k(query, k, exclude)
}

/// Cold id to its qualifying warm partners, best first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairingTable {
    entries: BTreeMap<String, Vec<(String, f64)>>,
}

pub const PAIRING_HEADER: &str = "cold_id\twarm_id\tscore";

impl PairingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a cold item; its partner list is re-sorted into canonical
    /// order.
    pub fn insert(&mut self, cold_id: impl Into<String>, mut partners: Vec<(String, f64)>) {
        partners.sort_by(rank_order);
        self.entries.insert(cold_id.into(), partners);
    }

    pub fn get(&self, cold_id: &str) -> Option<&[(String, f64)]> {
        self.entries.get(cold_id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<(String, f64)>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn paired_count(&self) -> usize {
        self.entries.values().filter(|p| !p.is_empty()).count()
    }

    pub fn unpaired_count(&self) -> usize {
        self.entries.values().filter(|p| p.is_empty()).count()
    }

    pub fn pair_rows(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    /// Header, then one row per pair; unpaired cold ids get `-` and `nan`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(PAIRING_HEADER);
        out.push('\n');
        for (cold, partners) in &self.entries {
            if partners.is_empty() {
                let _ = writeln!(out, "{cold}\t-\tnan");
            }
            for (warm, score) in partners {
                let _ = writeln!(out, "{cold}\t{warm}\t{score}");
            }
        }
        out
    }

    pub fn from_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut table = PairingTable::new();
        let mut rows: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || (i == 0 && line == PAIRING_HEADER) {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [cold, warm, score] = cols[..] else {
                return Err(Error::parse(origin, i + 1, "expected cold_id\\twarm_id\\tscore"));
            };
            let entry = rows.entry(cold.to_owned()).or_default();
            if warm == "-" {
                continue;
            }
            let score: f64 = score
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad score {score:?}")))?;
            entry.push((warm.to_owned(), score));
        }
        for (cold, partners) in rows {
            table.insert(cold, partners);
        }
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_tsv().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_tsv(&crate::io::read_to_string(path)?, path)
    }
}

/// Builds an index over the warm documents, skipping (with a warning) any
/// that embed to a zero vector.
pub fn build_index(embedder: &Embedder, docs: &[TokenizedDocument]) -> Result<SimilarityIndex> {
    let mut index = SimilarityIndex::new(embedder.kind());
    for (doc, emb) in docs.iter().zip(embedder.embed_all(docs)) {
        match emb.and_then(|e| index.insert(doc.id.clone(), e)) {
            Ok(()) => {}
            Err(Error::ZeroNorm) | Err(Error::NotInferable) => {
                warn!("document {:?} has no usable embedding; not indexed", doc.id)
            }
            Err(e) => return Err(e),
        }
    }
    Ok(index)
}

/// Pairs every cold document with up to `top_m` warm documents whose cosine
/// is at least `threshold`. Cold documents without a qualifying partner are
/// kept with an empty list.
pub fn pair_cold_items(
    cold: &[TokenizedDocument],
    warm: &[TokenizedDocument],
    embedder: &Embedder,
    top_m: usize,
    threshold: f64,
) -> Result<PairingTable> {
    if warm.is_empty() {
        return Err(Error::NoWarmItems);
    }
    if top_m == 0 {
        return Err(Error::InvalidParameter("top_m must be >= 1".into()));
    }
    let warm_ids: HashSet<&str> = warm.iter().map(|d| d.id.as_str()).collect();
    if let Some(d) = cold.iter().find(|d| warm_ids.contains(d.id.as_str())) {
        return Err(Error::Data(format!("item {:?} is both cold and warm", d.id)));
    }
    let index = build_index(embedder, warm)?;
    if index.is_empty() {
        return Err(Error::NoWarmItems);
    }
    let rows: Vec<(String, Vec<(String, f64)>)> = cold
        .par_iter()
        .map(|doc| {
            let query = match embedder.embed(doc) {
                Ok(q) => q,
                Err(Error::NotInferable) => return Ok((doc.id.clone(), Vec::new())),
                Err(e) => return Err(e),
            };
            let hits = match index.top_k(&query, top_m, None) {
                Ok(h) => h,
                Err(Error::ZeroNorm) => Vec::new(),
                Err(e) => return Err(e),
            };
            let kept = hits.into_iter().filter(|(_, s)| *s >= threshold).collect();
            Ok((doc.id.clone(), kept))
        })
        .collect::<Result<_>>()?;
    let mut table = PairingTable::new();
    for (cold_id, partners) in rows {
        if partners.is_empty() {
            debug!("cold item {cold_id:?} has no partner above threshold {threshold}");
        }
        table.insert(cold_id, partners);
    }
    if table.unpaired_count() > 0 {
        warn!(
            "{} of {} cold items have no partner above threshold {threshold}",
            table.unpaired_count(),
            table.len()
        );
    }
    Ok(table)
}
