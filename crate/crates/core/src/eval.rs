//! Retrieval benchmark: precision@10 and recall@k per embedding backend.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{Document, Tokenizer};
use crate::embedding::{BackendKind, Embedder, FitSettings};
use crate::enrichment::{enrich_all, EnrichmentConfig};
use crate::error::{Error, Result};
use crate::matcher::build_index;

pub const DEFAULT_KS: [usize; 4] = [10, 20, 30, 50];
pub const PRECISION_K: usize = 10;

/// `|top-k ∩ relevant| / min(k, |retrieved|)`, zero for an empty retrieval.
pub fn precision_at_k<S: AsRef<str>>(retrieved: &[S], relevant: &BTreeSet<String>, k: usize) -> f64 {
    let k = k.max(1);
    let considered = k.min(retrieved.len());
    if considered == 0 {
        return 0.0;
    }
    let hits = retrieved[..considered]
        .iter()
        .filter(|id| relevant.contains(id.as_ref()))
        .count();
    hits as f64 / considered as f64
}

/// `|top-k ∩ relevant| / |relevant|`.
pub fn recall_at_k<S: AsRef<str>>(retrieved: &[S], relevant: &BTreeSet<String>, k: usize) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevantSet);
    }
    let hits = retrieved
        .iter()
        .take(k.max(1))
        .filter(|id| relevant.contains(id.as_ref()))
        .count();
    Ok(hits as f64 / relevant.len() as f64)
}

pub const TRUTH_HEADER: &str = "query_id\trelevant_id";

/// Query id to the set of documents judged relevant to it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    relevant: BTreeMap<String, BTreeSet<String>>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, query: &str, relevant: &str) -> Result<()> {
        if query == relevant {
            return Err(Error::Data(format!("query {query:?} listed as relevant to itself")));
        }
        self.relevant
            .entry(query.to_owned())
            .or_default()
            .insert(relevant.to_owned());
        Ok(())
    }

    pub fn queries(&self) -> impl Iterator<Item = &String> {
        self.relevant.keys()
    }

    pub fn relevant(&self, query: &str) -> Option<&BTreeSet<String>> {
        self.relevant.get(query)
    }

    pub fn len(&self) -> usize {
        self.relevant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relevant.is_empty()
    }

    /// Every other document sharing the query's label is relevant.
    pub fn from_labels<'a>(queries: &[&str], labelled: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let labelled: Vec<(&str, &str)> = labelled.into_iter().collect();
        let label_of: BTreeMap<&str, &str> = labelled.iter().copied().collect();
        let mut truth = GroundTruth::new();
        for &q in queries {
            let label = label_of
                .get(q)
                .ok_or_else(|| Error::UnknownDocument(q.to_owned()))?;
            for &(id, l) in &labelled {
                if l == *label && id != q {
                    truth.add(q, id)?;
                }
            }
        }
        Ok(truth)
    }

    /// Truth built the way a manual audit of one reference model works: the
    /// reference's top results for each query, kept where `judge` accepts
    /// the match. Queries with no accepted match are dropped.
    pub fn from_judged_retrievals(
        retrievals: &BTreeMap<String, Vec<String>>,
        judge: impl Fn(&str, &str) -> bool,
    ) -> Result<Self> {
        let mut truth = GroundTruth::new();
        for (q, hits) in retrievals {
            for h in hits.iter().filter(|h| judge(q, h)) {
                truth.add(q, h)?;
            }
        }
        Ok(truth)
    }

    pub fn from_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut truth = GroundTruth::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || (i == 0 && line == TRUTH_HEADER) {
                continue;
            }
            let (q, r) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected query_id\\trelevant_id"))?;
            truth
                .add(q, r)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(truth)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TRUTH_HEADER);
        out.push('\n');
        for (q, rel) in &self.relevant {
            for r in rel {
                let _ = writeln!(out, "{q}\t{r}");
            }
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_tsv(&crate::io::read_to_string(path)?, path)
    }
}

/// Picks `n` distinct query ids uniformly at random.
pub fn sample_queries(ids: &[String], n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<String> = ids.choose_multiple(&mut rng, n.min(ids.len())).cloned().collect();
    picked.sort();
    picked
}

/// One benchmark row: a backend, optionally fed contextually enriched text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BackendSpec {
    pub kind: BackendKind,
    pub enriched: bool,
}

impl BackendSpec {
    pub fn plain(kind: BackendKind) -> Self {
        BackendSpec { kind, enriched: false }
    }

    pub fn enriched(kind: BackendKind) -> Self {
        BackendSpec { kind, enriched: true }
    }

    /// Every backend, plain then enriched.
    pub fn all() -> Vec<BackendSpec> {
        let mut v: Vec<_> = BackendKind::ALL.into_iter().map(Self::plain).collect();
        v.extend(BackendKind::ALL.into_iter().map(Self::enriched));
        v
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.enriched {
            write!(f, "{}+context", self.kind)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

impl FromStr for BackendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().strip_suffix("+context") {
            Some(kind) => Ok(BackendSpec::enriched(kind.parse()?)),
            None => Ok(BackendSpec::plain(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub ks: Vec<usize>,
    pub tokenizer: Tokenizer,
    pub enrichment: EnrichmentConfig,
    pub fit: FitSettings,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            ks: DEFAULT_KS.to_vec(),
            tokenizer: Tokenizer::default(),
            enrichment: EnrichmentConfig::default(),
            fit: FitSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendMetrics {
    pub backend: BackendSpec,
    pub precision_at_10: f64,
    /// `(k, recall@k)` in the configured order.
    pub recall: Vec<(usize, f64)>,
    pub runtime_seconds: f64,
}

impl BackendMetrics {
    pub fn recall_at(&self, k: usize) -> Option<f64> {
        self.recall.iter().find(|(kk, _)| *kk == k).map(|&(_, r)| r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub rows: Vec<BackendMetrics>,
}

impl MetricsReport {
    pub fn row(&self, backend: BackendSpec) -> Option<&BackendMetrics> {
        self.rows.iter().find(|r| r.backend == backend)
    }

    fn ks(&self) -> Vec<usize> {
        self.rows
            .first()
            .map(|r| r.recall.iter().map(|&(k, _)| k).collect())
            .unwrap_or_default()
    }

    /// Machine-readable metrics; runtimes live in [`Self::runtime_tsv`] so
    /// this output is reproducible.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("backend\tprecision@10");
        for k in self.ks() {
            let _ = write!(out, "\trecall@{k}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}\t{:.6}", row.backend, row.precision_at_10);
            for (_, r) in &row.recall {
                let _ = write!(out, "\t{r:.6}");
            }
            out.push('\n');
        }
        out
    }

    pub fn runtime_tsv(&self) -> String {
        let mut out = String::from("backend\truntime_seconds\n");
        for row in &self.rows {
            let _ = writeln!(out, "{}\t{:.3}", row.backend, row.runtime_seconds);
        }
        out
    }

    /// Aligned columns, percentages with one decimal.
    pub fn to_text(&self) -> String {
        let ks = self.ks();
        let width = self
            .rows
            .iter()
            .map(|r| r.backend.to_string().len())
            .max()
            .unwrap_or(7)
            .max(7);
        let mut out = format!("{:<width$}  {:>8}", "backend", "P@10");
        for k in &ks {
            let _ = write!(out, "  {:>8}", format!("R@{k}"));
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(
                out,
                "{:<width$}  {:>7.1}%",
                row.backend.to_string(),
                row.precision_at_10 * 100.0
            );
            for (_, r) in &row.recall {
                let _ = write!(out, "  {:>7.1}%", r * 100.0);
            }
            out.push('\n');
        }
        out
    }
}

/// Per-backend retrieval lists, query id to ranked neighbor ids.
pub type Retrievals = BTreeMap<String, Vec<String>>;

#[derive(Debug, Clone)]
pub struct BenchmarkOutcome {
    pub report: MetricsReport,
    pub retrievals: BTreeMap<BackendSpec, Retrievals>,
}

/// Fits `backend` on the whole corpus and retrieves the top `depth`
/// neighbors (self excluded) for every query.
pub fn retrieve(
    docs: &[Document],
    queries: &[&str],
    backend: BackendSpec,
    depth: usize,
    config: &BenchmarkConfig,
) -> Result<Retrievals> {
    let docs = if backend.enriched {
        enrich_all(docs, &config.enrichment)
    } else {
        docs.to_vec()
    };
    let tokenized = config.tokenizer.tokenize_all(&docs);
    let embedder = Embedder::fit(backend.kind, &tokenized, &config.fit)?;
    let index = build_index(&embedder, &tokenized)?;
    let by_id: BTreeMap<&str, usize> = tokenized.iter().enumerate().map(|(i, d)| (d.id.as_str(), i)).collect();
    queries
        .par_iter()
        .map(|&q| {
            let doc = &tokenized[by_id[q]];
            let hits = match embedder.embed(doc).and_then(|e| index.top_k(&e, depth, Some(q))) {
                Ok(h) => h.into_iter().map(|(id, _)| id).collect(),
                Err(Error::ZeroNorm) | Err(Error::NotInferable) => Vec::new(),
                Err(e) => return Err(e),
            };
            Ok((q.to_owned(), hits))
        })
        .collect()
}

/// Averages precision@10 and recall@k over the truth queries.
pub fn score_retrievals(retrievals: &Retrievals, truth: &GroundTruth, ks: &[usize]) -> Result<(f64, Vec<(usize, f64)>)> {
    let n = truth.len().max(1) as f64;
    let mut precision = 0.0;
    let mut recall = vec![0.0; ks.len()];
    for q in truth.queries() {
        let relevant = truth.relevant(q).expect("query from truth");
        let hits = retrievals.get(q).map_or(&[][..], Vec::as_slice);
        precision += precision_at_k(hits, relevant, PRECISION_K);
        for (slot, &k) in recall.iter_mut().zip(ks) {
            *slot += recall_at_k(hits, relevant, k)?;
        }
    }
    Ok((
        precision / n,
        ks.iter().zip(recall).map(|(&k, r)| (k, r / n)).collect(),
    ))
}

/// Runs every backend against the truth queries. Rows follow the canonical
/// order: plain tf-idf, LDA, doc2vec, then their enriched variants.
pub fn run_benchmark(
    docs: &[Document],
    truth: &GroundTruth,
    backends: &[BackendSpec],
    config: &BenchmarkConfig,
) -> Result<BenchmarkOutcome> {
    if config.ks.is_empty() || config.ks.contains(&0) {
        return Err(Error::InvalidParameter("ks must be nonempty and positive".into()));
    }
    let ids: HashSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
    if let Some(q) = truth.queries().find(|q| !ids.contains(q.as_str())) {
        return Err(Error::UnknownDocument(q.clone()));
    }
    let queries: Vec<&str> = truth.queries().map(String::as_str).collect();
    let depth = config.ks.iter().copied().max().unwrap_or(PRECISION_K).max(PRECISION_K);

    let mut ordered: Vec<BackendSpec> = backends.to_vec();
    ordered.sort_by_key(|b| (b.enriched, b.kind));
    ordered.dedup();

    let mut rows = Vec::new();
    let mut all = BTreeMap::new();
    for backend in ordered {
        let started = Instant::now();
        let retrievals = retrieve(docs, &queries, backend, depth, config)?;
        let runtime_seconds = started.elapsed().as_secs_f64();
        let (precision_at_10, recall) = score_retrievals(&retrievals, truth, &config.ks)?;
        rows.push(BackendMetrics {
            backend,
            precision_at_10,
            recall,
            runtime_seconds,
        });
        all.insert(backend, retrievals);
    }
    Ok(BenchmarkOutcome {
        report: MetricsReport { rows },
        retrievals: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn precision_examples() {
        let rel = set(&["a", "b", "c"]);
        assert_eq!(precision_at_k(&["a", "b", "c"], &rel, 3), 1.0);

        let rel10: BTreeSet<String> = (0..10).map(|i| format!("r{i}")).collect();
        let retrieved: Vec<String> = (0..10)
            .map(|i| if i % 2 == 0 { format!("r{i}") } else { format!("x{i}") })
            .collect();
        assert_eq!(precision_at_k(&retrieved, &rel10, 10), 0.5);

        // Three retrieved, two relevant: denominator min(10, 3).
        let p = precision_at_k(&["a", "x", "b"], &rel, 10);
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(precision_at_k::<&str>(&[], &rel, 10), 0.0);
    }

    #[test]
    fn recall_examples() {
        let rel = set(&["a", "b"]);
        assert_eq!(recall_at_k(&["b", "x", "a"], &rel, 10).unwrap(), 1.0);
        assert_eq!(recall_at_k(&["x", "y"], &rel, 10).unwrap(), 0.0);
        let rel4 = set(&["a", "b", "c", "d"]);
        let retrieved: Vec<String> = ["a", "q", "b", "c"].iter().map(|s| s.to_string()).chain((0..16).map(|i| format!("z{i}"))).collect();
        assert_eq!(recall_at_k(&retrieved, &rel4, 20).unwrap(), 0.75);
        assert!(matches!(recall_at_k(&["a"], &BTreeSet::new(), 5), Err(Error::EmptyRelevantSet)));
    }

    #[test]
    fn truth_rejects_self_relevance() {
        let mut t = GroundTruth::new();
        assert!(t.add("q", "q").is_err());
        assert!(GroundTruth::from_tsv("q\tq\n", Path::new("t")).is_err());
        let t = GroundTruth::from_tsv("query_id\trelevant_id\nq\ta\nq\tb\n", Path::new("t")).unwrap();
        assert_eq!(t.relevant("q").unwrap().len(), 2);
        assert_eq!(GroundTruth::from_tsv(&t.to_tsv(), Path::new("t")).unwrap(), t);
    }

    #[test]
    fn backend_spec_parsing_and_order() {
        assert_eq!("lda+context".parse::<BackendSpec>().unwrap(), BackendSpec::enriched(BackendKind::Lda));
        assert!("bm25".parse::<BackendSpec>().is_err());
        let names: Vec<String> = BackendSpec::all().iter().map(|b| b.to_string()).collect();
        assert_eq!(
            names,
            ["tfidf", "lda", "doc2vec", "tfidf+context", "lda+context", "doc2vec+context"]
        );
    }

    #[test]
    fn duplicate_document_is_found_by_tfidf() {
        let mut docs = vec![
            Document::new("q", "welder fabrication steel mig tig"),
            Document::new("dup", "welder fabrication steel mig tig"),
        ];
        for i in 0..5 {
            docs.push(Document::new(format!("o{i}"), format!("clerk filing office{i} phones")));
        }
        let mut truth = GroundTruth::new();
        truth.add("q", "dup").unwrap();
        let cfg = BenchmarkConfig::default();
        let out = run_benchmark(&docs, &truth, &[BackendSpec::plain(BackendKind::TfIdf)], &cfg).unwrap();
        assert_eq!(out.report.rows[0].recall_at(10), Some(1.0));
    }

    #[test]
    fn missing_query_is_an_error() {
        let docs = vec![Document::new("a", "x y")];
        let mut truth = GroundTruth::new();
        truth.add("ghost", "a").unwrap();
        let cfg = BenchmarkConfig::default();
        assert!(matches!(
            run_benchmark(&docs, &truth, &[BackendSpec::plain(BackendKind::TfIdf)], &cfg),
            Err(Error::UnknownDocument(_))
        ));
    }

    #[test]
    fn report_layout() {
        let report = MetricsReport {
            rows: vec![BackendMetrics {
                backend: BackendSpec::plain(BackendKind::TfIdf),
                precision_at_10: 0.5,
                recall: DEFAULT_KS.iter().map(|&k| (k, 0.25)).collect(),
                runtime_seconds: 1.0,
            }],
        };
        assert_eq!(
            report.to_tsv(),
            "backend\tprecision@10\trecall@10\trecall@20\trecall@30\trecall@50\ntfidf\t0.500000\t0.250000\t0.250000\t0.250000\t0.250000\n"
        );
        assert!(report.to_text().contains("R@50"));
    }
}
