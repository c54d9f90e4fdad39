//! Pipeline configuration: flat `key=value` file, `COLDSTART_*` environment
//! overrides and command-line flags, applied in that order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cf::Metric;
use crate::corpus::Tokenizer;
use crate::doc2vec::TrainConfig;
use crate::embedding::{BackendKind, FitSettings, InferenceSettings};
use crate::enrichment::{EnrichmentConfig, Field};
use crate::error::{Error, Result};
use crate::matcher::{DEFAULT_THRESHOLD, DEFAULT_TOP_M};

pub const ENV_PREFIX: &str = "COLDSTART_";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub backend: BackendKind,
    pub enrich_n: usize,
    pub enrich_fields: Vec<Field>,
    pub stopwords: bool,
    pub min_count: Option<usize>,
    pub dim: usize,
    pub epochs: usize,
    pub lr_start: f32,
    pub lr_end: f32,
    pub negative: usize,
    pub window: usize,
    pub infer_steps: usize,
    pub lda_topics: usize,
    pub lda_sweeps: usize,
    pub lda_alpha: Option<f64>,
    pub lda_beta: f64,
    pub fold_in_sweeps: usize,
    pub top_m: usize,
    pub threshold: f64,
    pub metric: Metric,
    pub neighbors: usize,
    pub n: usize,
    pub max_len: usize,
    pub workers: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let fit = FitSettings::default();
        PipelineConfig {
            corpus: None,
            ratings: None,
            out_dir: PathBuf::from("out"),
            backend: BackendKind::Doc2Vec,
            enrich_n: EnrichmentConfig::default().n_repeats,
            enrich_fields: Field::ALL.to_vec(),
            stopwords: true,
            min_count: None,
            dim: fit.doc2vec.dim,
            epochs: fit.doc2vec.epochs,
            lr_start: fit.doc2vec.lr_start,
            lr_end: fit.doc2vec.lr_end,
            negative: fit.doc2vec.negative,
            window: fit.doc2vec.window,
            infer_steps: fit.inference.doc2vec_steps,
            lda_topics: fit.lda_topics,
            lda_sweeps: fit.lda_sweeps,
            lda_alpha: None,
            lda_beta: fit.lda_beta,
            fold_in_sweeps: fit.inference.lda_fold_in_sweeps,
            top_m: DEFAULT_TOP_M,
            threshold: DEFAULT_THRESHOLD,
            metric: Metric::Pearson,
            neighbors: 50,
            n: 10,
            max_len: 20,
            workers: 1,
            seed: 1,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("invalid value {value:?} for {key}")))
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value.trim() {
        "" | "auto" | "none" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

fn path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn show_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_owned(), T::to_string)
}

impl PipelineConfig {
    pub const KEYS: [&'static str; 28] = [
        "corpus",
        "ratings",
        "out_dir",
        "backend",
        "enrich_n",
        "enrich_fields",
        "stopwords",
        "min_count",
        "dim",
        "epochs",
        "lr_start",
        "lr_end",
        "negative",
        "window",
        "infer_steps",
        "lda_topics",
        "lda_sweeps",
        "lda_alpha",
        "lda_beta",
        "fold_in_sweeps",
        "top_m",
        "threshold",
        "metric",
        "neighbors",
        "n",
        "max_len",
        "workers",
        "seed",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "corpus" => self.corpus = path(value),
            "ratings" => self.ratings = path(value),
            "out_dir" => self.out_dir = path(value).unwrap_or_else(|| PathBuf::from(".")),
            "backend" => self.backend = value.parse()?,
            "enrich_n" => self.enrich_n = parse(key, value)?,
            "enrich_fields" => self.enrich_fields = EnrichmentConfig::parse_fields(value)?,
            "stopwords" => self.stopwords = parse(key, value)?,
            "min_count" => self.min_count = optional(key, value)?,
            "dim" => self.dim = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "lr_start" => self.lr_start = parse(key, value)?,
            "lr_end" => self.lr_end = parse(key, value)?,
            "negative" => self.negative = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "infer_steps" => self.infer_steps = parse(key, value)?,
            "lda_topics" => self.lda_topics = parse(key, value)?,
            "lda_sweeps" => self.lda_sweeps = parse(key, value)?,
            "lda_alpha" => self.lda_alpha = optional(key, value)?,
            "lda_beta" => self.lda_beta = parse(key, value)?,
            "fold_in_sweeps" => self.fold_in_sweeps = parse(key, value)?,
            "top_m" => self.top_m = parse(key, value)?,
            "threshold" => self.threshold = parse(key, value)?,
            "metric" => self.metric = value.parse()?,
            "neighbors" => self.neighbors = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "max_len" => self.max_len = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("{}:{}: expected key=value", origin.display(), i + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::InvalidParameter(format!("{}:{}: {e}", origin.display(), i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&crate::io::read_to_string(path)?, path)
    }

    /// Applies every `COLDSTART_<KEY>` variable; names are case-insensitive.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
        let mut found: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                let key = k.strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
                Self::KEYS.contains(&key.as_str()).then_some((key, v))
            })
            .collect();
        found.sort();
        for (key, value) in found {
            self.set(&key, &value)
                .map_err(|e| Error::InvalidParameter(format!("{ENV_PREFIX}{}: {e}", key.to_ascii_uppercase())))?;
        }
        Ok(())
    }

    pub fn to_map(&self) -> BTreeMap<&'static str, String> {
        let show_path = |p: &Option<PathBuf>| p.as_ref().map_or_else(String::new, |p| p.display().to_string());
        let fields: Vec<&str> = self.enrich_fields.iter().map(|f| f.name()).collect();
        let values = [
            show_path(&self.corpus),
            show_path(&self.ratings),
            self.out_dir.display().to_string(),
            self.backend.to_string(),
            self.enrich_n.to_string(),
            fields.join(","),
            self.stopwords.to_string(),
            show_opt(&self.min_count),
            self.dim.to_string(),
            self.epochs.to_string(),
            self.lr_start.to_string(),
            self.lr_end.to_string(),
            self.negative.to_string(),
            self.window.to_string(),
            self.infer_steps.to_string(),
            self.lda_topics.to_string(),
            self.lda_sweeps.to_string(),
            show_opt(&self.lda_alpha),
            self.lda_beta.to_string(),
            self.fold_in_sweeps.to_string(),
            self.top_m.to_string(),
            self.threshold.to_string(),
            self.metric.to_string(),
            self.neighbors.to_string(),
            self.n.to_string(),
            self.max_len.to_string(),
            self.workers.to_string(),
            self.seed.to_string(),
        ];
        Self::KEYS.into_iter().zip(values).collect()
    }

    /// Canonical `key=value` text, keys sorted. Parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_map() {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// SHA-256 of the canonical text without `out_dir`.
    pub fn hash(&self) -> String {
        let mut map = self.to_map();
        map.remove("out_dir");
        let mut text = String::new();
        for (k, v) in map {
            let _ = writeln!(text, "{k}={v}");
        }
        crate::io::sha256_hex(text.as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.max_len == 0 || self.neighbors == 0 || self.top_m == 0 {
            return Err(Error::InvalidParameter("n, max_len, neighbors and top_m must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParameter(format!("threshold {} outside [-1, 1]", self.threshold)));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        self.train_config().validate(0)?;
        self.fit_settings().lda_config().validate()
    }

    pub fn corpus_path(&self) -> Result<&Path> {
        self.corpus
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("no corpus path configured".into()))
    }

    pub fn ratings_path(&self) -> Result<&Path> {
        self.ratings
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("no ratings path configured".into()))
    }

    pub fn tokenizer(&self) -> Tokenizer {
        Tokenizer::new(self.stopwords)
    }

    pub fn enrichment(&self) -> EnrichmentConfig {
        EnrichmentConfig::new(self.enrich_n, &self.enrich_fields)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            epochs: self.epochs,
            lr_start: self.lr_start,
            lr_end: self.lr_end,
            negative: self.negative,
            window: self.window,
            seed: self.seed,
            workers: self.workers,
        }
    }

    pub fn inference(&self) -> InferenceSettings {
        InferenceSettings {
            lda_fold_in_sweeps: self.fold_in_sweeps,
            doc2vec_steps: self.infer_steps,
            doc2vec_lr: self.lr_start,
            seed: self.seed,
        }
    }

    pub fn fit_settings(&self) -> FitSettings {
        FitSettings {
            min_count: self.min_count,
            lda_topics: self.lda_topics,
            lda_sweeps: self.lda_sweeps,
            lda_alpha: self.lda_alpha,
            lda_beta: self.lda_beta,
            doc2vec: self.train_config(),
            inference: self.inference(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = PipelineConfig::default();
        c.set("backend", "lda").unwrap();
        c.set("lda_alpha", "0.1").unwrap();
        c.set("enrich_fields", "skills,title").unwrap();
        c.corpus = Some("jobs.jsonl".into());
        let mut back = PipelineConfig::default();
        back.apply_text(&c.to_text(), Path::new("cfg")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_errors() {
        let mut c = PipelineConfig::default();
        c.apply_text("# daily run\ndim = 64  # smaller\n\n", Path::new("cfg")).unwrap();
        assert_eq!(c.dim, 64);
        assert!(c.apply_text("dim\n", Path::new("cfg")).is_err());
        assert!(c.apply_text("colour=red\n", Path::new("cfg")).is_err());
        assert!(matches!(c.set("backend", "bm25"), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn env_overrides_file() {
        let mut c = PipelineConfig::default();
        c.apply_text("seed=3\nwindow=2\n", Path::new("cfg")).unwrap();
        let env = vec![
            ("COLDSTART_SEED".to_owned(), "9".to_owned()),
            ("HOME".to_owned(), "/root".to_owned()),
            ("COLDSTART_UNRELATED_THING".to_owned(), "x".to_owned()),
        ];
        c.apply_env(env).unwrap();
        assert_eq!((c.seed, c.window), (9, 2));
    }

    #[test]
    fn hash_ignores_out_dir_only() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        b.out_dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn seed_reaches_every_stage() {
        let mut c = PipelineConfig::default();
        c.seed = 42;
        let fit = c.fit_settings();
        assert_eq!(fit.doc2vec.seed, 42);
        assert_eq!(fit.inference.seed, 42);
        assert_eq!(fit.lda_config().seed, 42);
    }
}
