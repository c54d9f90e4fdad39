//! Uniform access to the three embedding backends.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::corpus::{TokenizedDocument, Vocabulary};
use crate::doc2vec::{self, Doc2VecModel, TrainConfig};
use crate::error::{Error, Result};
use crate::lda::{self, LdaConfig, LdaModel};
use crate::tfidf::{SparseVector, TfIdfModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendKind {
    TfIdf,
    Lda,
    Doc2Vec,
}

impl BackendKind {
    pub const ALL: [BackendKind; 3] = [BackendKind::TfIdf, BackendKind::Lda, BackendKind::Doc2Vec];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::TfIdf => "tfidf",
            BackendKind::Lda => "lda",
            BackendKind::Doc2Vec => "doc2vec",
        }
    }

    /// Default vocabulary threshold for the backend.
    pub fn default_min_count(self) -> usize {
        match self {
            BackendKind::TfIdf => 1,
            BackendKind::Lda | BackendKind::Doc2Vec => 5,
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BackendKind::ALL
            .into_iter()
            .find(|b| b.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown backend {s:?}")))
    }
}

/// A document embedding: sparse for tf-idf, dense otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Embedding {
    Sparse(SparseVector),
    Dense(Vec<f64>),
}

impl Embedding {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Embedding::Sparse(_) => "sparse",
            Embedding::Dense(_) => "dense",
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Embedding::Sparse(v) => v.norm(),
            Embedding::Dense(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        match (self, other) {
            (Embedding::Sparse(a), Embedding::Sparse(b)) => Ok(a.dot(b)),
            (Embedding::Dense(a), Embedding::Dense(b)) => {
                if a.len() != b.len() {
                    return Err(Error::InvalidParameter(format!(
                        "dimension mismatch: {} vs {}",
                        a.len(),
                        b.len()
                    )));
                }
                Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
            }
            (a, b) => Err(Error::KindMismatch(a.kind_name(), b.kind_name())),
        }
    }
}

impl From<Vec<f32>> for Embedding {
    fn from(v: Vec<f32>) -> Self {
        Embedding::Dense(v.into_iter().map(f64::from).collect())
    }
}

/// Stable 64-bit FNV-1a, used to derive per-document seeds.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Per-document seed independent of document order.
pub fn doc_seed(seed: u64, doc_id: &str) -> u64 {
    seed ^ fnv1a(doc_id.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceSettings {
    pub lda_fold_in_sweeps: usize,
    pub doc2vec_steps: usize,
    pub doc2vec_lr: f32,
    pub seed: u64,
}

impl Default for InferenceSettings {
    fn default() -> Self {
        InferenceSettings {
            lda_fold_in_sweeps: lda::DEFAULT_FOLD_IN_SWEEPS,
            doc2vec_steps: doc2vec::DEFAULT_INFER_STEPS,
            doc2vec_lr: 0.025,
            seed: 1,
        }
    }
}

/// A fitted backend that can embed documents.
#[derive(Debug, Clone)]
pub enum Embedder {
    TfIdf(TfIdfModel),
    Lda(LdaModel, InferenceSettings),
    Doc2Vec(Doc2VecModel, InferenceSettings),
}

/// Hyperparameters needed to fit any backend.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub min_count: Option<usize>,
    pub lda_topics: usize,
    pub lda_sweeps: usize,
    pub lda_alpha: Option<f64>,
    pub lda_beta: f64,
    pub doc2vec: TrainConfig,
    pub inference: InferenceSettings,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            min_count: None,
            lda_topics: 20,
            lda_sweeps: 100,
            lda_alpha: None,
            lda_beta: lda::DEFAULT_BETA,
            doc2vec: TrainConfig::default(),
            inference: InferenceSettings::default(),
        }
    }
}

impl FitSettings {
    pub fn lda_config(&self) -> LdaConfig {
        let mut cfg = LdaConfig::new(self.lda_topics, self.lda_sweeps, self.doc2vec.seed);
        if let Some(alpha) = self.lda_alpha {
            cfg.alpha = alpha;
        }
        cfg.beta = self.lda_beta;
        cfg
    }
}

impl Embedder {
    pub fn fit(kind: BackendKind, docs: &[TokenizedDocument], settings: &FitSettings) -> Result<Embedder> {
        let min_count = settings.min_count.unwrap_or_else(|| kind.default_min_count());
        let vocab = Arc::new(Vocabulary::build(docs, min_count)?);
        Ok(match kind {
            BackendKind::TfIdf => Embedder::TfIdf(TfIdfModel::fit(docs, vocab)?),
            BackendKind::Lda => Embedder::Lda(lda::fit_lda(docs, vocab, settings.lda_config())?, settings.inference),
            BackendKind::Doc2Vec => Embedder::Doc2Vec(
                doc2vec::train_doc2vec(docs, &settings.doc2vec, vocab)?,
                settings.inference,
            ),
        })
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Embedder::TfIdf(_) => BackendKind::TfIdf,
            Embedder::Lda(..) => BackendKind::Lda,
            Embedder::Doc2Vec(..) => BackendKind::Doc2Vec,
        }
    }

    /// Embeds one document. Doc2vec returns the stored paragraph vector for
    /// training documents and infers one otherwise.
    pub fn embed(&self, doc: &TokenizedDocument) -> Result<Embedding> {
        match self {
            Embedder::TfIdf(m) => Ok(Embedding::Sparse(m.transform(&doc.tokens))),
            Embedder::Lda(m, s) => Ok(Embedding::Dense(m.doc_vector(
                &doc.tokens,
                s.lda_fold_in_sweeps,
                doc_seed(s.seed, &doc.id),
            ))),
            Embedder::Doc2Vec(m, s) => {
                if m.contains(&doc.id) {
                    return m.doc_vector(&doc.id).map(Embedding::from);
                }
                m.infer(&doc.tokens, s.doc2vec_steps, s.doc2vec_lr, doc_seed(s.seed, &doc.id))
                    .map(Embedding::from)
            }
        }
    }

    /// Model files written by [`Embedder::save_dir`] for a backend.
    pub fn file_names(kind: BackendKind) -> &'static [&'static str] {
        match kind {
            BackendKind::TfIdf => &["tfidf.tsv"],
            BackendKind::Lda => &["lda.txt", "lda.vocab.tsv"],
            BackendKind::Doc2Vec => &["doc2vec.bin"],
        }
    }

    /// Writes the model into `dir`, returning the paths written.
    pub fn save_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let names = Self::file_names(self.kind());
        let paths: Vec<PathBuf> = names.iter().map(|n| dir.join(n)).collect();
        match self {
            Embedder::TfIdf(m) => m.save(&paths[0])?,
            Embedder::Lda(m, _) => {
                m.save(&paths[0])?;
                crate::io::write_atomic(&paths[1], m.vocabulary().to_tsv().as_bytes())?;
            }
            Embedder::Doc2Vec(m, _) => m.save(&paths[0])?,
        }
        Ok(paths)
    }

    pub fn load_dir(kind: BackendKind, dir: &Path, inference: InferenceSettings) -> Result<Embedder> {
        let names = Self::file_names(kind);
        Ok(match kind {
            BackendKind::TfIdf => Embedder::TfIdf(TfIdfModel::load(dir.join(names[0]))?),
            BackendKind::Lda => {
                let vocab_path = dir.join(names[1]);
                let vocab = Vocabulary::from_tsv(&crate::io::read_to_string(&vocab_path)?, 1)?;
                Embedder::Lda(LdaModel::load(dir.join(names[0]), Arc::new(vocab))?, inference)
            }
            BackendKind::Doc2Vec => Embedder::Doc2Vec(Doc2VecModel::load(dir.join(names[0]))?, inference),
        })
    }

    /// Embeds every document in parallel; the result order matches `docs`.
    pub fn embed_all(&self, docs: &[TokenizedDocument]) -> Vec<Result<Embedding>> {
        docs.par_iter().map(|d| self.embed(d)).collect()
    }
}
