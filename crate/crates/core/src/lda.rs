//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Documents are embedded as normalized topic proportions obtained by folding
//! the document in against frozen topic-word counts.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{TokenizedDocument, Vocabulary};
use crate::error::{Error, Result};

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_FOLD_IN_SWEEPS: usize = 50;
/// Topic count used for the production-scale job corpus.
pub const PRODUCTION_TOPICS: usize = 805;

pub fn default_alpha(k: usize) -> f64 {
    50.0 / k as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    pub sweeps: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
}

impl LdaConfig {
    pub fn new(topics: usize, sweeps: usize, seed: u64) -> Self {
        LdaConfig {
            topics,
            sweeps,
            alpha: default_alpha(topics.max(1)),
            beta: DEFAULT_BETA,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics < 1 {
            return Err(Error::InvalidParameter("topic count K must be >= 1".into()));
        }
        if self.sweeps < 1 {
            return Err(Error::InvalidParameter("sweeps must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidParameter("alpha and beta must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LdaModel {
    k: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    /// K×V, row-major.
    topic_word: Vec<u32>,
    topic_totals: Vec<u64>,
    vocab: Arc<Vocabulary>,
}

/// Normalized topic proportions; entries are non-negative and sum to one.
pub type TopicVector = Vec<f64>;

/// Samples `weights` proportionally; the last index absorbs rounding.
fn sample_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Gibbs sampler state. Exposed so callers can observe the chain between
/// sweeps; [`fit_lda`] drives it to completion.
pub struct LdaSampler {
    config: LdaConfig,
    vocab: Arc<Vocabulary>,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<u32>,
    topic_totals: Vec<u64>,
    total_tokens: u64,
    rng: ChaCha8Rng,
    scratch: Vec<f64>,
}

impl LdaSampler {
    pub fn new(docs: &[TokenizedDocument], vocab: Arc<Vocabulary>, config: LdaConfig) -> Result<Self> {
        config.validate()?;
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let k = config.topics;
        let v = vocab.len();
        let encoded: Vec<Vec<usize>> = docs.iter().map(|d| vocab.encode(&d.tokens)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut topic_word = vec![0u32; k * v];
        let mut topic_totals = vec![0u64; k];
        let mut doc_topic = Vec::with_capacity(encoded.len());
        let mut assignments = Vec::with_capacity(encoded.len());
        for words in &encoded {
            let mut counts = vec![0u32; k];
            let z: Vec<usize> = words
                .iter()
                .map(|&w| {
                    let t = rng.gen_range(0..k);
                    counts[t] += 1;
                    topic_word[t * v + w] += 1;
                    topic_totals[t] += 1;
                    t
                })
                .collect();
            doc_topic.push(counts);
            assignments.push(z);
        }
        let total_tokens = encoded.iter().map(|d| d.len() as u64).sum();
        Ok(LdaSampler {
            scratch: vec![0.0; k],
            config,
            vocab,
            docs: encoded,
            assignments,
            doc_topic,
            topic_word,
            topic_totals,
            total_tokens,
            rng,
        })
    }

    /// One full pass resampling every token's topic from the collapsed
    /// conditional.
    pub fn sweep(&mut self) {
        let k = self.config.topics;
        let v = self.vocab.len();
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let v_beta = v as f64 * beta;
        for (d, words) in self.docs.iter().enumerate() {
            let dt = &mut self.doc_topic[d];
            for (pos, &w) in words.iter().enumerate() {
                let old = self.assignments[d][pos];
                dt[old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_totals[old] -= 1;

                for t in 0..k {
                    self.scratch[t] = (dt[t] as f64 + alpha)
                        * (self.topic_word[t * v + w] as f64 + beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                }
                let new = sample_index(&self.scratch, &mut self.rng);

                self.assignments[d][pos] = new;
                dt[new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_totals[new] += 1;
            }
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    pub fn doc_topic_counts(&self, doc: usize) -> &[u32] {
        &self.doc_topic[doc]
    }

    pub fn doc_len(&self, doc: usize) -> usize {
        self.docs[doc].len()
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    /// Checks every count-conservation invariant of the chain.
    pub fn counts_consistent(&self) -> bool {
        let k = self.config.topics;
        let v = self.vocab.len();
        let rows_ok = (0..k).all(|t| {
            let row: u64 = self.topic_word[t * v..(t + 1) * v].iter().map(|&c| c as u64).sum();
            row == self.topic_totals[t]
        });
        let docs_ok = self
            .doc_topic
            .iter()
            .zip(&self.docs)
            .all(|(dt, w)| dt.iter().map(|&c| c as usize).sum::<usize>() == w.len());
        rows_ok && docs_ok && self.topic_totals.iter().sum::<u64>() == self.total_tokens
    }

    /// Training-set perplexity under the current point estimates of the
    /// document-topic and topic-word distributions.
    pub fn perplexity(&self) -> f64 {
        let k = self.config.topics;
        let v = self.vocab.len();
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let mut log_lik = 0.0;
        for (dt, words) in self.doc_topic.iter().zip(&self.docs) {
            let denom = words.len() as f64 + k as f64 * alpha;
            for &w in words {
                let p: f64 = (0..k)
                    .map(|t| {
                        let theta = (dt[t] as f64 + alpha) / denom;
                        let phi = (self.topic_word[t * v + w] as f64 + beta)
                            / (self.topic_totals[t] as f64 + v as f64 * beta);
                        theta * phi
                    })
                    .sum();
                log_lik += p.ln();
            }
        }
        if self.total_tokens == 0 {
            return 1.0;
        }
        (-log_lik / self.total_tokens as f64).exp()
    }

    /// Topic proportions of a training document, from its own assignments.
    pub fn training_doc_vector(&self, doc: usize) -> TopicVector {
        normalize_counts(&self.doc_topic[doc], self.config.alpha)
    }

    pub fn into_model(self) -> LdaModel {
        LdaModel {
            k: self.config.topics,
            alpha: self.config.alpha,
            beta: self.config.beta,
            seed: self.config.seed,
            topic_word: self.topic_word,
            topic_totals: self.topic_totals,
            vocab: self.vocab,
        }
    }
}

fn normalize_counts(counts: &[u32], alpha: f64) -> TopicVector {
    let total: f64 = counts.iter().map(|&c| c as f64 + alpha).sum();
    counts.iter().map(|&c| (c as f64 + alpha) / total).collect()
}

pub fn fit_lda(docs: &[TokenizedDocument], vocab: Arc<Vocabulary>, config: LdaConfig) -> Result<LdaModel> {
    let sweeps = config.sweeps;
    let mut sampler = LdaSampler::new(docs, vocab, config)?;
    for _ in 0..sweeps {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

impl LdaModel {
    pub fn topics(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.topic_word[topic * self.vocab.len() + word]
    }

    /// Folds a document in with the topic-word counts frozen and returns its
    /// smoothed topic proportions. Documents without in-vocabulary tokens
    /// get the uniform vector.
    pub fn doc_vector(&self, tokens: &[String], fold_in_sweeps: usize, seed: u64) -> TopicVector {
        let k = self.k;
        let v = self.vocab.len();
        let words = self.vocab.encode(tokens);
        if words.is_empty() {
            return vec![1.0 / k as f64; k];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u32; k];
        let mut z: Vec<usize> = words
            .iter()
            .map(|_| {
                let t = rng.gen_range(0..k);
                counts[t] += 1;
                t
            })
            .collect();
        // The word factor is fixed across sweeps.
        let v_beta = v as f64 * self.beta;
        let phi: Vec<Vec<f64>> = words
            .iter()
            .map(|&w| {
                (0..k)
                    .map(|t| {
                        (self.topic_word[t * v + w] as f64 + self.beta)
                            / (self.topic_totals[t] as f64 + v_beta)
                    })
                    .collect()
            })
            .collect();
        let mut weights = vec![0.0; k];
        for _ in 0..fold_in_sweeps {
            for (pos, word_phi) in phi.iter().enumerate() {
                counts[z[pos]] -= 1;
                for t in 0..k {
                    weights[t] = (counts[t] as f64 + self.alpha) * word_phi[t];
                }
                let new = sample_index(&weights, &mut rng);
                z[pos] = new;
                counts[new] += 1;
            }
        }
        normalize_counts(&counts, self.alpha)
    }

    /// Header `K=.. alpha=.. beta=.. V=.. seed=..`, then one row of
    /// space-separated topic-word counts per topic.
    pub fn to_text(&self) -> String {
        let v = self.vocab.len();
        let mut out = format!(
            "K={} alpha={} beta={} V={} seed={}\n",
            self.k, self.alpha, self.beta, v, self.seed
        );
        for t in 0..self.k {
            let row: Vec<String> = self.topic_word[t * v..(t + 1) * v]
                .iter()
                .map(u32::to_string)
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, vocab: Arc<Vocabulary>) -> Result<Self> {
        let bad = |m: &str| Error::Model(format!("LDA model: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let mut k = None;
        let mut alpha = None;
        let mut beta = None;
        let mut v = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(|| bad("malformed header"))?;
            match key {
                "K" => k = value.parse::<usize>().ok(),
                "alpha" => alpha = value.parse::<f64>().ok(),
                "beta" => beta = value.parse::<f64>().ok(),
                "V" => v = value.parse::<usize>().ok(),
                "seed" => seed = value.parse::<u64>().ok(),
                _ => return Err(bad("unknown header key")),
            }
        }
        let (Some(k), Some(alpha), Some(beta), Some(v), Some(seed)) = (k, alpha, beta, v, seed) else {
            return Err(bad("incomplete header"));
        };
        if v != vocab.len() {
            return Err(bad("vocabulary size does not match header"));
        }
        let mut topic_word = Vec::with_capacity(k * v);
        for _ in 0..k {
            let row = lines.next().ok_or_else(|| bad("missing topic row"))?;
            let before = topic_word.len();
            for c in row.split_whitespace() {
                topic_word.push(c.parse::<u32>().map_err(|_| bad("bad count"))?);
            }
            if topic_word.len() - before != v {
                return Err(bad("topic row has wrong length"));
            }
        }
        let topic_totals = (0..k)
            .map(|t| topic_word[t * v..(t + 1) * v].iter().map(|&c| c as u64).sum())
            .collect();
        Ok(LdaModel {
            k,
            alpha,
            beta,
            seed,
            topic_word,
            topic_totals,
            vocab,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>, vocab: Arc<Vocabulary>) -> Result<Self> {
        Self::from_text(&crate::io::read_to_string(path)?, vocab)
    }
}

pub fn lda_doc_vector(model: &LdaModel, doc: &TokenizedDocument, fold_in_sweeps: usize, seed: u64) -> TopicVector {
    model.doc_vector(&doc.tokens, fold_in_sweeps, seed)
}

pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}
