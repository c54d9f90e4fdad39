//! Paragraph vectors, distributed-memory variant (PV-DM).
//!
//! For every position of a document the context vector is the mean of the
//! document's paragraph vector and the word vectors inside the window. The
//! context predicts the center word through the output matrix, trained with
//! negative sampling (or an exact softmax for small vocabularies). Unseen
//! documents are inferred by running the same update with the word and
//! output matrices frozen.
//!
//! Parameter updates go through the [`Weights`] trait so one kernel serves
//! the deterministic single-worker mode (`Cell<f32>`), the lock-free
//! multi-worker mode (relaxed atomics) and inference (frozen globals).

use std::cell::Cell;
use std::collections::HashMap;
use std::io::{BufRead, Read};
use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{TokenizedDocument, Vocabulary};
use crate::error::{Error, Result};

/// Largest vocabulary for which the exact softmax may be selected.
pub const EXACT_SOFTMAX_MAX_VOCAB: usize = 2000;
pub const DEFAULT_DIM: usize = 100;
pub const DEFAULT_INFER_STEPS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub lr_start: f32,
    pub lr_end: f32,
    /// Noise words per position; 0 selects the exact softmax.
    pub negative: usize,
    pub window: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: DEFAULT_DIM,
            epochs: 1,
            lr_start: 0.025,
            lr_end: 0.0001,
            negative: 5,
            window: 5,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, vocab_size: usize) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidParameter(m.to_owned()));
        if self.dim == 0 {
            return fail("dim must be >= 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be >= 1");
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end) {
            return fail("learning rates must satisfy lr_start >= lr_end > 0");
        }
        if self.workers == 0 {
            return fail("workers must be >= 1");
        }
        if self.negative == 0 && vocab_size > EXACT_SOFTMAX_MAX_VOCAB {
            return fail("exact softmax (negative=0) requires a vocabulary of at most 2000 tokens");
        }
        Ok(())
    }
}

/// Per-epoch training diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean loss per predicted token, one entry per epoch.
    pub epoch_loss: Vec<f64>,
    pub skipped_docs: usize,
}

/// Exact-softmax step handed to a probe during training.
pub struct SoftmaxStep<'a> {
    pub target: usize,
    pub probabilities: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct Doc2VecModel {
    dim: usize,
    window: usize,
    negative: usize,
    seed: u64,
    vocab: Arc<Vocabulary>,
    word_in: Vec<f32>,
    word_out: Vec<f32>,
    doc_vecs: Vec<f32>,
    doc_ids: Vec<String>,
    doc_rows: HashMap<String, usize>,
}

pub(crate) trait Weights {
    fn get(&self, i: usize) -> f32;
    fn add(&self, i: usize, delta: f32);
}

impl Weights for [Cell<f32>] {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        self[i].get()
    }

    #[inline]
    fn add(&self, i: usize, delta: f32) {
        self[i].set(self[i].get() + delta);
    }
}

/// f32 stored as bits; concurrent read-modify-write may lose updates, which
/// the multi-worker mode tolerates.
#[repr(transparent)]
pub(crate) struct SharedF32(AtomicU32);

impl Weights for [SharedF32] {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self[i].0.load(Ordering::Relaxed))
    }

    #[inline]
    fn add(&self, i: usize, delta: f32) {
        let v = Weights::get(self, i) + delta;
        self[i].0.store(v.to_bits(), Ordering::Relaxed);
    }
}

/// Read-only parameters; updates are discarded.
pub(crate) struct Frozen<'a>(&'a [f32]);

impl Weights for Frozen<'_> {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        self.0[i]
    }

    #[inline]
    fn add(&self, _: usize, _: f32) {}
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln σ(x), stable for large |x|.
#[inline]
fn log_sigmoid(x: f64) -> f64 {
    -((-x).max(0.0) + (-x.abs()).exp().ln_1p())
}

/// Negative-sampling loss `-ln σ(u·v⁺) - Σ ln σ(-u·v⁻)` for context `u`,
/// where the `v` rows come from the row-major `word_out` matrix.
pub fn negative_sampling_loss(context: &[f64], target: usize, negatives: &[usize], word_out: &[f64]) -> f64 {
    let dim = context.len();
    let dot = |w: usize| -> f64 {
        context
            .iter()
            .zip(&word_out[w * dim..(w + 1) * dim])
            .map(|(a, b)| a * b)
            .sum()
    };
    -log_sigmoid(dot(target)) - negatives.iter().map(|&n| log_sigmoid(-dot(n))).sum::<f64>()
}

/// Loss together with its gradient with respect to the context and every
/// entry of `word_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSamplingGrad {
    pub loss: f64,
    pub d_context: Vec<f64>,
    pub d_word_out: Vec<f64>,
}

pub fn negative_sampling_grad(
    context: &[f64],
    target: usize,
    negatives: &[usize],
    word_out: &[f64],
) -> NegativeSamplingGrad {
    let dim = context.len();
    let mut d_context = vec![0.0; dim];
    let mut d_word_out = vec![0.0; word_out.len()];
    let mut loss = 0.0;
    let labelled = std::iter::once((target, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
    for (w, label) in labelled {
        let row = &word_out[w * dim..(w + 1) * dim];
        let s: f64 = context.iter().zip(row).map(|(a, b)| a * b).sum();
        loss -= if label > 0.0 { log_sigmoid(s) } else { log_sigmoid(-s) };
        // dL/ds = σ(s) - label
        let g = sigmoid(s) - label;
        for k in 0..dim {
            d_context[k] += g * row[k];
            d_word_out[w * dim + k] += g * context[k];
        }
    }
    NegativeSamplingGrad {
        loss,
        d_context,
        d_word_out,
    }
}

struct Scratch {
    context: Vec<f32>,
    error: Vec<f32>,
    logits: Vec<f64>,
    negatives: Vec<usize>,
}

impl Scratch {
    fn new(dim: usize, vocab: usize, exact: bool) -> Self {
        Scratch {
            context: vec![0.0; dim],
            error: vec![0.0; dim],
            logits: if exact { vec![0.0; vocab] } else { Vec::new() },
            negatives: Vec::new(),
        }
    }
}

type Probe<'p> = Option<&'p mut dyn FnMut(&SoftmaxStep<'_>)>;

/// Shared read-mostly state of one training or inference run.
struct Kernel<'a, G: Weights + ?Sized, D: Weights + ?Sized> {
    dim: usize,
    window: usize,
    negative: usize,
    vocab_size: usize,
    noise: &'a WeightedIndex<f64>,
    word_in: &'a G,
    word_out: &'a G,
    docs: &'a D,
}

impl<G: Weights + ?Sized, D: Weights + ?Sized> Kernel<'_, G, D> {
    /// One PV-DM update at position `pos` of `words`; returns the loss.
    fn step(
        &self,
        doc_row: usize,
        words: &[usize],
        pos: usize,
        lr: f32,
        rng: &mut impl Rng,
        scratch: &mut Scratch,
        probe: &mut Probe<'_>,
    ) -> f64 {
        let dim = self.dim;
        let lo = pos.saturating_sub(self.window);
        let hi = (pos + self.window + 1).min(words.len());
        let doc_base = doc_row * dim;

        for k in 0..dim {
            scratch.context[k] = self.docs.get(doc_base + k);
        }
        let mut n_inputs = 1usize;
        for (j, &w) in words.iter().enumerate().take(hi).skip(lo) {
            if j == pos {
                continue;
            }
            n_inputs += 1;
            for k in 0..dim {
                scratch.context[k] += self.word_in.get(w * dim + k);
            }
        }
        let inv = 1.0 / n_inputs as f32;
        scratch.context.iter_mut().for_each(|x| *x *= inv);
        scratch.error.iter_mut().for_each(|x| *x = 0.0);

        let target = words[pos];
        let loss = if self.negative == 0 {
            self.exact_softmax(target, lr, scratch, probe)
        } else {
            scratch.negatives.clear();
            for _ in 0..self.negative {
                let n = self.noise.sample(rng);
                if n != target {
                    scratch.negatives.push(n);
                }
            }
            let mut loss = 0.0;
            let labelled = std::iter::once((target, 1.0f32)).chain(scratch.negatives.iter().map(|&n| (n, 0.0)));
            for (w, label) in labelled {
                let base = w * dim;
                let s: f32 = (0..dim)
                    .map(|k| scratch.context[k] * self.word_out.get(base + k))
                    .sum();
                let s = s as f64;
                loss -= if label > 0.0 { log_sigmoid(s) } else { log_sigmoid(-s) };
                let g = (label - sigmoid(s) as f32) * lr;
                for k in 0..dim {
                    scratch.error[k] += g * self.word_out.get(base + k);
                    self.word_out.add(base + k, g * scratch.context[k]);
                }
            }
            loss
        };

        // The context-mean error is applied in full to every input vector.
        for k in 0..dim {
            self.docs.add(doc_base + k, scratch.error[k]);
        }
        for (j, &w) in words.iter().enumerate().take(hi).skip(lo) {
            if j == pos {
                continue;
            }
            for k in 0..dim {
                self.word_in.add(w * dim + k, scratch.error[k]);
            }
        }
        loss
    }

    fn exact_softmax(&self, target: usize, lr: f32, scratch: &mut Scratch, probe: &mut Probe<'_>) -> f64 {
        let dim = self.dim;
        let mut max = f64::NEG_INFINITY;
        for w in 0..self.vocab_size {
            let s: f32 = (0..dim)
                .map(|k| scratch.context[k] * self.word_out.get(w * dim + k))
                .sum();
            scratch.logits[w] = s as f64;
            max = max.max(s as f64);
        }
        let mut z = 0.0;
        for l in scratch.logits.iter_mut() {
            *l = (*l - max).exp();
            z += *l;
        }
        for l in scratch.logits.iter_mut() {
            *l /= z;
        }
        if let Some(probe) = probe.as_mut() {
            probe(&SoftmaxStep {
                target,
                probabilities: &scratch.logits,
            });
        }
        let loss = -scratch.logits[target].ln();
        for w in 0..self.vocab_size {
            let label = if w == target { 1.0 } else { 0.0 };
            let g = ((label - scratch.logits[w]) as f32) * lr;
            let base = w * dim;
            for k in 0..dim {
                scratch.error[k] += g * self.word_out.get(base + k);
                self.word_out.add(base + k, g * scratch.context[k]);
            }
        }
        loss
    }
}

fn noise_distribution(vocab: &Vocabulary) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(vocab.counts().iter().map(|&c| (c as f64).powf(0.75)))
        .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))
}

fn uniform_init(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<f32> {
    let bound = 0.5 / dim as f32;
    (0..len).map(|_| rng.gen_range(-bound..bound)).collect()
}

fn doc_rng(seed: u64, epoch: usize, doc: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64) << 40) ^ doc as u64 ^ (1 << 63));
    rng
}

fn learning_rate(config: &TrainConfig, step: usize, total: usize) -> f32 {
    let progress = step as f32 / total.max(1) as f32;
    (config.lr_start - (config.lr_start - config.lr_end) * progress).max(config.lr_end)
}

pub fn train_doc2vec(docs: &[TokenizedDocument], config: &TrainConfig, vocab: Arc<Vocabulary>) -> Result<Doc2VecModel> {
    train_doc2vec_with(docs, config, vocab, None).map(|(m, _)| m)
}

/// Trains a model and reports per-epoch losses. `probe` observes every
/// exact-softmax step; it is only invoked in exact mode with one worker.
pub fn train_doc2vec_with(
    docs: &[TokenizedDocument],
    config: &TrainConfig,
    vocab: Arc<Vocabulary>,
    mut probe: Probe<'_>,
) -> Result<(Doc2VecModel, TrainReport)> {
    config.validate(vocab.len())?;
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let dim = config.dim;
    let v = vocab.len();

    let mut doc_rows = HashMap::with_capacity(docs.len());
    for (row, d) in docs.iter().enumerate() {
        if doc_rows.insert(d.id.clone(), row).is_some() {
            return Err(Error::DuplicateId(d.id.clone()));
        }
    }
    let encoded: Vec<Vec<usize>> = docs.iter().map(|d| vocab.encode(&d.tokens)).collect();
    let mut report = TrainReport::default();
    for (d, words) in docs.iter().zip(&encoded) {
        if words.is_empty() {
            warn!("document {:?} has no in-vocabulary tokens; skipped", d.id);
            report.skipped_docs += 1;
        }
    }

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut word_in = uniform_init(&mut init_rng, v * dim, dim);
    let mut doc_vecs = uniform_init(&mut init_rng, docs.len() * dim, dim);
    let mut word_out = vec![0.0f32; v * dim];
    let noise = noise_distribution(&vocab)?;

    let tokens_per_epoch: usize = encoded.iter().map(Vec::len).sum();
    // Offset of each document's first token within an epoch.
    let offsets: Vec<usize> = encoded
        .iter()
        .scan(0, |acc, w| {
            let start = *acc;
            *acc += w.len();
            Some(start)
        })
        .collect();
    let total_steps = tokens_per_epoch * config.epochs;

    if config.workers == 1 {
        let wi = Cell::from_mut(&mut word_in[..]).as_slice_of_cells();
        let wo = Cell::from_mut(&mut word_out[..]).as_slice_of_cells();
        let dv = Cell::from_mut(&mut doc_vecs[..]).as_slice_of_cells();
        let kernel = Kernel {
            dim,
            window: config.window,
            negative: config.negative,
            vocab_size: v,
            noise: &noise,
            word_in: wi,
            word_out: wo,
            docs: dv,
        };
        let mut scratch = Scratch::new(dim, v, config.negative == 0);
        for epoch in 0..config.epochs {
            let mut loss = 0.0;
            for (d, words) in encoded.iter().enumerate() {
                let mut rng = doc_rng(config.seed, epoch, d);
                for pos in 0..words.len() {
                    let step = epoch * tokens_per_epoch + offsets[d] + pos;
                    let lr = learning_rate(config, step, total_steps);
                    loss += kernel.step(d, words, pos, lr, &mut rng, &mut scratch, &mut probe);
                }
            }
            report.epoch_loss.push(loss / tokens_per_epoch.max(1) as f64);
        }
    } else {
        let share = |v: Vec<f32>| -> Vec<SharedF32> { v.into_iter().map(|x| SharedF32(AtomicU32::new(x.to_bits()))).collect() };
        let unshare = |v: Vec<SharedF32>| -> Vec<f32> { v.into_iter().map(|x| f32::from_bits(x.0.into_inner())).collect() };
        let wi = share(std::mem::take(&mut word_in));
        let wo = share(std::mem::take(&mut word_out));
        let dv = share(std::mem::take(&mut doc_vecs));
        let kernel = Kernel {
            dim,
            window: config.window,
            negative: config.negative,
            vocab_size: v,
            noise: &noise,
            word_in: &wi[..],
            word_out: &wo[..],
            docs: &dv[..],
        };
        for epoch in 0..config.epochs {
            let losses: Vec<f64> = std::thread::scope(|s| {
                let handles: Vec<_> = (0..config.workers)
                    .map(|worker| {
                        let kernel = &kernel;
                        let encoded = &encoded;
                        let offsets = &offsets;
                        s.spawn(move || {
                            let mut scratch = Scratch::new(dim, v, config.negative == 0);
                            let mut none: Probe<'_> = None;
                            let mut loss = 0.0;
                            for d in (worker..encoded.len()).step_by(config.workers) {
                                let words = &encoded[d];
                                let mut rng = doc_rng(config.seed, epoch, d);
                                for pos in 0..words.len() {
                                    let step = epoch * tokens_per_epoch + offsets[d] + pos;
                                    let lr = learning_rate(config, step, total_steps);
                                    loss += kernel.step(d, words, pos, lr, &mut rng, &mut scratch, &mut none);
                                }
                            }
                            loss
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
            });
            report
                .epoch_loss
                .push(losses.iter().sum::<f64>() / tokens_per_epoch.max(1) as f64);
        }
        word_in = unshare(wi);
        word_out = unshare(wo);
        doc_vecs = unshare(dv);
    }

    let model = Doc2VecModel {
        dim,
        window: config.window,
        negative: config.negative,
        seed: config.seed,
        vocab,
        word_in,
        word_out,
        doc_vecs,
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        doc_rows,
    };
    if !model.is_finite() {
        return Err(Error::Data("training diverged: non-finite parameters".into()));
    }
    Ok((model, report))
}

impl Doc2VecModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn negative(&self) -> usize {
        self.negative
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.doc_rows.contains_key(doc_id)
    }

    pub fn word_in(&self) -> &[f32] {
        &self.word_in
    }

    pub fn word_out(&self) -> &[f32] {
        &self.word_out
    }

    pub fn is_finite(&self) -> bool {
        self.word_in
            .iter()
            .chain(&self.word_out)
            .chain(&self.doc_vecs)
            .all(|x| x.is_finite())
    }

    /// Stored paragraph vector of a training document.
    pub fn doc_vector(&self, doc_id: &str) -> Result<Vec<f32>> {
        let row = *self
            .doc_rows
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))?;
        Ok(self.doc_vecs[row * self.dim..(row + 1) * self.dim].to_vec())
    }

    /// Infers a paragraph vector for `tokens`, updating only that vector.
    pub fn infer(&self, tokens: &[String], steps: usize, lr_start: f32, seed: u64) -> Result<Vec<f32>> {
        let words = self.vocab.encode(tokens);
        if words.is_empty() {
            return Err(Error::NotInferable);
        }
        let dim = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vector = uniform_init(&mut rng, dim, dim);
        if steps == 0 {
            return Ok(vector);
        }
        let noise = noise_distribution(&self.vocab)?;
        let word_in = Frozen(&self.word_in);
        let word_out = Frozen(&self.word_out);
        let cells = Cell::from_mut(&mut vector[..]).as_slice_of_cells();
        let kernel = Kernel {
            dim,
            window: self.window,
            negative: self.negative,
            vocab_size: self.vocab.len(),
            noise: &noise,
            word_in: &word_in,
            word_out: &word_out,
            docs: cells,
        };
        let schedule = TrainConfig {
            lr_start,
            lr_end: TrainConfig::default().lr_end.min(lr_start),
            ..TrainConfig::default()
        };
        let total = steps * words.len();
        let mut scratch = Scratch::new(dim, self.vocab.len(), self.negative == 0);
        for pass in 0..steps {
            for pos in 0..words.len() {
                let lr = learning_rate(&schedule, pass * words.len() + pos, total);
                kernel.step(0, &words, pos, lr, &mut rng, &mut scratch, &mut None);
            }
        }
        Ok(vector)
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        let header = format!(
            "doc2vec dim={} V={} D={} window={} negative={} seed={}\n",
            self.dim,
            self.vocab.len(),
            self.n_docs(),
            self.window,
            self.negative,
            self.seed
        );
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(self.vocab.to_tsv().as_bytes());
        for block in [&self.word_in, &self.word_out, &self.doc_vecs] {
            for x in block.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        for (row, id) in self.doc_ids.iter().enumerate() {
            out.extend_from_slice(format!("{id}\t{row}\n").as_bytes());
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Model(format!("doc2vec model: {m}"));
        let mut reader = std::io::Cursor::new(bytes);
        let mut line = String::new();
        reader.read_line(&mut line).map_err(|_| bad("unreadable header"))?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some("doc2vec") {
            return Err(bad("missing magic"));
        }
        let mut header = HashMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| bad("malformed header"))?;
            header.insert(k.to_owned(), v.parse::<u64>().map_err(|_| bad("malformed header value"))?);
        }
        let get = |k: &str| header.get(k).copied().ok_or_else(|| bad(&format!("header lacks {k}")));
        let dim = get("dim")? as usize;
        let v = get("V")? as usize;
        let d = get("D")? as usize;
        let window = get("window")? as usize;
        let negative = get("negative")? as usize;
        let seed = get("seed")?;

        let mut vocab_text = String::new();
        for _ in 0..v {
            let before = vocab_text.len();
            reader.read_line(&mut vocab_text).map_err(|_| bad("truncated vocabulary"))?;
            if vocab_text.len() == before {
                return Err(bad("truncated vocabulary"));
            }
        }
        let vocab = Vocabulary::from_tsv(&vocab_text, 1)?;
        let mut read_block = |len: usize| -> Result<Vec<f32>> {
            let mut buf = vec![0u8; len * 4];
            reader.read_exact(&mut buf).map_err(|_| bad("truncated matrix block"))?;
            Ok(buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect())
        };
        let word_in = read_block(v * dim)?;
        let word_out = read_block(v * dim)?;
        let doc_vecs = read_block(d * dim)?;

        let mut doc_ids = vec![String::new(); d];
        let mut doc_rows = HashMap::with_capacity(d);
        for line in reader.lines() {
            let line = line.map_err(|_| bad("unreadable id table"))?;
            let (id, row) = line.split_once('\t').ok_or_else(|| bad("malformed id row"))?;
            let row: usize = row.parse().map_err(|_| bad("malformed id row"))?;
            if row >= d || doc_rows.insert(id.to_owned(), row).is_some() {
                return Err(bad("id table is not a bijection"));
            }
            doc_ids[row] = id.to_owned();
        }
        if doc_rows.len() != d {
            return Err(bad("id table is not a bijection"));
        }
        Ok(Doc2VecModel {
            dim,
            window,
            negative,
            seed,
            vocab: Arc::new(vocab),
            word_in,
            word_out,
            doc_vecs,
            doc_ids,
            doc_rows,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn infer_doc_vector(model: &Doc2VecModel, tokens: &[String], steps: usize, lr_start: f32, seed: u64) -> Result<Vec<f32>> {
    model.infer(tokens, steps, lr_start, seed)
}

pub fn doc_vector(model: &Doc2VecModel, doc_id: &str) -> Result<Vec<f32>> {
    model.doc_vector(doc_id)
}
