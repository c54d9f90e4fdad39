//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coldstart::cf::{build_item_neighborhoods, recommend, Metric, RatingMatrix};
use coldstart::corpus::{write_corpus, TokenizedDocument, Tokenizer, Vocabulary};
use coldstart::doc2vec::{negative_sampling_grad, negative_sampling_loss, train_doc2vec_with, Doc2VecModel, TrainConfig};
use coldstart::embedding::BackendKind;
use coldstart::enrichment::{EnrichmentConfig, Field};
use coldstart::eval::{run_benchmark, BackendSpec, BenchmarkConfig, GroundTruth};
use coldstart::io::sha256_hex;
use coldstart::lda::{LdaConfig, LdaSampler};
use coldstart::matcher::{cosine_dense, PairingTable};
use coldstart::pairing::{augment, invert_pairs, Provenance};
use coldstart::synth;
use coldstart::tfidf::TfIdfModel;

const TFIDF_TOL: f64 = 1e-9;
const CF_TOL: f64 = 1e-9;
const GRAD_REL_TOL: f64 = 1e-4;
const SOFTMAX_TOL: f64 = 1e-9;
const PERPLEXITY_TRANSIENT: f64 = 0.02;

/// Settings for the boilerplate comparison: small corpus, so doc2vec gets
/// more passes than the single production epoch.
const BOILERPLATE_EPOCHS: usize = 30;
const BOILERPLATE_MIN_COUNT: usize = 2;
const BOILERPLATE_SEEDS: [u64; 3] = [1, 2, 3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(budget: Duration, started: Instant, mut o: Outcome) -> Outcome {
    let took = started.elapsed();
    if took > budget {
        o.pass = false;
        o.detail.push_str(&format!("; over budget {:.1}s > {:.0}s", took.as_secs_f64(), budget.as_secs_f64()));
    } else {
        o.detail.push_str(&format!("; {:.1}s", took.as_secs_f64()));
    }
    o
}

fn c1_tfidf_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n_docs = rng.gen_range(1..=12);
        let words: Vec<String> = (0..rng.gen_range(1..=15)).map(|i| format!("w{i}")).collect();
        let docs: Vec<TokenizedDocument> = (0..n_docs)
            .map(|d| {
                let len = rng.gen_range(1..=20);
                let tokens = (0..len).map(|_| words.choose(&mut rng).unwrap().clone()).collect();
                TokenizedDocument::new(format!("d{d}"), tokens)
            })
            .collect();
        let vocab = Arc::new(Vocabulary::build(&docs, 1).unwrap());
        let model = TfIdfModel::fit(&docs, vocab.clone()).unwrap();
        for doc in &docs {
            let got = model.transform(&doc.tokens);
            for term in vocab.tokens() {
                let tf = doc.tokens.iter().filter(|t| *t == term).count() as f64;
                let df = docs.iter().filter(|d| d.tokens.contains(term)).count() as f64;
                let expected = tf * (n_docs as f64 / (1.0 + df)).ln();
                let actual = got.get(vocab.index_of(term).unwrap());
                worst = worst.max((expected - actual).abs());
            }
        }
    }
    within(
        Duration::from_secs(5),
        started,
        outcome(worst <= TFIDF_TOL, format!("50 corpora, max abs error {worst:.2e} (tol {TFIDF_TOL:.0e})")),
    )
}

/// Dense oracle matrix: `r[u][i]`, `None` when unrated.
struct DenseRatings {
    items: Vec<String>,
    users: Vec<String>,
    r: Vec<Vec<Option<f64>>>,
}

impl DenseRatings {
    fn column(&self, i: usize) -> Vec<Option<f64>> {
        self.r.iter().map(|row| row[i]).collect()
    }

    fn mean(&self, i: usize) -> f64 {
        let vals: Vec<f64> = self.column(i).into_iter().flatten().collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    fn pearson(&self, i: usize, j: usize) -> Option<f64> {
        let (mi, mj) = (self.mean(i), self.mean(j));
        let pairs: Vec<(f64, f64)> = self
            .column(i)
            .into_iter()
            .zip(self.column(j))
            .filter_map(|(a, b)| Some((a? - mi, b? - mj)))
            .collect();
        let num: f64 = pairs.iter().map(|(a, b)| a * b).sum();
        let da: f64 = pairs.iter().map(|(a, _)| a * a).sum::<f64>().sqrt();
        let db: f64 = pairs.iter().map(|(_, b)| b * b).sum::<f64>().sqrt();
        if pairs.len() < 2 || da == 0.0 || db == 0.0 {
            None
        } else {
            Some(num / (da * db))
        }
    }

    fn cosine(&self, i: usize, j: usize) -> f64 {
        let a: Vec<f64> = self.column(i).into_iter().map(|x| x.unwrap_or(0.0)).collect();
        let b: Vec<f64> = self.column(j).into_iter().map(|x| x.unwrap_or(0.0)).collect();
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    fn neighborhood(&self, i: usize, metric: Metric, k: usize) -> Vec<(usize, f64)> {
        let mut scored: Vec<(usize, f64)> = (0..self.items.len())
            .filter(|&j| j != i)
            .filter_map(|j| match metric {
                Metric::Pearson => self.pearson(i, j).map(|s| (j, s)),
                Metric::Cosine => Some((j, self.cosine(i, j))),
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.items[a.0].cmp(&self.items[b.0])));
        scored.truncate(k);
        scored
    }

    fn recommend(&self, u: usize, metric: Metric, k: usize, n: usize) -> Vec<(String, f64)> {
        let mut scores: HashMap<usize, f64> = HashMap::new();
        for i in 0..self.items.len() {
            let Some(r) = self.r[u][i] else { continue };
            for (j, s) in self.neighborhood(i, metric, k) {
                if self.r[u][j].is_none() {
                    *scores.entry(j).or_insert(0.0) += s * r;
                }
            }
        }
        let mut out: Vec<(String, f64)> = scores.into_iter().map(|(j, s)| (self.items[j].clone(), s)).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out.truncate(n);
        out
    }
}

fn random_ratings(rng: &mut ChaCha8Rng) -> DenseRatings {
    let n_users = rng.gen_range(2..=30);
    let n_items = rng.gen_range(2..=30);
    let density = rng.gen_range(0.15..0.8);
    let users: Vec<String> = (0..n_users).map(|u| format!("u{u:02}")).collect();
    let items: Vec<String> = (0..n_items).map(|i| format!("i{i:02}")).collect();
    let mut r: Vec<Vec<Option<f64>>> = (0..n_users)
        .map(|_| {
            (0..n_items)
                .map(|_| (rng.gen::<f64>() < density).then(|| rng.gen_range(1..=5) as f64))
                .collect()
        })
        .collect();
    // Every user and item needs at least one rating to exist in the matrix.
    for u in 0..n_users {
        let i = rng.gen_range(0..n_items);
        r[u][i].get_or_insert(3.0);
    }
    for i in 0..n_items {
        if r.iter().all(|row| row[i].is_none()) {
            let u = rng.gen_range(0..n_users);
            r[u][i] = Some(rng.gen_range(1..=5) as f64);
        }
    }
    DenseRatings { items, users, r }
}

fn lists_agree(got: &[(String, f64)], want: &[(String, f64)]) -> bool {
    got.len() == want.len()
        && got.iter().zip(want).all(|((gi, gs), (wi, ws))| {
            // Ids may swap only where scores tie within tolerance.
            (gs - ws).abs() <= CF_TOL && (gi == wi || want.iter().any(|(i, s)| i == gi && (s - gs).abs() <= CF_TOL))
        })
}

fn c2_cf_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut mismatches = 0;
    for _ in 0..50 {
        let dense = random_ratings(&mut rng);
        let mut triples = Vec::new();
        for (u, row) in dense.r.iter().enumerate() {
            for (i, r) in row.iter().enumerate() {
                if let Some(r) = r {
                    triples.push((dense.users[u].as_str(), dense.items[i].as_str(), *r));
                }
            }
        }
        let m = RatingMatrix::from_triples(triples).unwrap();
        for i in 0..dense.items.len() {
            for j in 0..dense.items.len() {
                let (a, b) = (&dense.items[i], &dense.items[j]);
                match (m.pearson_item(a, b).unwrap(), dense.pearson(i, j)) {
                    (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
                    (None, None) => {}
                    _ => mismatches += 1,
                }
                worst = worst.max((m.cosine_item(a, b).unwrap() - dense.cosine(i, j)).abs());
            }
        }
        let k = rng.gen_range(1..=10);
        let n = rng.gen_range(1..=10);
        for metric in [Metric::Pearson, Metric::Cosine] {
            let nbrs = build_item_neighborhoods(&m, metric, k).unwrap();
            for (u, user) in dense.users.iter().enumerate() {
                let got = recommend(&m, &nbrs, user, n).unwrap().items;
                let want = dense.recommend(u, metric, k, n);
                if !lists_agree(&got, &want) {
                    mismatches += 1;
                }
            }
        }
    }
    within(
        Duration::from_secs(10),
        started,
        outcome(
            worst <= CF_TOL && mismatches == 0,
            format!("50 matrices, max abs error {worst:.2e}, {mismatches} structural mismatches"),
        ),
    )
}

fn c3_gradient_check() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let h = 1e-6;
    let mut worst = 0.0f64;
    let instances = 200;
    for _ in 0..instances {
        let dim = rng.gen_range(1..=16);
        let vocab = rng.gen_range(2..=12);
        let context: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let word_out: Vec<f64> = (0..vocab * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let target = rng.gen_range(0..vocab);
        let negatives: Vec<usize> = (0..rng.gen_range(1..=5))
            .map(|_| loop {
                let w = rng.gen_range(0..vocab);
                if w != target {
                    break w;
                }
            })
            .collect();
        let g = negative_sampling_grad(&context, target, &negatives, &word_out);
        let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-7);
        for d in 0..dim {
            let (mut plus, mut minus) = (context.clone(), context.clone());
            plus[d] += h;
            minus[d] -= h;
            let fd = (negative_sampling_loss(&plus, target, &negatives, &word_out)
                - negative_sampling_loss(&minus, target, &negatives, &word_out))
                / (2.0 * h);
            worst = worst.max(rel(g.d_context[d], fd));
        }
        for p in 0..word_out.len() {
            let (mut plus, mut minus) = (word_out.clone(), word_out.clone());
            plus[p] += h;
            minus[p] -= h;
            let fd = (negative_sampling_loss(&context, target, &negatives, &plus)
                - negative_sampling_loss(&context, target, &negatives, &minus))
                / (2.0 * h);
            worst = worst.max(rel(g.d_word_out[p], fd));
        }
    }
    within(
        Duration::from_secs(10),
        started,
        outcome(
            worst <= GRAD_REL_TOL,
            format!("{instances} instances, max relative error {worst:.2e} (tol {GRAD_REL_TOL:.0e})"),
        ),
    )
}

fn c4_softmax_normalization() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let words: Vec<String> = (0..30).map(|i| format!("v{i:02}")).collect();
    let mut docs: Vec<TokenizedDocument> = (0..20)
        .map(|d| {
            let tokens = (0..40).map(|_| words.choose(&mut rng).unwrap().clone()).collect();
            TokenizedDocument::new(format!("d{d}"), tokens)
        })
        .collect();
    // Make sure every one of the 30 words occurs.
    docs.push(TokenizedDocument::new("all", words.clone()));
    let vocab = Arc::new(Vocabulary::build(&docs, 1).unwrap());
    let config = TrainConfig {
        dim: 16,
        epochs: 2,
        negative: 0,
        window: 3,
        seed: 4,
        ..TrainConfig::default()
    };
    let mut steps = 0usize;
    let mut worst = 0.0f64;
    let mut probe = |s: &coldstart::doc2vec::SoftmaxStep| {
        steps += 1;
        worst = worst.max((s.probabilities.iter().sum::<f64>() - 1.0).abs());
    };
    let result = train_doc2vec_with(&docs, &config, vocab.clone(), Some(&mut probe));
    let ok = result.is_ok() && vocab.len() == 30 && steps >= 1000 && worst <= SOFTMAX_TOL;
    within(
        Duration::from_secs(30),
        started,
        outcome(
            ok,
            format!("V={}, {steps} steps, max |sum-1| {worst:.2e} (tol {SOFTMAX_TOL:.0e})", vocab.len()),
        ),
    )
}

fn two_cluster_model() -> (Doc2VecModel, Vec<f64>, Vec<TokenizedDocument>, Vec<usize>) {
    let (docs, labels) = synth::two_cluster_corpus(&synth::TwoClusterSpec::default());
    let vocab = Arc::new(Vocabulary::build(&docs, 1).unwrap());
    let config = TrainConfig {
        epochs: 5,
        seed: 5,
        workers: 1,
        ..TrainConfig::default()
    };
    let (model, report) = train_doc2vec_with(&docs, &config, vocab, None).unwrap();
    (model, report.epoch_loss, docs, labels)
}

fn c5_learning_signal() -> (Outcome, String) {
    let started = Instant::now();
    let (model, loss, docs, labels) = two_cluster_model();
    let vecs: Vec<Vec<f64>> = docs
        .iter()
        .map(|d| model.doc_vector(&d.id).unwrap().iter().map(|&x| x as f64).collect())
        .collect();
    let (mut within_sum, mut within_n, mut cross_sum, mut cross_n) = (0.0, 0usize, 0.0, 0usize);
    for a in 0..vecs.len() {
        for b in a + 1..vecs.len() {
            let c = cosine_dense(&vecs[a], &vecs[b]).unwrap();
            if labels[a] == labels[b] {
                within_sum += c;
                within_n += 1;
            } else {
                cross_sum += c;
                cross_n += 1;
            }
        }
    }
    let (w, x) = (within_sum / within_n as f64, cross_sum / cross_n as f64);
    let (first, last) = (loss[0], *loss.last().unwrap());
    let checksum = sha256_hex(&model.to_bytes());
    let o = within(
        Duration::from_secs(60),
        started,
        outcome(
            w > x && last < first,
            format!("within {w:.3} vs cross {x:.3}; loss {first:.4} -> {last:.4}"),
        ),
    );
    (o, checksum)
}

fn boilerplate_benchmark(seed: u64) -> coldstart::eval::MetricsReport {
    let docs = synth::boilerplate_corpus(&synth::BoilerplateSpec {
        seed,
        ..Default::default()
    });
    let ids: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
    let labels = docs.iter().map(|d| (d.id.as_str(), d.classification.as_deref().unwrap()));
    let truth = GroundTruth::from_labels(&ids, labels).unwrap();
    let mut config = BenchmarkConfig {
        enrichment: EnrichmentConfig::new(3, &[Field::Requirements]),
        ..Default::default()
    };
    config.fit.min_count = Some(BOILERPLATE_MIN_COUNT);
    config.fit.doc2vec.epochs = BOILERPLATE_EPOCHS;
    config.fit.doc2vec.seed = seed;
    config.fit.inference.seed = seed;
    let backends = [
        BackendSpec::plain(BackendKind::Doc2Vec),
        BackendSpec::enriched(BackendKind::TfIdf),
        BackendSpec::enriched(BackendKind::Lda),
        BackendSpec::enriched(BackendKind::Doc2Vec),
    ];
    run_benchmark(&docs, &truth, &backends, &config).unwrap().report
}

fn p10(report: &coldstart::eval::MetricsReport, b: BackendSpec) -> f64 {
    report.row(b).unwrap().precision_at_10
}

fn c6_c7_boilerplate() -> (Outcome, Outcome, Vec<String>) {
    let started = Instant::now();
    let mut enrich_wins = 0;
    let mut order_wins = 0;
    let mut c6_detail = Vec::new();
    let mut c7_detail = Vec::new();
    let mut report_sums = Vec::new();
    for seed in BOILERPLATE_SEEDS {
        let report = boilerplate_benchmark(seed);
        report_sums.push(sha256_hex(report.to_tsv().as_bytes()));
        let plain = p10(&report, BackendSpec::plain(BackendKind::Doc2Vec));
        let d2v = p10(&report, BackendSpec::enriched(BackendKind::Doc2Vec));
        let tfidf = p10(&report, BackendSpec::enriched(BackendKind::TfIdf));
        let lda = p10(&report, BackendSpec::enriched(BackendKind::Lda));
        if d2v >= plain {
            enrich_wins += 1;
        }
        if d2v >= tfidf && tfidf >= lda {
            order_wins += 1;
        }
        c6_detail.push(format!("seed {seed}: {:.1}% -> {:.1}%", plain * 100.0, d2v * 100.0));
        c7_detail.push(format!(
            "seed {seed}: doc2vec {:.1}% tfidf {:.1}% lda {:.1}%",
            d2v * 100.0,
            tfidf * 100.0,
            lda * 100.0
        ));
    }
    let c6 = within(
        Duration::from_secs(120),
        started,
        outcome(enrich_wins >= 2, format!("doc2vec P@10 plain -> enriched, {}", c6_detail.join(", "))),
    );
    let c7 = outcome(
        order_wins >= 2,
        format!("{order_wins}/3 seeds ordered; {}", c7_detail.join(", ")),
    );
    (c6, c7, report_sums)
}

fn c8_lda_invariants() -> Outcome {
    let started = Instant::now();
    let docs = synth::boilerplate_corpus(&synth::BoilerplateSpec::default());
    let tokenized = Tokenizer::default().tokenize_all(&docs);
    let vocab = Arc::new(Vocabulary::build(&tokenized, 1).unwrap());
    let mut sampler = LdaSampler::new(&tokenized, vocab, LdaConfig::new(10, 50, 8)).unwrap();
    let total: u64 = tokenized.iter().map(|d| d.tokens.len() as u64).sum();
    let mut conserved = true;
    let mut perplexity = vec![sampler.perplexity()];
    for _ in 0..50 {
        sampler.sweep();
        let per_doc = (0..sampler.n_docs()).all(|d| {
            sampler.doc_topic_counts(d).iter().map(|&c| c as usize).sum::<usize>() == sampler.doc_len(d)
        });
        let totals = sampler.topic_totals().iter().sum::<u64>() == total;
        conserved &= per_doc && totals && sampler.counts_consistent();
        perplexity.push(sampler.perplexity());
    }
    let worst_rise = perplexity
        .windows(2)
        .map(|w| w[1] / w[0] - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let decreased = perplexity.last().unwrap() < &perplexity[0];
    within(
        Duration::from_secs(60),
        started,
        outcome(
            conserved && worst_rise <= PERPLEXITY_TRANSIENT && decreased,
            format!(
                "counts conserved: {conserved}; perplexity {:.1} -> {:.1}, worst step rise {:+.2}%",
                perplexity[0],
                perplexity.last().unwrap(),
                worst_rise * 100.0
            ),
        ),
    )
}

fn c9_pairing_properties() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let n_warm = rng.gen_range(1..=15);
        let n_cold = rng.gen_range(0..=10);
        let warm: Vec<String> = (0..n_warm).map(|i| format!("w{i}")).collect();
        let mut table = PairingTable::new();
        for c in 0..n_cold {
            let m = rng.gen_range(0..=3).min(n_warm);
            let partners = warm
                .choose_multiple(&mut rng, m)
                .map(|w| (w.clone(), (rng.gen_range(0..20) as f64) / 20.0))
                .collect();
            table.insert(format!("c{c}"), partners);
        }
        let len = rng.gen_range(0..=n_warm);
        let items: Vec<(String, f64)> = warm.choose_multiple(&mut rng, len).map(|w| (w.clone(), 1.0)).collect();
        let rec = coldstart::cf::Recommendation {
            user: "u".into(),
            items,
        };
        let out = augment(&rec, &table, usize::MAX);

        let cf: Vec<&str> = out
            .items
            .iter()
            .filter(|(_, p)| *p == Provenance::Cf)
            .map(|(i, _)| i.as_str())
            .collect();
        let conservation = cf == rec.ids();

        let soundness = out.items.iter().enumerate().all(|(pos, (item, p))| {
            *p == Provenance::Cf
                || table
                    .get(item)
                    .unwrap_or(&[])
                    .iter()
                    .any(|(w, _)| out.items[..pos].iter().any(|(x, _)| x == w))
        });

        let recommended: BTreeSet<&str> = rec.ids().into_iter().collect();
        let expected: BTreeSet<&str> = table
            .iter()
            .filter(|(_, ps)| ps.iter().any(|(w, _)| recommended.contains(w.as_str())))
            .map(|(c, _)| c.as_str())
            .collect();
        let mut paired_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, p) in &out.items {
            if *p == Provenance::Paired {
                *paired_counts.entry(i.as_str()).or_default() += 1;
            }
        }
        let completeness =
            paired_counts.keys().copied().collect::<BTreeSet<_>>() == expected && paired_counts.values().all(|&c| c == 1);

        let idempotence = out.augment_again(&invert_pairs(&table), usize::MAX) == out;

        if !(conservation && soundness && completeness && idempotence) {
            failures.push(case);
        }
    }
    within(
        Duration::from_secs(5),
        started,
        outcome(failures.is_empty(), format!("1000 instances, {} violations", failures.len())),
    )
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_coldstart")
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(bin()).args(args).output().expect("spawn coldstart");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn rows(tsv: &str) -> Vec<(String, String)> {
    tsv.lines()
        .skip(1)
        .filter_map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (c.len() == 4).then(|| (c[2].to_owned(), c[3].to_owned()))
        })
        .collect()
}

fn c10_toy() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let board = synth::toy_fixture();
    let corpus = d.join("corpus.jsonl");
    let ratings = d.join("ratings.tsv");
    write_corpus(&corpus, &board.docs).unwrap();
    std::fs::write(&ratings, synth::ratings_tsv(&board.ratings)).unwrap();
    let out = d.join("out");
    let common = [
        "--corpus",
        corpus.to_str().unwrap(),
        "--ratings",
        ratings.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--backend",
        "tfidf",
    ];
    let (code, _) = run_cli(&[&["pipeline"], &common[..]].concat());
    if code != 0 {
        return outcome(false, format!("pipeline exit code {code}"));
    }
    let partner = [("c1", "w1"), ("c2", "w3")];
    let mut problems = Vec::new();
    let mut seen_paired = BTreeSet::new();
    for user in ["carol", "dave"] {
        let (code, text) = run_cli(&[&["recommend", "--user", user], &common[..]].concat());
        let r = rows(&text);
        if code != 0 {
            problems.push(format!("{user}: exit {code}"));
        }
        for (pos, (item, prov)) in r.iter().enumerate() {
            if let Some((_, warm)) = partner.iter().find(|(c, _)| c == item) {
                let ok = prov == "paired" && pos > 0 && r[pos - 1].0 == *warm;
                if !ok {
                    problems.push(format!("{user}: {item} not right after {warm}"));
                }
                seen_paired.insert(item.clone());
            }
        }
        if r.first().map(|(i, p)| (i.as_str(), p.as_str())) == Some(("w1", "cf")) && r.get(1).map(|x| x.0.as_str()) != Some("c1") {
            problems.push(format!("{user}: c1 missing after w1"));
        }
    }
    if seen_paired.len() != 2 {
        problems.push(format!("paired items seen: {seen_paired:?}"));
    }
    std::fs::remove_file(out.join("pairs.tsv")).unwrap();
    for user in ["carol", "dave"] {
        let (code, text) = run_cli(&[&["recommend", "--user", user], &common[..]].concat());
        if code != 0 || rows(&text).iter().any(|(i, p)| i.starts_with('c') || p == "paired") {
            problems.push(format!("{user}: cold items present without pairing file"));
        }
    }
    within(
        Duration::from_secs(30),
        started,
        outcome(
            problems.is_empty(),
            if problems.is_empty() {
                "c1 after w1 and c2 after w3, both tagged paired; absent when the pairing file is withheld".to_owned()
            } else {
                problems.join("; ")
            },
        ),
    )
}

fn train_checksum(corpus: &Path, out: &Path, backend: &str) -> Option<String> {
    let (code, _) = run_cli(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--backend",
        backend,
        "--workers",
        "1",
        "--epochs",
        "3",
        "--lda-sweeps",
        "20",
    ]);
    if code != 0 {
        return None;
    }
    let names: &[&str] = match backend {
        "lda" => &["lda.txt", "lda.vocab.tsv"],
        "tfidf" => &["tfidf.tsv"],
        _ => &["doc2vec.bin"],
    };
    let mut all = String::new();
    for n in names {
        all.push_str(&coldstart::io::sha256_file(out.join("model").join(n)).ok()?);
    }
    Some(all)
}

fn eval_checksum(corpus: &Path, truth: &Path, out: &Path) -> Option<String> {
    let (code, _) = run_cli(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--backends",
        "tfidf,lda+context,doc2vec+context",
        "--workers",
        "1",
        "--epochs",
        "3",
        "--lda-sweeps",
        "20",
        "--enrich-fields",
        "requirements",
    ]);
    if code != 0 {
        return None;
    }
    let txt = coldstart::io::sha256_file(out.join("report.txt")).ok()?;
    let tsv = coldstart::io::sha256_file(out.join("report.tsv")).ok()?;
    Some(txt + &tsv)
}

fn c11_determinism(c5_sum: &str, c67_sums: &[String]) -> Outcome {
    let started = Instant::now();
    let mut problems = Vec::new();

    let (again, ..) = two_cluster_model();
    if sha256_hex(&again.to_bytes()) != c5_sum {
        problems.push("two-cluster doc2vec model differs".to_owned());
    }
    let rerun = sha256_hex(boilerplate_benchmark(BOILERPLATE_SEEDS[0]).to_tsv().as_bytes());
    if rerun != c67_sums[0] {
        problems.push("boilerplate report differs".to_owned());
    }

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let docs = synth::boilerplate_corpus(&synth::BoilerplateSpec::default());
    let corpus = d.join("corpus.jsonl");
    write_corpus(&corpus, &docs).unwrap();
    let ids: Vec<&str> = docs.iter().map(|x| x.id.as_str()).take(50).collect();
    let labels = docs.iter().map(|x| (x.id.as_str(), x.classification.as_deref().unwrap()));
    let truth = d.join("truth.tsv");
    std::fs::write(&truth, GroundTruth::from_labels(&ids, labels).unwrap().to_tsv()).unwrap();
    for backend in ["doc2vec", "lda", "tfidf"] {
        let a = train_checksum(&corpus, &d.join(format!("{backend}-a")), backend);
        let b = train_checksum(&corpus, &d.join(format!("{backend}-b")), backend);
        if a.is_none() || a != b {
            problems.push(format!("{backend} model files differ"));
        }
    }
    let a = eval_checksum(&corpus, &truth, &d.join("eval-a"));
    let b = eval_checksum(&corpus, &truth, &d.join("eval-b"));
    if a.is_none() || a != b {
        problems.push("eval reports differ".to_owned());
    }
    let took = started.elapsed().as_secs_f64();
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("model and report checksums equal across runs; {took:.1}s")
        } else {
            problems.join("; ")
        },
    )
}

fn c12_scale() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, _) = run_cli(&[
        "synth",
        "--kind",
        "job-board",
        "--docs",
        "10000",
        "--users",
        "2000",
        "--out",
        d.to_str().unwrap(),
    ]);
    if code != 0 {
        return outcome(false, "synth failed");
    }
    let started = Instant::now();
    let out = d.join("out");
    let (code, summary) = run_cli(&[
        "pipeline",
        "--corpus",
        d.join("corpus.jsonl").to_str().unwrap(),
        "--ratings",
        d.join("ratings.tsv").to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--workers",
        "8",
    ]);
    let o = outcome(code == 0 && out.join("recommendations.tsv").exists(), format!("10000 docs, {}", summary.trim()));
    within(Duration::from_secs(300), started, o)
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "tf-idf oracle", c1_tfidf_oracle()));
    results.push((2, "CF oracle", c2_cf_oracle()));
    results.push((3, "negative-sampling gradient", c3_gradient_check()));
    results.push((4, "exact softmax normalization", c4_softmax_normalization()));
    let (c5, c5_sum) = c5_learning_signal();
    results.push((5, "doc2vec learning signal", c5));
    let (c6, c7, sums) = c6_c7_boilerplate();
    results.push((6, "enrichment gain on boilerplate corpus", c6));
    results.push((7, "backend ordering on boilerplate corpus", c7));
    results.push((8, "LDA invariants", c8_lda_invariants()));
    results.push((9, "pairing-layer properties", c9_pairing_properties()));
    results.push((10, "end-to-end cold item insertion", c10_toy()));
    results.push((11, "determinism", c11_determinism(&c5_sum, &sums)));
    results.push((12, "scale budget", c12_scale()));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag} {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
