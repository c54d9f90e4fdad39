//! The `coldstart` command line: one subcommand per pipeline stage.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::cf::{build_item_neighborhoods, recommend, ItemNeighborhoods, RatingMatrix};
use crate::config::PipelineConfig;
use crate::corpus::{load_corpus, write_corpus, Document, TokenizedDocument, Vocabulary};
use crate::embedding::{BackendKind, Embedder};
use crate::enrichment::enrich_all;
use crate::error::{Error, Result};
use crate::eval::{run_benchmark, sample_queries, BackendSpec, BenchmarkConfig, GroundTruth, DEFAULT_KS};
use crate::io::{sha256_file, sha256_hex, write_atomic};
use crate::matcher::{pair_cold_items, PairingTable};
use crate::pairing::{augment_inverted, invert_pairs, AugmentedRecommendation, AUGMENTED_HEADER};
use crate::synth;

pub const MANIFEST: &str = "manifest.json";
pub const MODEL_DIR: &str = "model";
pub const PAIRS: &str = "pairs.tsv";
pub const NEIGHBORHOODS: &str = "neighborhoods.tsv";
pub const RECOMMENDATIONS: &str = "recommendations.tsv";

#[derive(Debug, Parser)]
#[command(name = "coldstart", version, about = "Cold-start item pairing on top of item-based collaborative filtering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus (and ratings, if configured) and print counts.
    IngestCheck(ConfigArgs),
    /// Fit the configured embedding backend on the warm and cold corpus.
    Train(ConfigArgs),
    /// Pair each cold item with its most similar warm items.
    Pair(ConfigArgs),
    /// Build item neighborhoods from the ratings.
    CfBuild(ConfigArgs),
    /// Recommend items for one user, with paired cold items inserted.
    Recommend(RecommendArgs),
    /// Precision and recall of each backend against a truth file.
    Eval(EvalArgs),
    /// train, pair, cf-build, then recommendations for every user.
    Pipeline(ConfigArgs),
    /// Write a seeded synthetic corpus, ratings and truth file.
    Synth(SynthArgs),
}

/// Every configuration key as a flag. Precedence: flag, then
/// `COLDSTART_<KEY>` environment variable, then `--config` file, then default.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat key=value configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// JSON-lines corpus.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<String>,
    /// Ratings TSV (user_id, item_id, rating).
    #[arg(long, value_name = "FILE")]
    pub ratings: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<String>,
    /// tfidf, lda or doc2vec.
    #[arg(long)]
    pub backend: Option<String>,
    /// Times each enrichment field is appended (0 disables enrichment).
    #[arg(long)]
    pub enrich_n: Option<String>,
    /// Comma-separated subset of title,classification,location,requirements,skills.
    #[arg(long)]
    pub enrich_fields: Option<String>,
    #[arg(long, value_name = "BOOL")]
    pub stopwords: Option<String>,
    #[arg(long)]
    pub min_count: Option<String>,
    #[arg(long)]
    pub dim: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub lr_start: Option<String>,
    #[arg(long)]
    pub lr_end: Option<String>,
    /// Noise words per position; 0 selects the exact softmax.
    #[arg(long)]
    pub negative: Option<String>,
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub infer_steps: Option<String>,
    #[arg(long)]
    pub lda_topics: Option<String>,
    #[arg(long)]
    pub lda_sweeps: Option<String>,
    #[arg(long)]
    pub lda_alpha: Option<String>,
    #[arg(long)]
    pub lda_beta: Option<String>,
    #[arg(long)]
    pub fold_in_sweeps: Option<String>,
    /// Warm partners kept per cold item.
    #[arg(long)]
    pub top_m: Option<String>,
    /// Minimum cosine for a pairing.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<String>,
    /// pearson or cosine.
    #[arg(long)]
    pub metric: Option<String>,
    /// Neighborhood size per item.
    #[arg(long)]
    pub neighbors: Option<String>,
    /// CF recommendations per user.
    #[arg(long)]
    pub n: Option<String>,
    /// Cap on the augmented list length.
    #[arg(long)]
    pub max_len: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

impl ConfigArgs {
    fn flags(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("corpus", &self.corpus),
            ("ratings", &self.ratings),
            ("out_dir", &self.out_dir),
            ("backend", &self.backend),
            ("enrich_n", &self.enrich_n),
            ("enrich_fields", &self.enrich_fields),
            ("stopwords", &self.stopwords),
            ("min_count", &self.min_count),
            ("dim", &self.dim),
            ("epochs", &self.epochs),
            ("lr_start", &self.lr_start),
            ("lr_end", &self.lr_end),
            ("negative", &self.negative),
            ("window", &self.window),
            ("infer_steps", &self.infer_steps),
            ("lda_topics", &self.lda_topics),
            ("lda_sweeps", &self.lda_sweeps),
            ("lda_alpha", &self.lda_alpha),
            ("lda_beta", &self.lda_beta),
            ("fold_in_sweeps", &self.fold_in_sweeps),
            ("top_m", &self.top_m),
            ("threshold", &self.threshold),
            ("metric", &self.metric),
            ("neighbors", &self.neighbors),
            ("n", &self.n),
            ("max_len", &self.max_len),
            ("workers", &self.workers),
            ("seed", &self.seed),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// Defaults, then file, then environment, then flags.
    pub fn resolve_with_env(&self, env: impl IntoIterator<Item = (String, String)>) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::default();
        if let Some(file) = &self.config {
            config.apply_file(file)?;
        }
        config.apply_env(env)?;
        for (key, value) in self.flags() {
            config.set(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn resolve(&self) -> Result<PipelineConfig> {
        self.resolve_with_env(std::env::vars())
    }
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub user: String,
    /// Pairing table; defaults to pairs.tsv in the output directory.
    #[arg(long, value_name = "FILE")]
    pub pairs: Option<PathBuf>,
    /// Skip augmentation and emit the plain CF list.
    #[arg(long, conflicts_with = "pairs")]
    pub no_pairs: bool,
    /// Also write the rows to this file.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Truth TSV (query_id, relevant_id).
    #[arg(long, value_name = "FILE", required_unless_present = "label_truth")]
    pub truth: Option<PathBuf>,
    /// Build truth from matching `classification` labels instead of a file.
    #[arg(long)]
    pub label_truth: bool,
    /// Number of sampled queries for --label-truth (0 uses every document).
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    /// Comma-separated backends, `+context` suffix for enriched text.
    #[arg(long, default_value = "tfidf,lda,doc2vec,tfidf+context,lda+context,doc2vec+context")]
    pub backends: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SynthKind {
    /// Postings, warm/cold flags and ratings.
    JobBoard,
    /// Boilerplate-heavy postings with a label truth file.
    Boilerplate,
    /// Five warm and two cold postings with a handful of ratings.
    Toy,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "job-board")]
    pub kind: SynthKind,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long)]
    pub docs: Option<usize>,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub backend: String,
    pub dim: Option<usize>,
    pub seed: u64,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub corpus_sha256: String,
    pub documents: usize,
    pub vocabulary: usize,
    /// Model file name to SHA-256.
    pub files: BTreeMap<String, String>,
    pub timings_seconds: BTreeMap<String, f64>,
}

impl Manifest {
    pub fn load(out_dir: &Path) -> Result<Manifest> {
        let path = out_dir.join(MANIFEST);
        let text = crate::io::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.line(), e.to_string()))
    }
}

fn vocab_size(embedder: &Embedder) -> usize {
    let vocab: &Vocabulary = match embedder {
        Embedder::TfIdf(m) => m.vocabulary(),
        Embedder::Lda(m, _) => m.vocabulary(),
        Embedder::Doc2Vec(m, _) => m.vocabulary(),
    };
    vocab.len()
}

fn prepare(config: &PipelineConfig, docs: &[Document]) -> Vec<TokenizedDocument> {
    let enriched = enrich_all(docs, &config.enrichment());
    config.tokenizer().tokenize_all(&enriched)
}

/// Fits the backend on every document and writes the model plus manifest.
pub fn cmd_train(config: &PipelineConfig) -> Result<Manifest> {
    let mut timings = BTreeMap::new();
    let corpus_path = config.corpus_path()?;
    let started = Instant::now();
    let docs = load_corpus(corpus_path)?;
    let tokenized = prepare(config, &docs);
    timings.insert("load".to_owned(), started.elapsed().as_secs_f64());

    let started = Instant::now();
    let embedder = Embedder::fit(config.backend, &tokenized, &config.fit_settings())?;
    timings.insert("fit".to_owned(), started.elapsed().as_secs_f64());

    let model_dir = config.out_dir.join(MODEL_DIR);
    let mut files = BTreeMap::new();
    for path in embedder.save_dir(&model_dir)? {
        let name = path.file_name().expect("model file name").to_string_lossy().into_owned();
        files.insert(name, sha256_file(&path)?);
    }
    let manifest = Manifest {
        backend: config.backend.to_string(),
        dim: (config.backend == BackendKind::Doc2Vec).then_some(config.dim),
        seed: config.seed,
        config_hash: config.hash(),
        config: config.to_map().into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        corpus_sha256: sha256_file(corpus_path)?,
        documents: docs.len(),
        vocabulary: vocab_size(&embedder),
        files,
        timings_seconds: timings,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Model(e.to_string()))?;
    write_atomic(config.out_dir.join(MANIFEST), json.as_bytes())?;
    info!("trained {} on {} documents", config.backend, docs.len());
    Ok(manifest)
}

pub fn cmd_pair(config: &PipelineConfig) -> Result<PairingTable> {
    let manifest = Manifest::load(&config.out_dir)?;
    let kind: BackendKind = manifest.backend.parse()?;
    if manifest.config_hash != config.hash() {
        warn!("configuration differs from the one used for training");
    }
    let embedder = Embedder::load_dir(kind, &config.out_dir.join(MODEL_DIR), config.inference())?;
    let docs = load_corpus(config.corpus_path()?)?;
    let tokenized = prepare(config, &docs);
    let (warm, cold): (Vec<_>, Vec<_>) = tokenized
        .into_iter()
        .zip(&docs)
        .partition(|(_, d)| d.warm);
    let warm: Vec<TokenizedDocument> = warm.into_iter().map(|(t, _)| t).collect();
    let cold: Vec<TokenizedDocument> = cold.into_iter().map(|(t, _)| t).collect();
    if warm.is_empty() {
        return Err(Error::NoWarmItems);
    }
    let table = if cold.is_empty() {
        warn!("corpus has no cold items; writing an empty pairing table");
        PairingTable::new()
    } else {
        pair_cold_items(&cold, &warm, &embedder, config.top_m, config.threshold)?
    };
    table.save(config.out_dir.join(PAIRS))?;
    Ok(table)
}

pub fn cmd_cf_build(config: &PipelineConfig) -> Result<ItemNeighborhoods> {
    let ratings = RatingMatrix::load(config.ratings_path()?)?;
    let nbrs = build_item_neighborhoods(&ratings, config.metric, config.neighbors)?;
    nbrs.save(config.out_dir.join(NEIGHBORHOODS))?;
    Ok(nbrs)
}

/// CF list for `user`, augmented from `pairs` when given. The CF list is
/// cut to `max_len` first so the cap bounds the whole output.
pub fn cmd_recommend(config: &PipelineConfig, user: &str, pairs: Option<&Path>) -> Result<AugmentedRecommendation> {
    let ratings = RatingMatrix::load(config.ratings_path()?)?;
    if !ratings.has_user(user) {
        return Err(Error::UnknownUser(user.to_owned()));
    }
    let nbrs = ItemNeighborhoods::load(config.out_dir.join(NEIGHBORHOODS))?;
    let inverted = match pairs {
        Some(p) => invert_pairs(&PairingTable::load(p)?),
        None => BTreeMap::new(),
    };
    let rec = recommend(&ratings, &nbrs, user, config.n.min(config.max_len))?;
    Ok(augment_inverted(&rec, &inverted, config.max_len))
}

/// Recommendations for every user in the ratings file.
pub fn recommend_all(config: &PipelineConfig, pairs: &PairingTable, nbrs: &ItemNeighborhoods) -> Result<Vec<AugmentedRecommendation>> {
    use rayon::prelude::*;
    let ratings = RatingMatrix::load(config.ratings_path()?)?;
    let inverted = invert_pairs(pairs);
    ratings
        .users()
        .par_iter()
        .map(|u| {
            let rec = recommend(&ratings, nbrs, u, config.n.min(config.max_len))?;
            Ok(augment_inverted(&rec, &inverted, config.max_len))
        })
        .collect()
}

fn recommendations_tsv(recs: &[AugmentedRecommendation]) -> String {
    let mut out = String::from(AUGMENTED_HEADER);
    out.push('\n');
    for rec in recs {
        out.push_str(&rec.tsv_rows());
    }
    out
}

pub fn cmd_pipeline(config: &PipelineConfig) -> Result<Vec<AugmentedRecommendation>> {
    let started = Instant::now();
    cmd_train(config)?;
    let pairs = cmd_pair(config)?;
    let nbrs = cmd_cf_build(config)?;
    let recs = recommend_all(config, &pairs, &nbrs)?;
    write_atomic(config.out_dir.join(RECOMMENDATIONS), recommendations_tsv(&recs).as_bytes())?;
    info!("pipeline finished in {:.1}s", started.elapsed().as_secs_f64());
    Ok(recs)
}

/// Report files written by `eval`.
pub const REPORT_TXT: &str = "report.txt";
pub const REPORT_TSV: &str = "report.tsv";
pub const RUNTIME_TSV: &str = "runtime.tsv";

pub fn cmd_eval(config: &PipelineConfig, args: &EvalArgs) -> Result<String> {
    let backends = args
        .backends
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<BackendSpec>>>()?;
    if backends.is_empty() {
        return Err(Error::InvalidParameter("no backends selected".into()));
    }
    let docs = load_corpus(config.corpus_path()?)?;
    let truth = match &args.truth {
        Some(path) => GroundTruth::load(path)?,
        None => {
            let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
            let queries = if args.queries == 0 {
                ids.clone()
            } else {
                sample_queries(&ids, args.queries, config.seed)
            };
            let queries: Vec<&str> = queries.iter().map(String::as_str).collect();
            let labels = docs
                .iter()
                .map(|d| (d.id.as_str(), d.classification.as_deref().unwrap_or("")));
            GroundTruth::from_labels(&queries, labels)?
        }
    };
    let bench = BenchmarkConfig {
        ks: DEFAULT_KS.to_vec(),
        tokenizer: config.tokenizer(),
        enrichment: config.enrichment(),
        fit: config.fit_settings(),
    };
    let outcome = run_benchmark(&docs, &truth, &backends, &bench)?;
    let text = outcome.report.to_text();
    write_atomic(config.out_dir.join(REPORT_TXT), text.as_bytes())?;
    write_atomic(config.out_dir.join(REPORT_TSV), outcome.report.to_tsv().as_bytes())?;
    write_atomic(config.out_dir.join(RUNTIME_TSV), outcome.report.runtime_tsv().as_bytes())?;
    Ok(text)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<String> {
    let mut summary = String::new();
    let corpus = args.out.join("corpus.jsonl");
    match args.kind {
        SynthKind::Boilerplate => {
            let mut spec = synth::BoilerplateSpec {
                seed: args.seed,
                ..Default::default()
            };
            if let Some(n) = args.docs {
                spec.n_docs = n;
            }
            let docs = synth::boilerplate_corpus(&spec);
            let ids: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
            let labels = docs.iter().map(|d| (d.id.as_str(), d.classification.as_deref().unwrap_or("")));
            let truth = GroundTruth::from_labels(&ids, labels)?;
            write_corpus(&corpus, &docs)?;
            write_atomic(args.out.join("truth.tsv"), truth.to_tsv().as_bytes())?;
            let _ = write!(summary, "documents {}", docs.len());
        }
        SynthKind::JobBoard | SynthKind::Toy => {
            let board = if let SynthKind::Toy = args.kind {
                synth::toy_fixture()
            } else {
                let mut spec = synth::JobBoardSpec {
                    seed: args.seed,
                    ..Default::default()
                };
                if let Some(n) = args.docs {
                    spec.n_docs = n;
                }
                if let Some(n) = args.users {
                    spec.n_users = n;
                }
                synth::job_board(&spec)
            };
            write_corpus(&corpus, &board.docs)?;
            write_atomic(args.out.join("ratings.tsv"), synth::ratings_tsv(&board.ratings).as_bytes())?;
            let cold = board.docs.iter().filter(|d| !d.warm).count();
            let _ = write!(
                summary,
                "documents {} cold {} ratings {}",
                board.docs.len(),
                cold,
                board.ratings.len()
            );
        }
    }
    Ok(summary)
}

fn ingest_check(config: &PipelineConfig) -> Result<String> {
    let docs = load_corpus(config.corpus_path()?)?;
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let warm = docs.iter().filter(|d| d.warm).count();
    let tokenized = prepare(config, &docs);
    let empty = tokenized.iter().filter(|d| d.tokens.is_empty()).count();
    if empty > 0 {
        warn!("{empty} documents have no tokens after tokenization");
    }
    let min_count = config.min_count.unwrap_or_else(|| config.backend.default_min_count());
    let vocab = Vocabulary::build(&tokenized, min_count)?;
    let mut out = format!(
        "documents {} warm {} cold {} vocabulary {}",
        docs.len(),
        warm,
        docs.len() - warm,
        vocab.len()
    );
    if let Some(path) = &config.ratings {
        let ratings = RatingMatrix::load(path)?;
        let known: std::collections::HashMap<&str, bool> = docs.iter().map(|d| (d.id.as_str(), d.warm)).collect();
        let missing = ratings.items().iter().filter(|i| !known.contains_key(i.as_str())).count();
        let cold_rated = ratings.items().iter().filter(|i| known.get(i.as_str()) == Some(&false)).count();
        if missing > 0 {
            warn!("{missing} rated items are not in the corpus");
        }
        if cold_rated > 0 {
            warn!("{cold_rated} rated items are flagged cold");
        }
        let _ = write!(
            out,
            " users {} rated_items {} ratings {}",
            ratings.n_users(),
            ratings.n_items(),
            ratings.n_ratings()
        );
    }
    Ok(out)
}

fn init_pool(config: &PipelineConfig) {
    // Fails harmlessly when a pool already exists (tests, repeated calls).
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build_global();
}

/// Runs one parsed command, printing its output on stdout.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::IngestCheck(args) => {
            let config = args.resolve()?;
            println!("{}", ingest_check(&config)?);
        }
        Command::Train(args) => {
            let config = args.resolve()?;
            init_pool(&config);
            let m = cmd_train(&config)?;
            println!(
                "trained {} documents {} vocabulary {} config {}",
                m.backend,
                m.documents,
                m.vocabulary,
                &m.config_hash[..12]
            );
        }
        Command::Pair(args) => {
            let config = args.resolve()?;
            init_pool(&config);
            let table = cmd_pair(&config)?;
            println!(
                "paired {} unpaired {} rows {}",
                table.paired_count(),
                table.unpaired_count(),
                table.pair_rows()
            );
        }
        Command::CfBuild(args) => {
            let config = args.resolve()?;
            init_pool(&config);
            let nbrs = cmd_cf_build(&config)?;
            println!("items {}", nbrs.len());
        }
        Command::Recommend(args) => {
            let config = args.config.resolve()?;
            let pairs = if args.no_pairs {
                None
            } else {
                let path = args.pairs.clone().unwrap_or_else(|| config.out_dir.join(PAIRS));
                if path.exists() {
                    Some(path)
                } else {
                    warn!("no pairing table at {}; cold items are not inserted", path.display());
                    None
                }
            };
            let rec = cmd_recommend(&config, &args.user, pairs.as_deref())?;
            let text = format!("{AUGMENTED_HEADER}\n{}", rec.tsv_rows());
            if let Some(out) = &args.output {
                write_atomic(out, text.as_bytes())?;
            }
            print!("{text}");
        }
        Command::Eval(args) => {
            let config = args.config.resolve()?;
            init_pool(&config);
            print!("{}", cmd_eval(&config, &args)?);
        }
        Command::Pipeline(args) => {
            let config = args.resolve()?;
            init_pool(&config);
            let recs = cmd_pipeline(&config)?;
            let rows: usize = recs.iter().map(|r| r.items.len()).sum();
            println!("users {} rows {}", recs.len(), rows);
        }
        Command::Synth(args) => {
            println!("{}", cmd_synth(&args)?);
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 success, 1 usage, 2 data, 3 internal.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Hash of a file's bytes, or of nothing when it is absent.
pub fn checksum(path: &Path) -> String {
    sha256_file(path).unwrap_or_else(|_| sha256_hex(b""))
}
