//! Seeded synthetic corpora used by the test suites, the benchmark harness
//! and the `synth` subcommand.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, TokenizedDocument};

/// Two clusters with disjoint vocabularies.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoClusterSpec {
    pub docs_per_cluster: usize,
    pub vocab_per_cluster: usize,
    pub tokens_per_doc: usize,
    pub seed: u64,
}

impl Default for TwoClusterSpec {
    fn default() -> Self {
        TwoClusterSpec {
            docs_per_cluster: 100,
            vocab_per_cluster: 50,
            tokens_per_doc: 80,
            seed: 7,
        }
    }
}

/// Returns the documents and their cluster label (0 or 1).
pub fn two_cluster_corpus(spec: &TwoClusterSpec) -> (Vec<TokenizedDocument>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for (label, prefix) in ["alpha", "beta"].into_iter().enumerate() {
        for d in 0..spec.docs_per_cluster {
            let tokens = (0..spec.tokens_per_doc)
                .map(|_| format!("{prefix}{:02}", rng.gen_range(0..spec.vocab_per_cluster)))
                .collect();
            docs.push(TokenizedDocument::new(format!("{prefix}-{d:03}"), tokens));
            labels.push(label);
        }
    }
    (docs, labels)
}

/// Job postings whose bodies are mostly employer boilerplate shared
/// verbatim across an employer's postings, plus a smaller category-specific
/// requirements section drawn from a wide per-category vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoilerplateSpec {
    pub n_docs: usize,
    pub n_categories: usize,
    pub n_employers: usize,
    pub tokens_per_doc: usize,
    /// Fraction of body tokens that are employer boilerplate.
    pub boilerplate_fraction: f64,
    pub category_vocab: usize,
    pub boilerplate_vocab: usize,
    pub seed: u64,
}

impl Default for BoilerplateSpec {
    fn default() -> Self {
        BoilerplateSpec {
            n_docs: 300,
            n_categories: 10,
            n_employers: 6,
            tokens_per_doc: 100,
            boilerplate_fraction: 0.7,
            category_vocab: 400,
            boilerplate_vocab: 400,
            seed: 1,
        }
    }
}

fn word(prefix: &str, i: usize) -> String {
    format!("{prefix}{i:03}")
}

/// Documents carry the category as `classification` and the
/// category-specific text as `requirements`.
pub fn boilerplate_corpus(spec: &BoilerplateSpec) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_boiler = (spec.tokens_per_doc as f64 * spec.boilerplate_fraction).round() as usize;
    let n_specific = spec.tokens_per_doc - n_boiler;

    let passages: Vec<Vec<String>> = (0..spec.n_employers)
        .map(|_| {
            (0..n_boiler)
                .map(|_| word("corp", rng.gen_range(0..spec.boilerplate_vocab)))
                .collect()
        })
        .collect();

    (0..spec.n_docs)
        .map(|d| {
            let category = d % spec.n_categories;
            let employer = rng.gen_range(0..spec.n_employers);
            let specific: Vec<String> = (0..n_specific)
                .map(|_| word(&format!("cat{category:02}x"), rng.gen_range(0..spec.category_vocab)))
                .collect();
            let requirements = specific.join(" ");
            let mut doc = Document::new(
                format!("job{d:04}"),
                format!("{} requirements: {requirements}", passages[employer].join(" ")),
            );
            doc.classification = Some(format!("category{category:02}"));
            doc.requirements = Some(requirements);
            doc
        })
        .collect()
}

/// Synthetic job board: postings, a warm/cold split and user ratings of
/// warm postings concentrated on each user's preferred categories.
#[derive(Debug, Clone, PartialEq)]
pub struct JobBoardSpec {
    pub n_docs: usize,
    pub n_categories: usize,
    pub n_employers: usize,
    pub cold_fraction: f64,
    pub n_users: usize,
    pub ratings_per_user: usize,
    pub seed: u64,
}

impl Default for JobBoardSpec {
    fn default() -> Self {
        JobBoardSpec {
            n_docs: 1000,
            n_categories: 20,
            n_employers: 25,
            cold_fraction: 0.1,
            n_users: 500,
            ratings_per_user: 20,
            seed: 1,
        }
    }
}

pub struct JobBoard {
    pub docs: Vec<Document>,
    pub ratings: Vec<(String, String, f64)>,
}

pub fn job_board(spec: &JobBoardSpec) -> JobBoard {
    let bp = BoilerplateSpec {
        n_docs: spec.n_docs,
        n_categories: spec.n_categories,
        n_employers: spec.n_employers,
        seed: spec.seed,
        ..BoilerplateSpec::default()
    };
    let mut docs = boilerplate_corpus(&bp);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
    for doc in &mut docs {
        doc.warm = rng.gen::<f64>() >= spec.cold_fraction;
        doc.title = format!("{} opening", doc.classification.as_deref().unwrap_or("job"));
    }
    let mut warm_by_category = vec![Vec::new(); spec.n_categories];
    for (d, doc) in docs.iter().enumerate() {
        if doc.warm {
            warm_by_category[d % spec.n_categories].push(doc.id.clone());
        }
    }
    let all_warm: Vec<String> = docs.iter().filter(|d| d.warm).map(|d| d.id.clone()).collect();
    let mut ratings = Vec::new();
    if all_warm.is_empty() {
        return JobBoard { docs, ratings };
    }
    for u in 0..spec.n_users {
        let user = format!("user{u:05}");
        let favourite = rng.gen_range(0..spec.n_categories);
        let mut rated = std::collections::HashSet::new();
        for _ in 0..spec.ratings_per_user {
            let pool = if rng.gen::<f64>() < 0.8 && !warm_by_category[favourite].is_empty() {
                &warm_by_category[favourite]
            } else {
                &all_warm
            };
            let item = pool.choose(&mut rng).expect("nonempty pool").clone();
            if rated.insert(item.clone()) {
                let rating = rng.gen_range(1..=5) as f64;
                ratings.push((user.clone(), item, rating));
            }
        }
    }
    JobBoard { docs, ratings }
}

/// Five warm postings with ratings and two cold postings that are light
/// rewrites of warm ones (`c1` of `w1`, `c2` of `w3`).
pub fn toy_fixture() -> JobBoard {
    let texts = [
        ("w1", true, "Senior Java developer building Spring microservices and REST APIs for payments"),
        ("w2", true, "Registered nurse for intensive care unit night shifts patient triage"),
        ("w3", true, "Commercial truck driver CDL class A long haul freight routes"),
        ("w4", true, "Certified public accountant tax audits ledgers quarterly reporting"),
        ("w5", true, "HVAC technician installs repairs heating cooling systems"),
        ("c1", false, "Java developer building Spring microservices and REST APIs for payments platform"),
        ("c2", false, "Truck driver CDL class A long haul freight routes regional"),
    ];
    let docs = texts
        .iter()
        .map(|(id, warm, body)| Document::new(*id, *body).warm(*warm))
        .collect();
    // w1 and w2 move together, as do w3 and w4. carol and dave each rated a
    // single item, so CF leads their lists with w1 and w3 respectively.
    let ratings = [
        ("alice", "w1", 5.0),
        ("alice", "w2", 5.0),
        ("alice", "w3", 1.0),
        ("alice", "w4", 1.0),
        ("bob", "w1", 4.0),
        ("bob", "w2", 4.0),
        ("bob", "w3", 2.0),
        ("bob", "w4", 2.0),
        ("erin", "w1", 1.0),
        ("erin", "w2", 2.0),
        ("erin", "w3", 5.0),
        ("erin", "w4", 4.0),
        ("erin", "w5", 3.0),
        ("frank", "w1", 2.0),
        ("frank", "w2", 1.0),
        ("frank", "w3", 4.0),
        ("frank", "w4", 5.0),
        ("frank", "w5", 4.0),
        ("carol", "w2", 5.0),
        ("dave", "w4", 5.0),
    ]
    .iter()
    .map(|(u, i, r)| (u.to_string(), i.to_string(), *r))
    .collect();
    JobBoard { docs, ratings }
}

/// Serializes rating triples as TSV with a header.
pub fn ratings_tsv(ratings: &[(String, String, f64)]) -> String {
    let mut out = String::from(crate::cf::RATINGS_HEADER);
    out.push('\n');
    for (u, i, r) in ratings {
        out.push_str(&format!("{u}\t{i}\t{r}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tokenizer;

    #[test]
    fn two_cluster_shape() {
        let (docs, labels) = two_cluster_corpus(&TwoClusterSpec::default());
        assert_eq!(docs.len(), 200);
        assert!(docs.iter().all(|d| d.tokens.len() == 80));
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 100);
    }

    #[test]
    fn boilerplate_proportions() {
        let docs = boilerplate_corpus(&BoilerplateSpec::default());
        assert_eq!(docs.len(), 300);
        let tok = Tokenizer::new(false);
        for d in &docs {
            let tokens = tok.tokenize(&d.body);
            let specific = tokens.iter().filter(|t| t.starts_with("cat")).count();
            let boiler = tokens.iter().filter(|t| t.starts_with("corp")).count();
            assert_eq!((boiler, specific), (70, 30));
        }
    }

    #[test]
    fn job_board_ratings_only_warm() {
        let board = job_board(&JobBoardSpec { n_docs: 200, n_users: 50, ..JobBoardSpec::default() });
        let warm: std::collections::HashSet<_> =
            board.docs.iter().filter(|d| d.warm).map(|d| d.id.as_str()).collect();
        assert!(board.ratings.iter().all(|(_, i, _)| warm.contains(i.as_str())));
        assert!(board.docs.iter().any(|d| !d.warm));
    }

    #[test]
    fn generators_are_seeded() {
        let a = boilerplate_corpus(&BoilerplateSpec::default());
        let b = boilerplate_corpus(&BoilerplateSpec::default());
        assert_eq!(a, b);
    }
}
