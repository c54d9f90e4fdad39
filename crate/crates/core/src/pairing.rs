//! Post-processing of CF recommendation lists: every cold item paired with a
//! recommended warm item is inserted right after that warm item.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::path::Path;

use crate::cf::Recommendation;
use crate::error::Result;
use crate::matcher::PairingTable;

pub const AUGMENTED_HEADER: &str = "user_id\trank\titem_id\tprovenance";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Cf,
    Paired,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Cf => "cf",
            Provenance::Paired => "paired",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedRecommendation {
    pub user: String,
    pub items: Vec<(String, Provenance)>,
}

impl AugmentedRecommendation {
    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|(i, _)| i.as_str()).collect()
    }

    /// Rows `user_id\trank\titem_id\tprovenance`, rank starting at 1.
    pub fn tsv_rows(&self) -> String {
        let mut out = String::new();
        for (rank, (item, prov)) in self.items.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}\t{item}\t{prov}", self.user, rank + 1);
        }
        out
    }

    /// Re-applies the same insertion rule to an already augmented list.
    pub fn augment_again(&self, inverted: &BTreeMap<String, Vec<String>>, max_len: usize) -> AugmentedRecommendation {
        augment_list(&self.user, &self.items, inverted, max_len)
    }
}

pub fn write_augmented(path: impl AsRef<Path>, recs: &[AugmentedRecommendation]) -> Result<()> {
    let mut out = String::from(AUGMENTED_HEADER);
    out.push('\n');
    for rec in recs {
        out.push_str(&rec.tsv_rows());
    }
    crate::io::write_atomic(path, out.as_bytes())
}

/// Warm id to the cold items paired with it, by descending score then
/// ascending cold id.
pub fn invert_pairs(pairs: &PairingTable) -> BTreeMap<String, Vec<String>> {
    let mut scored: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (cold, partners) in pairs.iter() {
        for (warm, score) in partners {
            scored.entry(warm.clone()).or_default().push((cold.clone(), *score));
        }
    }
    scored
        .into_iter()
        .map(|(warm, mut colds)| {
            colds.sort_by(crate::matcher::rank_order);
            (warm, colds.into_iter().map(|(c, _)| c).collect())
        })
        .collect()
}

fn augment_list(
    user: &str,
    items: &[(String, Provenance)],
    inverted: &BTreeMap<String, Vec<String>>,
    max_len: usize,
) -> AugmentedRecommendation {
    let mut present: HashSet<&str> = items.iter().map(|(i, _)| i.as_str()).collect();
    let mut out: Vec<(String, Provenance)> = Vec::with_capacity(items.len());
    for (pos, (item, prov)) in items.iter().enumerate() {
        out.push((item.clone(), *prov));
        let Some(colds) = inverted.get(item) else {
            continue;
        };
        // Room is reserved for every remaining source item.
        let remaining = items.len() - pos - 1;
        for cold in colds {
            if out.len() + remaining >= max_len {
                break;
            }
            if present.insert(cold.as_str()) {
                out.push((cold.clone(), Provenance::Paired));
            }
        }
    }
    AugmentedRecommendation {
        user: user.to_owned(),
        items: out,
    }
}

/// Inserts, after each recommended warm item, the cold items paired with it
/// that are not already in the list. Insertion stops once the list would
/// exceed `max_len` while still holding every CF item.
pub fn augment(rec: &Recommendation, pairs: &PairingTable, max_len: usize) -> AugmentedRecommendation {
    augment_inverted(rec, &invert_pairs(pairs), max_len)
}

/// [`augment`] with a precomputed [`invert_pairs`] lookup.
pub fn augment_inverted(rec: &Recommendation, inverted: &BTreeMap<String, Vec<String>>, max_len: usize) -> AugmentedRecommendation {
    let items: Vec<(String, Provenance)> = rec.items.iter().map(|(i, _)| (i.clone(), Provenance::Cf)).collect();
    augment_list(&rec.user, &items, inverted, max_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(ids: &[&str]) -> Recommendation {
        Recommendation {
            user: "u".into(),
            items: ids.iter().map(|i| (i.to_string(), 1.0)).collect(),
        }
    }

    fn table(rows: &[(&str, &[(&str, f64)])]) -> PairingTable {
        let mut t = PairingTable::new();
        for (cold, partners) in rows {
            t.insert(*cold, partners.iter().map(|(w, s)| (w.to_string(), *s)).collect());
        }
        t
    }

    #[test]
    fn empty_table_is_identity() {
        let out = augment(&rec(&["w1", "w2"]), &PairingTable::new(), 10);
        assert_eq!(out.ids(), ["w1", "w2"]);
        assert!(out.items.iter().all(|(_, p)| *p == Provenance::Cf));
    }

    #[test]
    fn inserted_after_partner() {
        let out = augment(&rec(&["w1", "w2"]), &table(&[("c1", &[("w1", 0.9)])]), 10);
        assert_eq!(out.ids(), ["w1", "c1", "w2"]);
        assert_eq!(out.items[1].1, Provenance::Paired);
    }

    #[test]
    fn first_matching_partner_only() {
        let t = table(&[("c1", &[("w1", 0.9), ("w2", 0.8)])]);
        assert_eq!(augment(&rec(&["w2", "w1"]), &t, 10).ids(), ["w2", "c1", "w1"]);
    }

    #[test]
    fn cap_keeps_cf_items() {
        let t = table(&[("c1", &[("w1", 0.9)])]);
        assert_eq!(augment(&rec(&["w1"]), &t, 1).ids(), ["w1"]);
        assert_eq!(augment(&rec(&["w1", "w2"]), &t, 2).ids(), ["w1", "w2"]);
        assert_eq!(augment(&rec(&["w1", "w2"]), &t, 3).ids(), ["w1", "c1", "w2"]);
    }

    #[test]
    fn insertion_order_follows_score() {
        let t = table(&[("c1", &[("w1", 0.6)]), ("c2", &[("w1", 0.9)]), ("c0", &[("w1", 0.6)])]);
        assert_eq!(augment(&rec(&["w1"]), &t, 10).ids(), ["w1", "c2", "c0", "c1"]);
    }

    #[test]
    fn invert_examples() {
        assert!(invert_pairs(&PairingTable::new()).is_empty());
        let inv = invert_pairs(&table(&[("c1", &[("w1", 0.9)]), ("c2", &[("w1", 0.7)])]));
        assert_eq!(inv.len(), 1);
        assert_eq!(inv["w1"], ["c1", "c2"]);
        assert!(invert_pairs(&table(&[("c1", &[])])).is_empty());
    }

    #[test]
    fn idempotent() {
        let t = table(&[("c1", &[("w1", 0.9)]), ("c2", &[("w2", 0.7)])]);
        let once = augment(&rec(&["w1", "w2"]), &t, 10);
        let twice = once.augment_again(&invert_pairs(&t), 10);
        assert_eq!(once, twice);
    }

    #[test]
    fn tsv_rows() {
        let out = augment(&rec(&["w1"]), &table(&[("c1", &[("w1", 0.9)])]), 5);
        assert_eq!(out.tsv_rows(), "u\t1\tw1\tcf\nu\t2\tc1\tpaired\n");
    }
}
