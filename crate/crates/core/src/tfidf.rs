//! Sparse tf-idf vectors: raw term count times `ln(N / (1 + df))`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::corpus::{TokenizedDocument, Vocabulary};
use crate::error::{Error, Result};

/// Sorted `(index, weight)` pairs with strictly increasing indices and no
/// stored zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Builds from unsorted pairs; duplicate indices are summed and zeros
    /// dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut acc = BTreeMap::new();
        for (i, w) in pairs {
            *acc.entry(i).or_insert(0.0) += w;
        }
        SparseVector {
            entries: acc.into_iter().filter(|&(_, w)| w != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct TfIdfModel {
    n_docs: usize,
    df: Vec<usize>,
    vocab: Arc<Vocabulary>,
}

impl TfIdfModel {
    pub fn fit(docs: &[TokenizedDocument], vocab: Arc<Vocabulary>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df = vec![0usize; vocab.len()];
        let mut seen = vec![usize::MAX; vocab.len()];
        for (d, doc) in docs.iter().enumerate() {
            for idx in vocab.encode(&doc.tokens) {
                if seen[idx] != d {
                    seen[idx] = d;
                    df[idx] += 1;
                }
            }
        }
        Ok(TfIdfModel {
            n_docs: docs.len(),
            df,
            vocab,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn df(&self, token: &str) -> Option<usize> {
        self.vocab.index_of(token).map(|i| self.df[i])
    }

    fn idf_at(&self, index: usize) -> f64 {
        idf(self.n_docs, self.df[index])
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.vocab.index_of(token).map(|i| self.idf_at(i))
    }

    /// Unnormalized tf-idf; out-of-vocabulary tokens are ignored.
    pub fn transform(&self, tokens: &[String]) -> SparseVector {
        let mut counts = BTreeMap::<usize, f64>::new();
        for idx in self.vocab.encode(tokens) {
            *counts.entry(idx).or_insert(0.0) += 1.0;
        }
        SparseVector::from_pairs(counts.into_iter().map(|(i, tf)| (i, tf * self.idf_at(i))))
    }

    /// Header line `N=<int>`, then `token\tdf` rows in vocabulary order.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("N={}\n", self.n_docs);
        for (token, df) in self.vocab.tokens().iter().zip(&self.df) {
            out.push_str(&format!("{token}\t{df}\n"));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let n_docs = lines
            .next()
            .and_then(|h| h.strip_prefix("N="))
            .and_then(|n| n.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Model("tf-idf header must be N=<int>".into()))?;
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let (token, df) = line
                .split_once('\t')
                .ok_or_else(|| Error::Model(format!("tf-idf row {}: expected token\\tdf", i + 2)))?;
            let df: usize = df
                .parse()
                .map_err(|_| Error::Model(format!("tf-idf row {}: bad df", i + 2)))?;
            if df > n_docs {
                return Err(Error::Model(format!("tf-idf row {}: df exceeds N", i + 2)));
            }
            rows.push((token.to_owned(), df));
        }
        // Rows are stored in index order; df stands in for the token count.
        let vocab = Vocabulary::from_ordered(
            rows.iter().map(|(t, df)| (t.clone(), *df as u64)).collect(),
            1,
        );
        let df = rows.into_iter().map(|(_, df)| df).collect();
        Ok(TfIdfModel {
            n_docs,
            df,
            vocab: Arc::new(vocab),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_tsv().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_tsv(&crate::io::read_to_string(path)?)
    }
}

pub fn idf(n_docs: usize, df: usize) -> f64 {
    (n_docs as f64 / (1.0 + df as f64)).ln()
}

pub fn fit_tfidf(docs: &[TokenizedDocument], vocab: Arc<Vocabulary>) -> Result<TfIdfModel> {
    TfIdfModel::fit(docs, vocab)
}

pub fn transform_tfidf(model: &TfIdfModel, doc: &TokenizedDocument) -> SparseVector {
    model.transform(&doc.tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;

    fn toy() -> (Vec<TokenizedDocument>, TfIdfModel) {
        let docs = vec![
            TokenizedDocument::from_strs("d1", &["a", "b"]),
            TokenizedDocument::from_strs("d2", &["b", "c"]),
            TokenizedDocument::from_strs("d3", &["b"]),
        ];
        let vocab = Arc::new(build_vocabulary(&docs, 1).unwrap());
        let model = fit_tfidf(&docs, vocab).unwrap();
        (docs, model)
    }

    // ln(N / (1 + df)) evaluated by hand for the toy corpus.
    const IDF_B: f64 = -0.287_682_072_451_780_9; // ln(3/4)
    const IDF_A: f64 = 0.405_465_108_108_164_4; // ln(3/2)

    #[test]
    fn document_frequencies() {
        let (_, m) = toy();
        assert_eq!(m.n_docs(), 3);
        assert_eq!(m.df("a"), Some(1));
        assert_eq!(m.df("b"), Some(3));
        assert_eq!(m.df("c"), Some(1));
    }

    #[test]
    fn single_document() {
        let docs = [TokenizedDocument::from_strs("d", &["a"])];
        let m = fit_tfidf(&docs, Arc::new(build_vocabulary(&docs, 1).unwrap())).unwrap();
        assert_eq!((m.n_docs(), m.df("a")), (1, Some(1)));
    }

    #[test]
    fn idf_values() {
        let (_, m) = toy();
        assert!((m.idf("b").unwrap() - IDF_B).abs() < 1e-12);
        assert!((m.idf("a").unwrap() - IDF_A).abs() < 1e-12);
    }

    #[test]
    fn transform_examples() {
        let (_, m) = toy();
        let v = m.transform(&["a".into(), "a".into()]);
        assert_eq!(v.len(), 1);
        let a = m.vocabulary().index_of("a").unwrap();
        assert!((v.get(a) - 2.0 * IDF_A).abs() < 1e-12);
        assert!((v.get(a) - 0.8109).abs() < 1e-4);

        let b = m.vocabulary().index_of("b").unwrap();
        let v = m.transform(&["b".into()]);
        assert!((v.get(b) - IDF_B).abs() < 1e-12);

        assert!(m.transform(&["zzz".into()]).is_empty());
    }

    #[test]
    fn empty_corpus_rejected() {
        let (_, m) = toy();
        assert!(matches!(
            fit_tfidf(&[], m.vocabulary().clone()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn tsv_roundtrip_preserves_weights() {
        let (docs, m) = toy();
        let back = TfIdfModel::from_tsv(&m.to_tsv()).unwrap();
        assert_eq!(back.to_tsv(), m.to_tsv());
        for d in &docs {
            assert_eq!(back.transform(&d.tokens), m.transform(&d.tokens));
        }
    }

    #[test]
    fn sparse_vector_ops() {
        let u = SparseVector::from_pairs([(3, 1.0), (1, 2.0), (3, 1.0), (5, 0.0)]);
        assert_eq!(u.entries(), &[(1, 2.0), (3, 2.0)]);
        let v = SparseVector::from_pairs([(3, 4.0), (7, 1.0)]);
        assert_eq!(u.dot(&v), 8.0);
        assert!((u.norm() - 8f64.sqrt()).abs() < 1e-12);
    }
}
