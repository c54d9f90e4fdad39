//! Item-based collaborative filtering over a sparse user×item rating matrix.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcher::{rank_order, top_sorted};

pub const RATINGS_HEADER: &str = "user_id\titem_id\trating";
pub const NEIGHBORHOOD_HEADER: &str = "item\tneighbor\tscore";

#[derive(Debug, Clone, Default)]
pub struct RatingMatrix {
    users: Vec<String>,
    items: Vec<String>,
    user_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    /// Per user, (item, rating) sorted by item index.
    by_user: Vec<Vec<(usize, f64)>>,
    /// Per item, (user, rating) sorted by user index.
    by_item: Vec<Vec<(usize, f64)>>,
    item_mean: Vec<f64>,
    item_norm: Vec<f64>,
}

fn intern(names: &mut Vec<String>, index: &mut HashMap<String, usize>, name: &str) -> usize {
    if let Some(&i) = index.get(name) {
        return i;
    }
    names.push(name.to_owned());
    index.insert(name.to_owned(), names.len() - 1);
    names.len() - 1
}

impl RatingMatrix {
    pub fn from_triples<'a>(triples: impl IntoIterator<Item = (&'a str, &'a str, f64)>) -> Result<Self> {
        let mut m = RatingMatrix::default();
        let mut seen = HashSet::new();
        for (user, item, rating) in triples {
            m.push(user, item, rating, &mut seen)?;
        }
        m.finish();
        Ok(m)
    }

    fn push(&mut self, user: &str, item: &str, rating: f64, seen: &mut HashSet<(usize, usize)>) -> Result<()> {
        let u = intern(&mut self.users, &mut self.user_index, user);
        let i = intern(&mut self.items, &mut self.item_index, item);
        if !seen.insert((u, i)) {
            return Err(Error::DuplicateRating {
                user: user.to_owned(),
                item: item.to_owned(),
            });
        }
        if self.by_user.len() <= u {
            self.by_user.resize_with(u + 1, Vec::new);
        }
        if self.by_item.len() <= i {
            self.by_item.resize_with(i + 1, Vec::new);
        }
        self.by_user[u].push((i, rating));
        self.by_item[i].push((u, rating));
        Ok(())
    }

    fn register_user(&mut self, user: &str) {
        let u = intern(&mut self.users, &mut self.user_index, user);
        if self.by_user.len() <= u {
            self.by_user.resize_with(u + 1, Vec::new);
        }
    }

    fn finish(&mut self) {
        for row in self.by_user.iter_mut().chain(self.by_item.iter_mut()) {
            row.sort_by_key(|&(k, _)| k);
        }
        self.item_mean = self
            .by_item
            .iter()
            .map(|col| col.iter().map(|&(_, r)| r).sum::<f64>() / col.len() as f64)
            .collect();
        self.item_norm = self
            .by_item
            .iter()
            .map(|col| col.iter().map(|&(_, r)| r * r).sum::<f64>().sqrt())
            .collect();
    }

    /// Parses `user_id\titem_id\trating` rows; an exact header line is
    /// allowed first. A row holding only a user id registers a user with no
    /// ratings.
    pub fn from_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut m = RatingMatrix::default();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || (i == 0 && line == RATINGS_HEADER) {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if let [user] = cols[..] {
                m.register_user(user.trim());
                continue;
            }
            let [user, item, rating] = cols[..] else {
                return Err(Error::parse(origin, i + 1, "expected user_id\\titem_id\\trating"));
            };
            if user.is_empty() || item.is_empty() {
                return Err(Error::parse(origin, i + 1, "empty user or item id"));
            }
            let rating: f64 = rating
                .trim()
                .parse()
                .ok()
                .filter(|r: &f64| r.is_finite())
                .ok_or_else(|| Error::parse(origin, i + 1, format!("non-numeric rating {rating:?}")))?;
            m.push(user, item, rating, &mut seen)?;
        }
        m.finish();
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_tsv(&crate::io::read_to_string(path)?, path)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(RATINGS_HEADER);
        out.push('\n');
        for (u, row) in self.by_user.iter().enumerate() {
            if row.is_empty() {
                let _ = writeln!(out, "{}", self.users[u]);
            }
            for &(i, r) in row {
                let _ = writeln!(out, "{}\t{}\t{}", self.users[u], self.items[i], r);
            }
        }
        out
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_ratings(&self) -> usize {
        self.by_user.iter().map(Vec::len).sum()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn has_item(&self, item: &str) -> bool {
        self.item_index.contains_key(item)
    }

    pub fn has_user(&self, user: &str) -> bool {
        self.user_index.contains_key(user)
    }

    fn item(&self, id: &str) -> Result<usize> {
        self.item_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownItem(id.to_owned()))
    }

    pub fn rating(&self, user: &str, item: &str) -> Option<f64> {
        let u = *self.user_index.get(user)?;
        let i = *self.item_index.get(item)?;
        let row = &self.by_user[u];
        row.binary_search_by_key(&i, |&(k, _)| k).ok().map(|p| row[p].1)
    }

    /// Ratings of one user as `(item id, rating)`.
    pub fn user_ratings(&self, user: &str) -> Result<Vec<(&str, f64)>> {
        let u = *self
            .user_index
            .get(user)
            .ok_or_else(|| Error::UnknownUser(user.to_owned()))?;
        Ok(self.by_user[u].iter().map(|&(i, r)| (self.items[i].as_str(), r)).collect())
    }

    pub fn item_mean(&self, item: &str) -> Result<f64> {
        Ok(self.item_mean[self.item(item)?])
    }

    fn pearson_idx(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = (&self.by_item[i], &self.by_item[j]);
        let (mi, mj) = (self.item_mean[i], self.item_mean[j]);
        let (mut p, mut q) = (0, 0);
        let (mut num, mut si, mut sj, mut n) = (0.0, 0.0, 0.0, 0usize);
        while p < a.len() && q < b.len() {
            match a[p].0.cmp(&b[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    let (x, y) = (a[p].1 - mi, b[q].1 - mj);
                    num += x * y;
                    si += x * x;
                    sj += y * y;
                    n += 1;
                    p += 1;
                    q += 1;
                }
            }
        }
        if n < 2 || si == 0.0 || sj == 0.0 {
            return None;
        }
        Some((num / (si.sqrt() * sj.sqrt())).clamp(-1.0, 1.0))
    }

    /// Pearson correlation over co-raters, centered on each item's mean over
    /// all of its raters. `None` when fewer than two co-raters or a centered
    /// co-rating vector vanishes.
    pub fn pearson_item(&self, i: &str, j: &str) -> Result<Option<f64>> {
        Ok(self.pearson_idx(self.item(i)?, self.item(j)?))
    }

    fn cosine_idx(&self, i: usize, j: usize) -> Option<f64> {
        let (ni, nj) = (self.item_norm[i], self.item_norm[j]);
        if ni == 0.0 || nj == 0.0 {
            return None;
        }
        let (a, b) = (&self.by_item[i], &self.by_item[j]);
        let (mut p, mut q, mut dot) = (0, 0, 0.0);
        while p < a.len() && q < b.len() {
            match a[p].0.cmp(&b[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    dot += a[p].1 * b[q].1;
                    p += 1;
                    q += 1;
                }
            }
        }
        Some((dot / (ni * nj)).clamp(-1.0, 1.0))
    }

    /// Cosine of the full rating columns, missing ratings counted as zero.
    pub fn cosine_item(&self, i: &str, j: &str) -> Result<f64> {
        self.cosine_idx(self.item(i)?, self.item(j)?).ok_or(Error::ZeroNorm)
    }
}

pub fn load_ratings(path: impl AsRef<Path>) -> Result<RatingMatrix> {
    RatingMatrix::load(path)
}

pub fn pearson_item(i: &str, j: &str, ratings: &RatingMatrix) -> Result<Option<f64>> {
    ratings.pearson_item(i, j)
}

pub fn cosine_item(i: &str, j: &str, ratings: &RatingMatrix) -> Result<f64> {
    ratings.cosine_item(i, j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Pearson,
    Cosine,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Pearson => "pearson",
            Metric::Cosine => "cosine",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pearson" => Ok(Metric::Pearson),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Top-K most similar other items per item.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ItemNeighborhoods {
    lists: BTreeMap<String, Vec<(String, f64)>>,
}

impl ItemNeighborhoods {
    pub fn get(&self, item: &str) -> &[(String, f64)] {
        self.lists.get(item).map_or(&[], Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<(String, f64)>)> {
        self.lists.iter()
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn insert(&mut self, item: impl Into<String>, mut neighbors: Vec<(String, f64)>) {
        neighbors.sort_by(rank_order);
        self.lists.insert(item.into(), neighbors);
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(NEIGHBORHOOD_HEADER);
        out.push('\n');
        for (item, list) in &self.lists {
            for (n, s) in list {
                let _ = writeln!(out, "{item}\t{n}\t{s}");
            }
        }
        out
    }

    pub fn from_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut lists: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || (i == 0 && line == NEIGHBORHOOD_HEADER) {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [item, nbr, score] = cols[..] else {
                return Err(Error::parse(origin, i + 1, "expected item\\tneighbor\\tscore"));
            };
            let score: f64 = score
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad score {score:?}")))?;
            lists.entry(item.to_owned()).or_default().push((nbr.to_owned(), score));
        }
        let mut out = ItemNeighborhoods::default();
        for (item, list) in lists {
            out.insert(item, list);
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_tsv().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_tsv(&crate::io::read_to_string(path)?, path)
    }
}

/// For every item, the `k` most similar other items. Undefined Pearson pairs
/// are not edges; cosine considers every other item (non-co-rated items
/// score zero).
pub fn build_item_neighborhoods(ratings: &RatingMatrix, metric: Metric, k: usize) -> Result<ItemNeighborhoods> {
    if k == 0 {
        return Err(Error::InvalidParameter("neighborhood size K must be >= 1".into()));
    }
    let n = ratings.n_items();
    // Items in ascending id order, for zero-score padding.
    let mut by_name: Vec<usize> = (0..n).collect();
    by_name.sort_by(|&a, &b| ratings.items[a].cmp(&ratings.items[b]));

    let lists: Vec<Vec<(String, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            // Candidates: every item sharing at least one rater with i.
            let mut co_rated: Vec<usize> = ratings.by_item[i]
                .iter()
                .flat_map(|&(u, _)| ratings.by_user[u].iter().map(|&(j, _)| j))
                .filter(|&j| j != i)
                .collect();
            co_rated.sort_unstable();
            co_rated.dedup();
            let mut scored: Vec<(String, f64)> = co_rated
                .iter()
                .filter_map(|&j| {
                    let s = match metric {
                        Metric::Pearson => ratings.pearson_idx(i, j),
                        Metric::Cosine => ratings.cosine_idx(i, j),
                    }?;
                    Some((ratings.items[j].clone(), s))
                })
                .collect();
            if metric == Metric::Cosine && ratings.item_norm[i] > 0.0 {
                let padding = by_name
                    .iter()
                    .filter(|&&j| j != i && ratings.item_norm[j] > 0.0)
                    .filter(|&&j| co_rated.binary_search(&j).is_err())
                    .take(k)
                    .map(|&j| (ratings.items[j].clone(), 0.0));
                scored.extend(padding);
            }
            top_sorted(scored, k)
        })
        .collect();

    let mut out = ItemNeighborhoods::default();
    for (i, list) in lists.into_iter().enumerate() {
        out.lists.insert(ratings.items[i].clone(), list);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub user: String,
    pub items: Vec<(String, f64)>,
}

impl Recommendation {
    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|(i, _)| i.as_str()).collect()
    }
}

/// Scores every unrated item reachable through a rated item's neighborhood
/// by `Σ sim(i, item) · r_ui` and returns the best `n`.
pub fn recommend(ratings: &RatingMatrix, nbrs: &ItemNeighborhoods, user: &str, n: usize) -> Result<Recommendation> {
    let rated = ratings.user_ratings(user)?;
    let rated_ids: HashSet<&str> = rated.iter().map(|&(i, _)| i).collect();
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for &(item, r) in &rated {
        for (nbr, sim) in nbrs.get(item) {
            if !rated_ids.contains(nbr.as_str()) {
                *scores.entry(nbr.as_str()).or_insert(0.0) += sim * r;
            }
        }
    }
    let scored = scores.into_iter().map(|(i, s)| (i.to_owned(), s)).collect();
    Ok(Recommendation {
        user: user.to_owned(),
        items: top_sorted(scored, n),
    })
}
