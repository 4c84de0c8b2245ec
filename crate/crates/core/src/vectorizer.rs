//! Sparse TF-IDF vector spaces with cosine similarity.
//!
//! Documents are numbered `0..n` by the caller. Weights use raw term counts
//! and the smoothed inverse document frequency
//!
//! ```text
//! idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1
//! ```
//!
//! after which every document vector is L2-normalised, so cosine similarity
//! is a plain dot product. Empty documents keep an all-zero vector.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("document {0} is not part of the fitted space")]
pub struct UnknownDocument(pub usize);

/// Multiset of terms describing one document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermCorpus<T: Ord>(BTreeMap<T, u32>);

impl<T: Ord> TermCorpus<T> {
    pub fn new() -> Self {
        TermCorpus(BTreeMap::new())
    }

    pub fn add(&mut self, term: T, count: u32) {
        if count > 0 {
            *self.0.entry(term).or_insert(0) += count;
        }
    }

    pub fn count(&self, term: &T) -> u32 {
        self.0.get(term).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct terms with their counts, ascending by term.
    pub fn iter(&self) -> impl Iterator<Item = (&T, u32)> {
        self.0.iter().map(|(t, &c)| (t, c))
    }
}

impl<T: Ord> FromIterator<T> for TermCorpus<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut c = TermCorpus::new();
        for t in iter {
            c.add(t, 1);
        }
        c
    }
}

/// Lowercases, splits on every non-alphanumeric run and drops tokens shorter
/// than two characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .filter(|s| s.chars().count() >= 2)
}

/// A fitted TF-IDF space. Immutable once built.
#[derive(Debug, Clone)]
pub struct Vectorizer<T> {
    vocabulary: Vec<T>,
    columns: HashMap<T, u32>,
    df: Vec<u32>,
    idf: Vec<f64>,
    // Row-major weights: document -> (column, weight), columns ascending.
    row_offsets: Vec<usize>,
    row_cols: Vec<u32>,
    row_weights: Vec<f64>,
    // Column-major postings: column -> (document, weight), documents ascending.
    col_offsets: Vec<usize>,
    col_docs: Vec<u32>,
    col_weights: Vec<f64>,
}

impl<T: Ord + Hash + Clone> Vectorizer<T> {
    /// Fits the space. The vocabulary is ordered by term.
    pub fn fit(documents: &[TermCorpus<T>]) -> Self {
        let n_docs = documents.len();
        let mut vocabulary: Vec<T> = documents.iter().flat_map(|d| d.0.keys().cloned()).collect();
        vocabulary.sort();
        vocabulary.dedup();
        let columns: HashMap<T, u32> = vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();

        let mut df = vec![0u32; vocabulary.len()];
        for d in documents {
            for t in d.0.keys() {
                df[columns[t] as usize] += 1;
            }
        }
        let idf: Vec<f64> = df.iter().map(|&f| smoothed_idf(n_docs, f)).collect();

        let mut row_offsets = Vec::with_capacity(n_docs + 1);
        let mut row_cols = Vec::new();
        let mut row_weights = Vec::new();
        row_offsets.push(0);
        for d in documents {
            let start = row_cols.len();
            // BTreeMap iteration is in term order, which is column order.
            for (t, &count) in &d.0 {
                let col = columns[t];
                row_cols.push(col);
                row_weights.push(count as f64 * idf[col as usize]);
            }
            normalize(&mut row_weights[start..]);
            row_offsets.push(row_cols.len());
        }

        let mut col_offsets = vec![0usize; vocabulary.len() + 1];
        for &c in &row_cols {
            col_offsets[c as usize + 1] += 1;
        }
        for i in 0..vocabulary.len() {
            col_offsets[i + 1] += col_offsets[i];
        }
        let mut cursor = col_offsets.clone();
        let mut col_docs = vec![0u32; row_cols.len()];
        let mut col_weights = vec![0f64; row_cols.len()];
        for doc in 0..n_docs {
            for k in row_offsets[doc]..row_offsets[doc + 1] {
                let c = row_cols[k] as usize;
                col_docs[cursor[c]] = doc as u32;
                col_weights[cursor[c]] = row_weights[k];
                cursor[c] += 1;
            }
        }

        Vectorizer {
            vocabulary,
            columns,
            df,
            idf,
            row_offsets,
            row_cols,
            row_weights,
            col_offsets,
            col_docs,
            col_weights,
        }
    }

    pub fn n_docs(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn vocabulary(&self) -> &[T] {
        &self.vocabulary
    }

    pub fn document_frequency(&self, term: &T) -> u32 {
        self.columns.get(term).map(|&c| self.df[c as usize]).unwrap_or(0)
    }

    pub fn idf(&self, term: &T) -> Option<f64> {
        self.columns.get(term).map(|&c| self.idf[c as usize])
    }

    /// Normalised weights of one document, ascending by term.
    pub fn weights(&self, doc: usize) -> Result<impl Iterator<Item = (&T, f64)>, UnknownDocument> {
        let (cols, weights) = self.row(doc)?;
        Ok(cols.iter().zip(weights).map(|(&c, &w)| (&self.vocabulary[c as usize], w)))
    }

    fn row(&self, doc: usize) -> Result<(&[u32], &[f64]), UnknownDocument> {
        if doc >= self.n_docs() {
            return Err(UnknownDocument(doc));
        }
        let r = self.row_offsets[doc]..self.row_offsets[doc + 1];
        Ok((&self.row_cols[r.clone()], &self.row_weights[r]))
    }

    /// Cosine similarity of two documents.
    pub fn similarity(&self, a: usize, b: usize) -> Result<f64, UnknownDocument> {
        let (ca, wa) = self.row(a)?;
        let (cb, wb) = self.row(b)?;
        let (mut i, mut j) = (0, 0);
        let mut dot = 0.0;
        while i < ca.len() && j < cb.len() {
            match ca[i].cmp(&cb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += wa[i] * wb[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(dot.min(1.0))
    }

    /// Similarity of `doc` to every document, indexed by document.
    ///
    /// Accumulates over postings in ascending column order, which sums the
    /// same products in the same order as [`Vectorizer::similarity`], so both
    /// routes agree bit for bit.
    pub fn similarities_to(&self, doc: usize) -> Result<Vec<f64>, UnknownDocument> {
        let (cols, weights) = self.row(doc)?;
        Ok(self.accumulate(cols.iter().copied().zip(weights.iter().copied())))
    }

    /// Scores an ad-hoc term multiset against every document. Terms outside
    /// the vocabulary are ignored.
    pub fn query_similarity(&self, query: &TermCorpus<T>) -> Vec<f64> {
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        for (t, count) in query.iter() {
            if let Some(&c) = self.columns.get(t) {
                cols.push(c);
                weights.push(count as f64 * self.idf[c as usize]);
            }
        }
        normalize(&mut weights);
        self.accumulate(cols.into_iter().zip(weights))
    }

    fn accumulate(&self, query: impl Iterator<Item = (u32, f64)>) -> Vec<f64> {
        let mut scores = vec![0.0; self.n_docs()];
        for (c, w) in query {
            let c = c as usize;
            for k in self.col_offsets[c]..self.col_offsets[c + 1] {
                scores[self.col_docs[k] as usize] += w * self.col_weights[k];
            }
        }
        for s in &mut scores {
            *s = s.min(1.0);
        }
        scores
    }
}

fn smoothed_idf(n_docs: usize, df: u32) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

fn normalize(weights: &mut [f64]) {
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for w in weights {
            *w /= norm;
        }
    }
}
