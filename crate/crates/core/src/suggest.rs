//! Trope scoring, ranking and sampling.
//!
//! Three fitted spaces back every score:
//!
//! * index space: each trope's own indexes plus those of its description
//!   tropes, counted with multiplicity;
//! * movie space: the movies a trope occurs in, one count each;
//! * text space: tokens of all of a trope's occurrence texts.
//!
//! Scores for a query are computed in four steps: a raw score per candidate
//! (index, co-occurrence or mixed, optionally multiplied by a text score), a
//! rank-based temperature multiplier, weighted sampling without replacement,
//! and movie evidence for each drawn trope.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, IndexIx, MovieIx, TropeIx};
use crate::vectorizer::{tokenize, TermCorpus, Vectorizer};

pub const DEFAULT_TEMPERATURE: f64 = 0.02;
pub const DEFAULT_COUNT: usize = 5;
pub const MAX_EVIDENCE: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum SuggestError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("a query needs at least one input trope or a non-empty text")]
    EmptyQuery,
    #[error("count must be at least 1")]
    InvalidCount,
    #[error("temperature must be positive, got {0}")]
    InvalidTemperature(f64),
    #[error("the filters leave no candidate tropes")]
    EmptyCandidateSet,
    #[error("every candidate scored zero")]
    AllZeroScores,
}

impl SuggestError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SuggestError::Corpus(CorpusError::NotFound { .. }) => "unknown_id",
            SuggestError::Corpus(_) => "corpus_error",
            SuggestError::EmptyQuery => "empty_query",
            SuggestError::InvalidCount => "invalid_count",
            SuggestError::InvalidTemperature(_) => "invalid_temperature",
            SuggestError::EmptyCandidateSet => "empty_candidate_set",
            SuggestError::AllZeroScores => "all_zero_scores",
        }
    }
}

/// Which trope-to-trope method drives the trope component of a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Breadth {
    /// Index similarity only.
    Index = 1,
    /// Product of index and co-occurrence scores.
    Mixed = 2,
    /// Co-occurrence only.
    Cooccurrence = 3,
}

impl TryFrom<u8> for Breadth {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Breadth::Index),
            2 => Ok(Breadth::Mixed),
            3 => Ok(Breadth::Cooccurrence),
            other => Err(format!("breadth must be 1, 2 or 3, got {other}")),
        }
    }
}

impl From<Breadth> for u8 {
    fn from(b: Breadth) -> u8 {
        b as u8
    }
}

fn default_breadth() -> Breadth {
    Breadth::Mixed
}

fn default_count() -> usize {
    DEFAULT_COUNT
}

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

/// A suggestion request, keyed by string ids.
///
/// `temperature == 0` selects the deterministic mode: the top `count`
/// candidates by raw score, no sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestionQuery {
    #[serde(default)]
    pub input_tropes: Vec<String>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default = "default_breadth")]
    pub breadth: Breadth,
    #[serde(default)]
    pub index_filters: Vec<String>,
    #[serde(default)]
    pub movie_filters: Vec<String>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub exclude: Vec<String>,
}

impl Default for SuggestionQuery {
    fn default() -> Self {
        SuggestionQuery {
            input_tropes: Vec::new(),
            text: None,
            breadth: default_breadth(),
            index_filters: Vec::new(),
            movie_filters: Vec::new(),
            count: DEFAULT_COUNT,
            temperature: DEFAULT_TEMPERATURE,
            seed: None,
            exclude: Vec::new(),
        }
    }
}

impl SuggestionQuery {
    pub fn for_tropes<S: Into<String>>(inputs: impl IntoIterator<Item = S>) -> Self {
        SuggestionQuery { input_tropes: inputs.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn for_text(text: impl Into<String>) -> Self {
        SuggestionQuery { text: Some(text.into()), ..Default::default() }
    }
}

/// A query with ids resolved to dense keys. Key lists are sorted and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedQuery {
    pub inputs: Vec<TropeIx>,
    pub text: Option<String>,
    pub breadth: Breadth,
    pub index_filters: Vec<IndexIx>,
    pub movie_filters: Vec<MovieIx>,
    pub exclude: Vec<TropeIx>,
    pub count: usize,
    pub temperature: f64,
    pub seed: u64,
}

/// A candidate's raw score, temperature-shaped score and 0-based rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedScore<K> {
    pub key: K,
    pub raw: f64,
    pub final_score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub movie: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrope {
    pub trope: String,
    pub name: String,
    pub laconic: String,
    pub raw_score: f64,
    pub final_score: f64,
    pub rank: usize,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionOutcome {
    /// The query as resolved: inputs sorted and deduplicated, seed filled in.
    pub query: SuggestionQuery,
    /// Number of scored candidates after filtering.
    pub candidates: usize,
    pub suggestions: Vec<ScoredTrope>,
}

/// Concatenation of a trope's indexes and the indexes of each of its
/// description tropes, counted with multiplicity.
pub fn expanded_index_corpus(corpus: &Corpus, trope: TropeIx) -> TermCorpus<IndexIx> {
    let t = corpus.trope(trope);
    let mut terms = TermCorpus::new();
    for &i in &t.indexes {
        terms.add(i, 1);
    }
    for &d in &t.description_tropes {
        for &i in &corpus.trope(d).indexes {
            terms.add(i, 1);
        }
    }
    terms
}

/// Multiplies each raw score by `((n - rank) / n)^(1 / theta)`, where `n` is
/// the number of candidates and `rank` the 0-based position in descending raw
/// order with ties broken by ascending key. Output is in rank order.
pub fn apply_temperature<K: Ord + Copy>(scores: &[(K, f64)], theta: f64) -> Result<Vec<RankedScore<K>>, SuggestError> {
    if !theta.is_finite() || theta <= 0.0 {
        return Err(SuggestError::InvalidTemperature(theta));
    }
    let exponent = 1.0 / theta;
    let ranked = rank_by_raw(scores);
    let n = ranked.len() as f64;
    Ok(ranked
        .into_iter()
        .enumerate()
        .map(|(rank, (key, raw))| {
            let multiplier = ((n - rank as f64) / n).powf(exponent);
            RankedScore { key, raw, final_score: multiplier * raw, rank }
        })
        .collect())
}

/// Scores closer than this relative distance to their neighbour in sorted
/// order are tied; exact ties of the underlying sums differ by a few ulps
/// depending on summation order.
pub const TIE_EPSILON: f64 = 1e-12;

fn rank_by_raw<K: Ord + Copy>(scores: &[(K, f64)]) -> Vec<(K, f64)> {
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut start = 0;
    for i in 1..=ranked.len() {
        let run_ends = i == ranked.len() || {
            let (prev, next) = (ranked[i - 1].1, ranked[i].1);
            prev - next > TIE_EPSILON * prev.abs().max(next.abs())
        };
        if run_ends {
            if i - start > 1 {
                ranked[start..i].sort_by_key(|r| r.0);
            }
            start = i;
        }
    }
    ranked
}

/// The zero-temperature limit: the `k` best positive raw scores in rank order.
/// The top candidate keeps its raw score as final score; the limit multiplier
/// of every other rank is zero.
pub fn top_k<K: Ord + Copy>(scores: &[(K, f64)], k: usize) -> Vec<RankedScore<K>> {
    rank_by_raw(scores)
        .into_iter()
        .enumerate()
        .filter(|(_, (_, raw))| *raw > 0.0)
        .take(k)
        .map(|(rank, (key, raw))| RankedScore { key, raw, final_score: if rank == 0 { raw } else { 0.0 }, rank })
        .collect()
}

/// The sampling generator: ChaCha8 seeded through `SeedableRng::seed_from_u64`.
pub fn sampler_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws up to `k` candidates without replacement, each draw proportional to
/// the remaining final scores. Zero-score candidates are never drawn.
///
/// Each draw takes one `f64` from the generator, scales it by the remaining
/// total and walks the remaining candidates in rank order.
pub fn sample_suggestions<K: Copy>(
    ranked: &[RankedScore<K>],
    k: usize,
    seed: u64,
) -> Result<Vec<RankedScore<K>>, SuggestError> {
    if k == 0 {
        return Err(SuggestError::InvalidCount);
    }
    let mut pool: Vec<RankedScore<K>> = ranked.iter().filter(|r| r.final_score > 0.0).copied().collect();
    if pool.is_empty() {
        return Err(SuggestError::AllZeroScores);
    }
    let mut rng = sampler_rng(seed);
    let mut drawn = Vec::with_capacity(k.min(pool.len()));
    while drawn.len() < k && !pool.is_empty() {
        let total: f64 = pool.iter().map(|r| r.final_score).sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = pool.len() - 1;
        for (i, r) in pool.iter().enumerate() {
            acc += r.final_score;
            if target < acc {
                pick = i;
                break;
            }
        }
        drawn.push(pool.remove(pick));
    }
    Ok(drawn)
}

/// Shared number of items between two lists, treated as sets.
pub fn overlap<T: Eq + std::hash::Hash>(a: &[T], b: &[T]) -> usize {
    let a: std::collections::HashSet<&T> = a.iter().collect();
    let b: std::collections::HashSet<&T> = b.iter().collect();
    a.intersection(&b).count()
}

/// Scoring state over one corpus. Immutable and cheap to share.
#[derive(Debug)]
pub struct Engine {
    corpus: Arc<Corpus>,
    index_space: Vectorizer<IndexIx>,
    movie_space: Vectorizer<MovieIx>,
    text_space: Vectorizer<String>,
    lowercase_names: Vec<String>,
}

impl Engine {
    /// Fits the three spaces over every trope of `corpus`.
    pub fn new(corpus: impl Into<Arc<Corpus>>) -> Self {
        let corpus = corpus.into();
        let keys: Vec<TropeIx> = corpus.trope_keys().collect();
        let ((index_space, movie_space), text_space) = rayon::join(
            || {
                rayon::join(
                    || {
                        let docs: Vec<_> = keys.iter().map(|&t| expanded_index_corpus(&corpus, t)).collect();
                        Vectorizer::fit(&docs)
                    },
                    || {
                        let docs: Vec<_> = keys
                            .iter()
                            .map(|&t| corpus.trope(t).occurrences.iter().map(|o| o.movie).collect())
                            .collect();
                        Vectorizer::fit(&docs)
                    },
                )
            },
            || {
                let docs: Vec<_> = keys
                    .iter()
                    .map(|&t| corpus.trope(t).occurrences.iter().flat_map(|o| tokenize(&o.text)).collect())
                    .collect();
                Vectorizer::fit(&docs)
            },
        );
        let lowercase_names = corpus.tropes().iter().map(|t| t.name.to_lowercase()).collect();
        Engine { corpus, index_space, movie_space, text_space, lowercase_names }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn shared_corpus(&self) -> Arc<Corpus> {
        Arc::clone(&self.corpus)
    }

    pub fn index_space(&self) -> &Vectorizer<IndexIx> {
        &self.index_space
    }

    pub fn movie_space(&self) -> &Vectorizer<MovieIx> {
        &self.movie_space
    }

    pub fn text_space(&self) -> &Vectorizer<String> {
        &self.text_space
    }

    /// Resolves ids, validates and fills in defaults. A missing seed is drawn
    /// from the OS generator.
    pub fn resolve(&self, query: &SuggestionQuery) -> Result<ResolvedQuery, SuggestError> {
        let c = &self.corpus;
        let inputs = sorted_keys(query.input_tropes.iter().map(|id| c.trope_ix(id)))?;
        let exclude = sorted_keys(query.exclude.iter().map(|id| c.trope_ix(id)))?;
        let index_filters = sorted_keys(query.index_filters.iter().map(|id| c.index_ix(id)))?;
        let movie_filters = sorted_keys(query.movie_filters.iter().map(|id| c.movie_ix(id)))?;
        let text = query.text.as_ref().map(|t| t.trim()).filter(|t| !t.is_empty()).map(str::to_owned);
        if inputs.is_empty() && text.is_none() {
            return Err(SuggestError::EmptyQuery);
        }
        if query.count == 0 {
            return Err(SuggestError::InvalidCount);
        }
        if !query.temperature.is_finite() || query.temperature < 0.0 {
            return Err(SuggestError::InvalidTemperature(query.temperature));
        }
        Ok(ResolvedQuery {
            inputs,
            text,
            breadth: query.breadth,
            index_filters,
            movie_filters,
            exclude,
            count: query.count,
            temperature: query.temperature,
            seed: query.seed.unwrap_or_else(rand::random),
        })
    }

    fn check(&self, t: TropeIx) -> Result<(), SuggestError> {
        if t.index() < self.corpus.trope_count() {
            Ok(())
        } else {
            Err(CorpusError::NotFound { kind: crate::corpus::EntityKind::Trope, id: format!("#{}", t.0) }.into())
        }
    }

    /// Cosine similarity of two tropes in the index space.
    pub fn index_similarity(&self, a: TropeIx, b: TropeIx) -> Result<f64, SuggestError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.index_space.similarity(a.index(), b.index()).expect("checked"))
    }

    /// Cosine similarity of two tropes in the movie space.
    pub fn movie_similarity(&self, a: TropeIx, b: TropeIx) -> Result<f64, SuggestError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.movie_space.similarity(a.index(), b.index()).expect("checked"))
    }

    /// Cosine similarity of two tropes in the occurrence-text space.
    pub fn text_similarity(&self, a: TropeIx, b: TropeIx) -> Result<f64, SuggestError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.text_space.similarity(a.index(), b.index()).expect("checked"))
    }

    /// Product of index similarities to every input, for every trope.
    /// Inputs are multiplied left to right in ascending key order.
    pub fn index_scores(&self, inputs: &[TropeIx]) -> Result<Vec<f64>, SuggestError> {
        let mut inputs = inputs.to_vec();
        inputs.sort();
        inputs.dedup();
        let mut product = vec![1.0; self.corpus.trope_count()];
        for &i in &inputs {
            self.check(i)?;
            let sims = self.index_space.similarities_to(i.index()).expect("checked");
            for (p, s) in product.iter_mut().zip(sims) {
                *p *= s;
            }
        }
        Ok(product)
    }

    pub fn index_score(&self, inputs: &[TropeIx], candidate: TropeIx) -> Result<f64, SuggestError> {
        self.check(candidate)?;
        let mut inputs = inputs.to_vec();
        inputs.sort();
        inputs.dedup();
        let mut p = 1.0;
        for i in inputs {
            p *= self.index_similarity(i, candidate)?;
        }
        Ok(p)
    }

    /// Co-occurrence score of every trope against one input: the best
    /// movie-space similarity through the input itself (weight 1) or through
    /// any of its description tropes (weighted by their index similarity to
    /// the input).
    pub fn cooccurrence_scores_single(&self, input: TropeIx) -> Result<Vec<f64>, SuggestError> {
        self.check(input)?;
        let mut best = self.movie_space.similarities_to(input.index()).expect("checked");
        for &d in &self.corpus.trope(input).description_tropes {
            let weight = self.index_space.similarity(input.index(), d.index()).expect("checked");
            if weight == 0.0 {
                continue;
            }
            let through = self.movie_space.similarities_to(d.index()).expect("checked");
            for (b, s) in best.iter_mut().zip(through) {
                *b = b.max(weight * s);
            }
        }
        Ok(best)
    }

    /// Maximum over inputs of the single-input co-occurrence scores.
    pub fn cooccurrence_scores(&self, inputs: &[TropeIx]) -> Result<Vec<f64>, SuggestError> {
        let mut best = vec![0.0f64; self.corpus.trope_count()];
        for &i in inputs {
            for (b, s) in best.iter_mut().zip(self.cooccurrence_scores_single(i)?) {
                *b = b.max(s);
            }
        }
        Ok(best)
    }

    pub fn cooccurrence_score(&self, input: TropeIx, candidate: TropeIx) -> Result<f64, SuggestError> {
        self.check(candidate)?;
        let mut best = self.movie_similarity(input, candidate)?;
        for &d in &self.corpus.trope(input).description_tropes {
            best = best.max(self.index_similarity(input, d)? * self.movie_similarity(d, candidate)?);
        }
        Ok(best)
    }

    pub fn cooccurrence_score_multi(&self, inputs: &[TropeIx], candidate: TropeIx) -> Result<f64, SuggestError> {
        let mut best = 0.0f64;
        for &i in inputs {
            best = best.max(self.cooccurrence_score(i, candidate)?);
        }
        Ok(best)
    }

    /// Similarity of free text to every trope's concatenated occurrence texts.
    pub fn text_scores(&self, text: &str) -> Vec<f64> {
        let query: TermCorpus<String> = tokenize(text).collect();
        self.text_space.query_similarity(&query)
    }

    /// All tropes passing the index and movie filters, minus inputs and
    /// exclusions, in ascending key order.
    pub fn filter_candidates(
        &self,
        index_filters: &[IndexIx],
        movie_filters: &[MovieIx],
        exclude: &[TropeIx],
        inputs: &[TropeIx],
    ) -> Vec<TropeIx> {
        let c = &self.corpus;
        let mut keep = vec![true; c.trope_count()];
        if !index_filters.is_empty() {
            let mut allowed = vec![false; keep.len()];
            for &i in index_filters {
                for &t in &c.index(i).members {
                    allowed[t.index()] = true;
                }
            }
            keep.iter_mut().zip(&allowed).for_each(|(k, a)| *k &= a);
        }
        if !movie_filters.is_empty() {
            let mut allowed = vec![false; keep.len()];
            for &m in movie_filters {
                for &t in &c.movie(m).tropes {
                    allowed[t.index()] = true;
                }
            }
            keep.iter_mut().zip(&allowed).for_each(|(k, a)| *k &= a);
        }
        for &t in exclude.iter().chain(inputs) {
            keep[t.index()] = false;
        }
        c.trope_keys().filter(|t| keep[t.index()]).collect()
    }

    /// Raw score of every filtered candidate, in ascending key order.
    pub fn combined_raw_scores(&self, query: &ResolvedQuery) -> Result<Vec<(TropeIx, f64)>, SuggestError> {
        let candidates = self.filter_candidates(&query.index_filters, &query.movie_filters, &query.exclude, &query.inputs);
        if candidates.is_empty() {
            return Err(SuggestError::EmptyCandidateSet);
        }
        let trope_component = if query.inputs.is_empty() {
            None
        } else {
            Some(match query.breadth {
                Breadth::Index => self.index_scores(&query.inputs)?,
                Breadth::Cooccurrence => self.cooccurrence_scores(&query.inputs)?,
                Breadth::Mixed => {
                    let co = self.cooccurrence_scores(&query.inputs)?;
                    let mut ind = self.index_scores(&query.inputs)?;
                    ind.iter_mut().zip(co).for_each(|(i, c)| *i *= c);
                    ind
                }
            })
        };
        let text_component = query.text.as_deref().map(|t| self.text_scores(t));
        let raw = match (trope_component, text_component) {
            (Some(mut t), Some(x)) => {
                t.iter_mut().zip(x).for_each(|(a, b)| *a *= b);
                t
            }
            (Some(t), None) => t,
            (None, Some(x)) => x,
            (None, None) => return Err(SuggestError::EmptyQuery),
        };
        Ok(candidates.into_iter().map(|t| (t, raw[t.index()])).collect())
    }

    /// Movies holding both `suggestion` and at least one input, most shared
    /// inputs first, then by movie id; at most five.
    pub fn attach_evidence(&self, suggestion: TropeIx, inputs: &[TropeIx]) -> Vec<(MovieIx, String)> {
        let c = &self.corpus;
        let mut shared: Vec<(usize, MovieIx, &str)> = c
            .trope(suggestion)
            .occurrences
            .iter()
            .filter_map(|o| {
                let movie = c.movie(o.movie);
                let n = inputs.iter().filter(|i| movie.tropes.binary_search(i).is_ok()).count();
                (n > 0).then_some((n, o.movie, o.text.as_str()))
            })
            .collect();
        shared.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        shared.truncate(MAX_EVIDENCE);
        shared.into_iter().map(|(_, m, text)| (m, text.to_owned())).collect()
    }

    /// Ranked (and, for positive temperature, sampled) candidates for a
    /// resolved query, before evidence is attached.
    pub fn select(&self, query: &ResolvedQuery) -> Result<(usize, Vec<RankedScore<TropeIx>>), SuggestError> {
        let raw = self.combined_raw_scores(query)?;
        let picked = if query.temperature == 0.0 {
            let top = top_k(&raw, query.count);
            if top.is_empty() {
                return Err(SuggestError::AllZeroScores);
            }
            top
        } else {
            let ranked = apply_temperature(&raw, query.temperature)?;
            sample_suggestions(&ranked, query.count, query.seed)?
        };
        Ok((raw.len(), picked))
    }

    /// Filters, scores, ranks, samples and attaches evidence.
    pub fn suggest(&self, query: &SuggestionQuery) -> Result<SuggestionOutcome, SuggestError> {
        let resolved = self.resolve(query)?;
        let (candidates, picked) = self.select(&resolved)?;
        let c = &self.corpus;
        let suggestions = picked
            .into_iter()
            .map(|r| {
                let trope = c.trope(r.key);
                ScoredTrope {
                    trope: trope.id.clone(),
                    name: trope.name.clone(),
                    laconic: trope.laconic.clone(),
                    raw_score: r.raw,
                    final_score: r.final_score,
                    rank: r.rank,
                    evidence: self
                        .attach_evidence(r.key, &resolved.inputs)
                        .into_iter()
                        .map(|(m, text)| {
                            let movie = c.movie(m);
                            Evidence { movie: movie.id.clone(), title: movie.title.clone(), text }
                        })
                        .collect(),
                }
            })
            .collect();
        Ok(SuggestionOutcome { query: self.echo(&resolved), candidates, suggestions })
    }

    fn echo(&self, q: &ResolvedQuery) -> SuggestionQuery {
        let c = &self.corpus;
        let tropes = |keys: &[TropeIx]| keys.iter().map(|&t| c.trope(t).id.clone()).collect();
        SuggestionQuery {
            input_tropes: tropes(&q.inputs),
            text: q.text.clone(),
            breadth: q.breadth,
            index_filters: q.index_filters.iter().map(|&i| c.index(i).id.clone()).collect(),
            movie_filters: q.movie_filters.iter().map(|&m| c.movie(m).id.clone()).collect(),
            count: q.count,
            temperature: q.temperature,
            seed: Some(q.seed),
            exclude: tropes(&q.exclude),
        }
    }

    /// Case-insensitive substring search over trope names, ordered by match
    /// position, then name length, then id.
    pub fn name_search(&self, fragment: &str, limit: usize) -> Vec<TropeIx> {
        let needle = fragment.trim().to_lowercase();
        if needle.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<(usize, usize, TropeIx)> = self
            .lowercase_names
            .iter()
            .enumerate()
            .filter_map(|(t, name)| {
                let byte_pos = name.find(&needle)?;
                Some((name[..byte_pos].chars().count(), name.chars().count(), TropeIx(t as u32)))
            })
            .collect();
        hits.sort();
        hits.into_iter().take(limit).map(|(_, _, t)| t).collect()
    }
}

fn sorted_keys<K: Ord>(keys: impl Iterator<Item = Result<K, CorpusError>>) -> Result<Vec<K>, SuggestError> {
    let mut v = keys.collect::<Result<Vec<K>, _>>()?;
    v.sort();
    v.dedup();
    Ok(v)
}
