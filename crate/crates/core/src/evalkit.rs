//! Evaluation machinery: random baselines, top-k overlap campaigns, Likert
//! rating aggregation and percentile bootstrap confidence intervals.
//!
//! Ratings are read from CSV with the header
//! `input_id,method,question,rater_id,rating`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, TropeIx};
use crate::suggest::{Breadth, Engine, SuggestError, SuggestionQuery};

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// "Somewhat Agree" on the 7-point scale.
pub const DEFAULT_FAMILIARITY_THRESHOLD: u8 = 5;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("cannot bootstrap an empty sample")]
    EmptyInput,
    #[error("requested {requested} items from a population of {available}")]
    InsufficientPopulation { requested: usize, available: usize },
    #[error("iterations must be at least 1")]
    InvalidIterations,
    #[error("confidence level must be in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Suggest(#[from] SuggestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Index,
    Cooccurrence,
    Random,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Index => "index",
            Method::Cooccurrence => "cooccurrence",
            Method::Random => "random",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "index" => Ok(Method::Index),
            "cooccurrence" => Ok(Method::Cooccurrence),
            "random" => Ok(Method::Random),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// Questionnaire items: six single-input statements and two multi-input ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Question {
    #[serde(rename = "S1-1")]
    S1_1,
    #[serde(rename = "S1-2")]
    S1_2,
    #[serde(rename = "S1-3")]
    S1_3,
    #[serde(rename = "S1-4")]
    S1_4,
    #[serde(rename = "S1-5")]
    S1_5,
    #[serde(rename = "S1-6")]
    S1_6,
    #[serde(rename = "S2-1")]
    S2_1,
    #[serde(rename = "S2-2")]
    S2_2,
}

impl Question {
    pub const ALL: [Question; 8] = [
        Question::S1_1,
        Question::S1_2,
        Question::S1_3,
        Question::S1_4,
        Question::S1_5,
        Question::S1_6,
        Question::S2_1,
        Question::S2_2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Question::S1_1 => "S1-1",
            Question::S1_2 => "S1-2",
            Question::S1_3 => "S1-3",
            Question::S1_4 => "S1-4",
            Question::S1_5 => "S1-5",
            Question::S1_6 => "S1-6",
            Question::S2_1 => "S2-1",
            Question::S2_2 => "S2-2",
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Question {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Question::ALL
            .into_iter()
            .find(|q| q.label() == s)
            .ok_or_else(|| format!("unknown question `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingSample {
    pub input_id: String,
    pub method: Method,
    pub question: Question,
    pub rater_id: String,
    pub rating: u8,
}

impl RatingSample {
    pub fn new(input_id: &str, method: Method, question: Question, rater_id: &str, rating: u8) -> Result<Self, String> {
        if !(1..=7).contains(&rating) {
            return Err(format!("rating {rating} outside 1..=7"));
        }
        Ok(RatingSample { input_id: input_id.into(), method, question, rater_id: rater_id.into(), rating })
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    input_id: String,
    method: String,
    question: String,
    rater_id: String,
    rating: String,
}

/// Parses a ratings CSV. Errors carry the 1-based file line number.
pub fn read_ratings_csv(reader: impl Read) -> Result<Vec<RatingSample>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        EvalError::Csv { line, message: e.to_string() }
    };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let expected = ["input_id", "method", "question", "rater_id", "rating"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(EvalError::Csv { line: 1, message: format!("header must be `{}`", expected.join(",")) });
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<CsvRow>() {
        let row = row.map_err(csv_err)?;
        let line = out.len() as u64 + 2;
        let fail = |message: String| EvalError::Csv { line, message };
        let method = row.method.parse().map_err(fail)?;
        let question = row.question.parse().map_err(fail)?;
        let rating: u8 = row.rating.parse().map_err(|_| fail(format!("rating `{}` is not an integer", row.rating)))?;
        out.push(RatingSample::new(&row.input_id, method, question, &row.rater_id, rating).map_err(fail)?);
    }
    Ok(out)
}

/// Writes samples in the ratings CSV format.
pub fn write_ratings_csv(samples: &[RatingSample], writer: impl std::io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["input_id", "method", "question", "rater_id", "rating"])?;
    for s in samples {
        w.write_record([
            s.input_id.as_str(),
            &s.method.to_string(),
            s.question.label(),
            s.rater_id.as_str(),
            &s.rating.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Uniform sample of `k` tropes without replacement, excluding `exclude`.
pub fn random_baseline(corpus: &Corpus, k: usize, seed: u64, exclude: &[TropeIx]) -> Result<Vec<TropeIx>, EvalError> {
    let mut population: Vec<TropeIx> = corpus.trope_keys().filter(|t| !exclude.contains(t)).collect();
    if k > population.len() {
        return Err(EvalError::InsufficientPopulation { requested: k, available: population.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (picked, _) = population.partial_shuffle(&mut rng, k);
    Ok(picked.to_vec())
}

/// Number of shared items between two suggestion lists.
pub fn topk_overlap<T: Eq + std::hash::Hash>(a: &[T], b: &[T]) -> usize {
    crate::suggest::overlap(a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMean {
    pub input_id: String,
    pub method: Method,
    pub question: Question,
    pub mean: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingAggregate {
    /// Sorted by (input, method, question).
    pub groups: Vec<GroupMean>,
    pub total_samples: usize,
    pub dropped_samples: usize,
    pub dropped_fraction: f64,
}

/// Drops every rating a rater gave for an input when their familiarity
/// rating (S1-1) for that input is below `threshold`, then averages the rest
/// per (input, method, question). When a rater rated S1-1 more than once for
/// one input, the lowest rating counts.
pub fn aggregate_ratings(samples: &[RatingSample], threshold: u8) -> RatingAggregate {
    let mut familiarity: HashMap<(&str, &str), u8> = HashMap::new();
    for s in samples.iter().filter(|s| s.question == Question::S1_1) {
        let e = familiarity.entry((&s.input_id, &s.rater_id)).or_insert(s.rating);
        *e = (*e).min(s.rating);
    }
    let mut sums: BTreeMap<(&str, Method, Question), (u64, usize)> = BTreeMap::new();
    let mut dropped = 0;
    for s in samples {
        if familiarity.get(&(s.input_id.as_str(), s.rater_id.as_str())).is_some_and(|&f| f < threshold) {
            dropped += 1;
            continue;
        }
        let e = sums.entry((&s.input_id, s.method, s.question)).or_insert((0, 0));
        e.0 += s.rating as u64;
        e.1 += 1;
    }
    let groups = sums
        .into_iter()
        .map(|((input, method, question), (sum, n))| GroupMean {
            input_id: input.to_owned(),
            method,
            question,
            mean: sum as f64 / n as f64,
            n,
        })
        .collect();
    RatingAggregate {
        groups,
        total_samples: samples.len(),
        dropped_samples: dropped,
        dropped_fraction: if samples.is_empty() { 0.0 } else { dropped as f64 / samples.len() as f64 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub iterations: usize,
    pub level: f64,
}

/// Means of `iterations` resamples (with replacement) of `values`.
pub fn bootstrap_means(values: &[f64], iterations: usize, seed: u64) -> Result<Vec<f64>, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if iterations == 0 {
        return Err(EvalError::InvalidIterations);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    Ok((0..iterations)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect())
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile interval at `level` over bootstrap means.
pub fn percentile_interval(means: &[f64], level: f64) -> Result<(f64, f64), EvalError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(EvalError::InvalidLevel(level));
    }
    if means.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut sorted = means.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile(&sorted, tail), quantile(&sorted, 1.0 - tail)))
}

/// Percentile bootstrap confidence interval for the mean of `values`.
pub fn bootstrap_ci(values: &[f64], iterations: usize, level: f64, seed: u64) -> Result<BootstrapResult, EvalError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(EvalError::InvalidLevel(level));
    }
    let means = bootstrap_means(values, iterations, seed)?;
    let (ci_low, ci_high) = percentile_interval(&means, level)?;
    Ok(BootstrapResult {
        mean: values.iter().sum::<f64>() / values.len() as f64,
        ci_low,
        ci_high,
        iterations,
        level,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionSummary {
    pub method: Method,
    pub question: Question,
    /// Number of inputs whose per-input mean entered the bootstrap.
    pub inputs: usize,
    #[serde(flatten)]
    pub ci: BootstrapResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub familiarity_threshold: u8,
    pub dropped_fraction: f64,
    /// Sorted by (method, question).
    pub groups: Vec<QuestionSummary>,
}

/// Aggregates ratings per input, then bootstraps the per-input means of
/// every (method, question). Every group uses the same `seed`.
pub fn bootstrap_report(
    samples: &[RatingSample],
    threshold: u8,
    iterations: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapReport, EvalError> {
    let aggregate = aggregate_ratings(samples, threshold);
    let mut per_group: BTreeMap<(Method, Question), Vec<f64>> = BTreeMap::new();
    for g in &aggregate.groups {
        per_group.entry((g.method, g.question)).or_default().push(g.mean);
    }
    let groups = per_group
        .into_iter()
        .map(|((method, question), values)| {
            Ok(QuestionSummary {
                method,
                question,
                inputs: values.len(),
                ci: bootstrap_ci(&values, iterations, level, seed)?,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(BootstrapReport { familiarity_threshold: threshold, dropped_fraction: aggregate.dropped_fraction, groups })
}

/// Pearson correlation; `None` when fewer than two pairs or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (xs[i] - mx, ys[i] - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Correlation between two questions over responses paired by
/// (input, method, rater).
pub fn question_correlation(samples: &[RatingSample], a: Question, b: Question) -> Option<f64> {
    type Pair = (Option<f64>, Option<f64>);
    let mut pairs: BTreeMap<(&str, Method, &str), Pair> = BTreeMap::new();
    for s in samples {
        let slot = pairs.entry((&s.input_id, s.method, &s.rater_id)).or_default();
        if s.question == a {
            slot.0 = Some(s.rating as f64);
        }
        if s.question == b {
            slot.1 = Some(s.rating as f64);
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_values().filter_map(|(x, y)| Some((x?, y?))).unzip();
    pearson(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapCampaign {
    pub inputs: Vec<String>,
    pub k: usize,
    pub method_a: Breadth,
    pub method_b: Breadth,
    /// Shared suggestions per input.
    pub overlaps: Vec<usize>,
    pub mean_overlap: f64,
    /// Fraction of inputs whose two suggestion sets differ.
    pub distinct_fraction: f64,
}

/// Deterministic top-`k` suggestions of one method for one input trope.
pub fn deterministic_top_k(engine: &Engine, input: &str, breadth: Breadth, k: usize) -> Result<Vec<String>, EvalError> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let query = SuggestionQuery { breadth, count: k, temperature: 0.0, seed: Some(0), ..SuggestionQuery::for_tropes([input]) };
    match engine.suggest(&query) {
        Ok(outcome) => Ok(outcome.suggestions.into_iter().map(|s| s.trope).collect()),
        Err(SuggestError::AllZeroScores) => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

/// Compares two methods' deterministic top-`k` lists over `n_inputs` random
/// single-trope inputs.
pub fn overlap_campaign(
    engine: &Engine,
    n_inputs: usize,
    k: usize,
    seed: u64,
    method_a: Breadth,
    method_b: Breadth,
) -> Result<OverlapCampaign, EvalError> {
    let corpus = engine.corpus();
    let inputs: Vec<String> =
        random_baseline(corpus, n_inputs, seed, &[])?.into_iter().map(|t| corpus.trope(t).id.clone()).collect();
    let mut overlaps = Vec::with_capacity(inputs.len());
    let mut distinct = 0;
    for input in &inputs {
        let a = deterministic_top_k(engine, input, method_a, k)?;
        let b = deterministic_top_k(engine, input, method_b, k)?;
        let shared = topk_overlap(&a, &b);
        if shared != a.len() || a.len() != b.len() {
            distinct += 1;
        }
        overlaps.push(shared);
    }
    let n = inputs.len().max(1) as f64;
    Ok(OverlapCampaign {
        mean_overlap: overlaps.iter().sum::<usize>() as f64 / n,
        distinct_fraction: distinct as f64 / n,
        inputs,
        k,
        method_a,
        method_b,
        overlaps,
    })
}
