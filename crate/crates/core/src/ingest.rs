//! Dataset files: JSON-lines parsing, canonical serialization and seeded
//! synthetic fixtures.
//!
//! Each line of a dataset file is one JSON object whose `kind` is `"trope"`
//! or `"movie"`. Canonical output sorts records by `(kind, id)` (so movies
//! come first), writes object keys in the fixed order below and keeps arrays
//! in stored order:
//!
//! ```text
//! {"kind":"movie","id":..,"title":..,"year":..,"synopsis":..,"genres":[..]}
//! {"kind":"trope","id":..,"name":..,"laconic":..,"description_tropes":[..],"indexes":[..],"occurrences":[{"movie":..,"text":..}]}
//! ```
//!
//! Optional movie keys are omitted when absent. Every line ends with `\n`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, LoadReport, MovieRecord, OccurrenceRecord, TropeRecord};

const TROPE_FIELDS: &[&str] = &["kind", "id", "name", "laconic", "description_tropes", "indexes", "occurrences"];
const MOVIE_FIELDS: &[&str] = &["kind", "id", "title", "year", "synopsis", "genres"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl IngestError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        IngestError::Parse { line, message: message.into() }
    }
}

/// Reads and validates a dataset file.
pub fn load_dataset(path: impl AsRef<Path>, strict: bool) -> Result<(Corpus, LoadReport), IngestError> {
    let file = File::open(path)?;
    read_dataset(BufReader::new(file), strict)
}

/// Parses dataset records from any buffered reader. Line numbers in errors are 1-based.
pub fn read_dataset(reader: impl BufRead, strict: bool) -> Result<(Corpus, LoadReport), IngestError> {
    let mut tropes = Vec::new();
    let mut movies = Vec::new();
    let mut unknown_fields = 0;
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| IngestError::parse(line_no, e.to_string()))?;
        let Value::Object(map) = &value else {
            return Err(IngestError::parse(line_no, "record is not a JSON object"));
        };
        let kind = map
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| IngestError::parse(line_no, "missing string field `kind`"))?;
        let known = match kind {
            "trope" => TROPE_FIELDS,
            "movie" => MOVIE_FIELDS,
            other => return Err(IngestError::parse(line_no, format!("unknown kind `{other}`"))),
        };
        for key in map.keys().filter(|k| !known.contains(&k.as_str())) {
            tracing::warn!(line = line_no, field = %key, "ignoring unknown field");
            unknown_fields += 1;
        }
        if kind == "trope" {
            let record: TropeRecord =
                serde_json::from_value(value).map_err(|e| IngestError::parse(line_no, e.to_string()))?;
            tropes.push(record);
        } else {
            let record: MovieRecord =
                serde_json::from_value(value).map_err(|e| IngestError::parse(line_no, e.to_string()))?;
            movies.push(record);
        }
    }
    let (corpus, mut report) = Corpus::from_records(tropes, movies, strict)?;
    report.unknown_fields = unknown_fields;
    Ok((corpus, report))
}

#[derive(Serialize)]
struct CanonicalMovie<'a> {
    kind: &'static str,
    #[serde(flatten)]
    record: &'a MovieRecord,
}

#[derive(Serialize)]
struct CanonicalTrope<'a> {
    kind: &'static str,
    id: &'a str,
    name: &'a str,
    laconic: &'a str,
    description_tropes: &'a [String],
    indexes: &'a [String],
    occurrences: &'a [OccurrenceRecord],
}

/// Writes the canonical serialization of `corpus`.
pub fn write_dataset(corpus: &Corpus, writer: impl Write) -> io::Result<()> {
    let mut w = BufWriter::new(writer);
    let (tropes, movies) = corpus.to_records();
    for m in &movies {
        serde_json::to_writer(&mut w, &CanonicalMovie { kind: "movie", record: m })?;
        w.write_all(b"\n")?;
    }
    for t in &tropes {
        let canonical = CanonicalTrope {
            kind: "trope",
            id: &t.id,
            name: &t.name,
            laconic: &t.laconic,
            description_tropes: &t.description_tropes,
            indexes: &t.indexes,
            occurrences: &t.occurrences,
        };
        serde_json::to_writer(&mut w, &canonical)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_dataset(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let file = File::create(path)?;
    write_dataset(corpus, file)?;
    Ok(())
}

pub fn canonical_bytes(corpus: &Corpus) -> Vec<u8> {
    let mut out = Vec::new();
    write_dataset(corpus, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Hex SHA-256 of the canonical serialization.
pub fn fingerprint(corpus: &Corpus) -> String {
    hex::encode(Sha256::digest(canonical_bytes(corpus)))
}

const SYLLABLES: &[&str] = &[
    "ka", "ro", "mi", "ten", "dor", "vel", "sha", "qui", "bra", "lo", "nex", "tor", "fa", "gri", "zu", "pel", "an",
    "mor", "si", "ul", "ve", "cra", "do", "rin",
];
const FILLER: &[&str] = &["the", "and", "with", "after", "before", "into", "while", "their", "at", "of"];
const GENRES: &[&str] = &["Action", "Comedy", "Crime", "Drama", "Fantasy", "Horror", "Romance", "SciFi", "Thriller"];
const INDEX_FAMILY: usize = 5;
const VOCAB_PER_INDEX: usize = 8;

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=3);
    (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

fn capitalized(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
}

/// Draws up to `target` distinct values, first from `preferred` with
/// probability `bias`, falling back to uniform picks over `0..universe`.
fn distinct_draws(
    rng: &mut ChaCha8Rng,
    target: usize,
    universe: usize,
    bias: f64,
    mut preferred: impl FnMut(&mut ChaCha8Rng) -> Option<usize>,
    excluded: &HashSet<usize>,
    out: &mut Vec<usize>,
) {
    let available = universe.saturating_sub(excluded.len());
    let target = target.min(available);
    let mut seen: HashSet<usize> = out.iter().copied().collect();
    let mut attempts = 0;
    while out.len() < target {
        attempts += 1;
        let pick = if attempts < 20 * target + 20 && rng.random_bool(bias) {
            preferred(rng)
        } else {
            None
        };
        let pick = pick.unwrap_or_else(|| rng.random_range(0..universe));
        if !excluded.contains(&pick) && seen.insert(pick) {
            out.push(pick);
        }
    }
}

/// Generates a deterministic clustered corpus.
///
/// Per-trope index, description-trope and occurrence counts are Poisson with
/// means 4.2, 13.1 and 26.2 (capped by what exists). Indexes come in families
/// of five; tropes favour indexes from one family, movies have a theme index,
/// and occurrences favour movies themed on the trope's indexes, so tropes that
/// share indexes also tend to share movies. Occurrence texts draw words from
/// per-index vocabularies. A few indexes share their id with a trope.
pub fn generate_fixture(n_tropes: usize, n_indexes: usize, n_movies: usize, seed: u64) -> Corpus {
    assert!(n_tropes >= 1, "a fixture needs at least one trope");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let trope_id = |t: usize| format!("T{t:05}");
    // Index j < n_index_tropes is named after trope `n_tropes - 1 - j`.
    let n_index_tropes = if n_tropes >= 2 { (n_indexes / 20).min(n_tropes / 2) } else { 0 };
    let index_owner = |j: usize| (j < n_index_tropes).then(|| n_tropes - 1 - j);
    let index_id = |j: usize| match index_owner(j) {
        Some(t) => trope_id(t),
        None => format!("I{j:04}"),
    };

    let vocab: Vec<Vec<String>> = (0..n_indexes)
        .map(|_| (0..VOCAB_PER_INDEX).map(|_| pseudo_word(&mut rng)).collect())
        .collect();

    // Index memberships.
    let mut trope_indexes: Vec<Vec<usize>> = Vec::with_capacity(n_tropes);
    for t in 0..n_tropes {
        let mut own = Vec::new();
        if n_indexes > 0 {
            let excluded: HashSet<usize> = (0..n_index_tropes).filter(|&j| index_owner(j) == Some(t)).collect();
            let target = 1 + poisson(&mut rng, 3.2);
            let primary = rng.random_range(0..n_indexes);
            let family = primary / INDEX_FAMILY * INDEX_FAMILY;
            let family_end = (family + INDEX_FAMILY).min(n_indexes);
            if !excluded.contains(&primary) {
                own.push(primary);
            }
            distinct_draws(
                &mut rng,
                target,
                n_indexes,
                0.7,
                |r| Some(r.random_range(family..family_end)),
                &excluded,
                &mut own,
            );
        }
        trope_indexes.push(own);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_indexes];
    for (t, own) in trope_indexes.iter().enumerate() {
        for &j in own {
            members[j].push(t);
        }
    }
    for j in 0..n_indexes {
        if members[j].is_empty() {
            let mut t = j % n_tropes;
            if index_owner(j) == Some(t) {
                t = (t + 1) % n_tropes;
            }
            trope_indexes[t].push(j);
            members[j].push(t);
        }
    }

    // Movies with a theme index each.
    let mut theme_movies: Vec<Vec<usize>> = vec![Vec::new(); n_indexes];
    let mut movie_theme = Vec::with_capacity(n_movies);
    let mut movies = Vec::with_capacity(n_movies);
    for m in 0..n_movies {
        let theme = (n_indexes > 0).then(|| rng.random_range(0..n_indexes));
        if let Some(j) = theme {
            theme_movies[j].push(m);
        }
        movie_theme.push(theme);
        let words = rng.random_range(1..=3);
        let title = (0..words).map(|_| capitalized(&pseudo_word(&mut rng))).collect::<Vec<_>>().join(" ");
        let year = rng.random_bool(0.9).then(|| rng.random_range(1950..2024));
        let synopsis = rng.random_bool(0.5).then(|| {
            let n = rng.random_range(6..14);
            word_salad(&mut rng, n, theme.map(|j| vocab[j].as_slice()), None)
        });
        let genres = rng.random_bool(0.8).then(|| {
            let mut g: Vec<String> = GENRES.choose_multiple(&mut rng, 2).map(|s| s.to_string()).collect();
            g.truncate(rng.random_range(1..=2));
            g
        });
        movies.push(MovieRecord { id: format!("M{m:05}"), title, year, synopsis, genres });
    }

    let mut tropes = Vec::with_capacity(n_tropes);
    for t in 0..n_tropes {
        let own = &trope_indexes[t];

        let mut desc = Vec::new();
        if n_tropes > 1 {
            let target = poisson(&mut rng, 13.1);
            let excluded = HashSet::from([t]);
            distinct_draws(
                &mut rng,
                target,
                n_tropes,
                0.7,
                |r| own.choose(r).and_then(|&j| members[j].choose(r).copied()),
                &excluded,
                &mut desc,
            );
        }

        let mut occ = Vec::new();
        if n_movies > 0 {
            let target = poisson(&mut rng, 26.2);
            distinct_draws(
                &mut rng,
                target,
                n_movies,
                0.75,
                |r| {
                    let &j = own.choose(r)?;
                    let family = j / INDEX_FAMILY * INDEX_FAMILY;
                    let sibling = r.random_range(family..(family + INDEX_FAMILY).min(n_indexes));
                    theme_movies[sibling].choose(r).copied()
                },
                &HashSet::new(),
                &mut occ,
            );
        }

        let name = (0..rng.random_range(1..=3))
            .map(|_| capitalized(&pseudo_word(&mut rng)))
            .collect::<Vec<_>>()
            .join(" ");
        let primary_vocab = own.first().map(|&j| vocab[j].as_slice());
        let laconic_len = rng.random_range(4..9);
        let laconic = word_salad(&mut rng, laconic_len, primary_vocab, None);
        let occurrences = occ
            .into_iter()
            .map(|m| {
                let trope_vocab = own.choose(&mut rng).map(|&j| vocab[j].as_slice());
                let movie_vocab = movie_theme[m].map(|j| vocab[j].as_slice());
                let n = rng.random_range(5..=12);
                OccurrenceRecord { movie: format!("M{m:05}"), text: word_salad(&mut rng, n, trope_vocab, movie_vocab) }
            })
            .collect();
        tropes.push(TropeRecord {
            id: trope_id(t),
            name,
            laconic,
            description_tropes: desc.into_iter().map(trope_id).collect(),
            indexes: own.iter().map(|&j| index_id(j)).collect(),
            occurrences,
        });
    }

    let (corpus, _) = Corpus::from_records(tropes, movies, true).expect("generated fixtures are consistent");
    corpus
}

fn word_salad(rng: &mut ChaCha8Rng, n: usize, primary: Option<&[String]>, secondary: Option<&[String]>) -> String {
    let mut words: Vec<&str> = Vec::with_capacity(n);
    for _ in 0..n {
        let roll: f64 = rng.random();
        let word = match (roll, primary, secondary) {
            (r, Some(p), _) if r < 0.5 => p.choose(rng).map(String::as_str),
            (r, _, Some(s)) if r < 0.75 => s.choose(rng).map(String::as_str),
            _ => None,
        };
        words.push(word.unwrap_or_else(|| FILLER.choose(rng).unwrap()));
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get(..1) {
        let upper = first.to_uppercase();
        s.replace_range(..1, &upper);
    }
    s.push('.');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_TROPES: &str = r#"{"kind":"trope","id":"A","name":"Alpha","laconic":"","description_tropes":["B"],"indexes":["X"],"occurrences":[{"movie":"M1","text":"one"}]}
{"kind":"trope","id":"B","name":"Beta","laconic":"b","description_tropes":[],"indexes":["X","Y"],"occurrences":[]}
{"kind":"trope","id":"C","name":"Gamma","laconic":"c","description_tropes":["A","B"],"indexes":["Y"],"occurrences":[{"movie":"M1","text":"two"}]}
{"kind":"movie","id":"M1","title":"Film","year":2000}
"#;

    fn parse(s: &str, strict: bool) -> Result<(Corpus, LoadReport), IngestError> {
        read_dataset(s.as_bytes(), strict)
    }

    #[test]
    fn small_hand_written_file() {
        let (c, report) = parse(THREE_TROPES, true).unwrap();
        assert_eq!((report.tropes, report.indexes, report.movies), (3, 2, 1));
        assert_eq!(report.dropped_edges, 0);
        c.check_integrity().unwrap();
    }

    #[test]
    fn dangling_movie_is_named_in_strict_mode() {
        let text = THREE_TROPES.replace(r#"{"movie":"M1","text":"two"}"#, r#"{"movie":"M404","text":"two"}"#);
        let err = parse(&text, true).unwrap_err();
        assert!(err.to_string().contains("M404"), "{err}");
        let (_, report) = parse(&text, false).unwrap();
        assert_eq!(report.dropped_edges, 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{}{{\"kind\":\"trope\",", THREE_TROPES);
        match parse(&text, true) {
            Err(IngestError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse(r#"{"kind":"book","id":"x"}"#, true) {
            Err(IngestError::Parse { line: 1, message }) => assert!(message.contains("book")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_counted() {
        let text = THREE_TROPES.replace(r#""title":"Film""#, r#""title":"Film","rating":9"#);
        let (_, report) = parse(&text, true).unwrap();
        assert_eq!(report.unknown_fields, 1);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{THREE_TROPES}{}\n", r#"{"kind":"movie","id":"M1","title":"Again"}"#);
        assert!(matches!(parse(&text, false), Err(IngestError::Corpus(CorpusError::DuplicateId { .. }))));
    }

    #[test]
    fn empty_corpus_writes_nothing() {
        assert!(canonical_bytes(&Corpus::empty()).is_empty());
        let (c, _) = parse("", true).unwrap();
        assert_eq!(c, Corpus::empty());
    }

    #[test]
    fn canonical_key_order() {
        let (c, _) = parse(THREE_TROPES, true).unwrap();
        let text = String::from_utf8(canonical_bytes(&c)).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, r#"{"kind":"movie","id":"M1","title":"Film","year":2000}"#);
        assert!(text.lines().nth(1).unwrap().starts_with(r#"{"kind":"trope","id":"A","name":"Alpha","laconic":"","description_tropes":["B"]"#));
    }

    #[test]
    fn fixture_is_deterministic() {
        let a = generate_fixture(200, 30, 50, 42);
        let b = generate_fixture(200, 30, 50, 42);
        assert_eq!(a, b);
        assert_ne!(fingerprint(&a), fingerprint(&generate_fixture(200, 30, 50, 43)));
        a.check_integrity().unwrap();
        assert_eq!(a.trope_count(), 200);
        assert_eq!(a.indexes().len(), 30);
        assert!(a.indexes().iter().any(|i| i.is_trope()));
    }

    #[test]
    fn fixture_without_movies() {
        let c = generate_fixture(20, 5, 0, 1);
        assert!(c.tropes().iter().all(|t| t.occurrences.is_empty()));
        c.check_integrity().unwrap();
        let single = generate_fixture(1, 3, 2, 9);
        single.check_integrity().unwrap();
        assert!(single.tropes()[0].description_tropes.is_empty());
    }
}
