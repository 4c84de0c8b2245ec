//! The trope knowledge corpus.
//!
//! A [`Corpus`] is built once from string-keyed records, validated, and then
//! shared read-only by every other module. String ids are interned to dense
//! integer keys in lexicographic id order, so comparing keys is the same as
//! comparing ids.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

static ID_PATTERN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z0-9_\-./]+$").unwrap());

/// Returns true when `id` is a well-formed trope, index or movie id.
pub fn is_valid_id(id: &str) -> bool {
    ID_PATTERN.is_match(id)
}

macro_rules! dense_key {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

dense_key!(
    /// Dense key of a trope. Keys follow ascending id order.
    TropeIx
);
dense_key!(
    /// Dense key of an index (category).
    IndexIx
);
dense_key!(
    /// Dense key of a movie.
    MovieIx
);

/// The three entity kinds of the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Trope,
    Index,
    Movie,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Trope => "trope",
            EntityKind::Index => "index",
            EntityKind::Movie => "movie",
        })
    }
}

/// The kind of link a dangling reference was found on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    DescriptionTrope,
    Occurrence,
}

/// A reference from one record to an id that does not exist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DanglingEdge {
    pub from: String,
    pub kind: EdgeKind,
    pub to: String,
}

impl fmt::Display for DanglingEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.kind {
            EdgeKind::DescriptionTrope => "description trope",
            EdgeKind::Occurrence => "movie occurrence",
        };
        write!(f, "{} -> {} ({label})", self.from, self.to)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("unknown {kind} id `{id}`")]
    NotFound { kind: EntityKind, id: String },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: EntityKind, id: String },
    #[error("invalid {kind} id `{id}`")]
    InvalidId { kind: EntityKind, id: String },
    #[error("dangling reference {0}")]
    ReferentialIntegrity(DanglingEdge),
    #[error("corpus invariant violated: {0}")]
    Inconsistent(String),
}

/// A trope as it appears in a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TropeRecord {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub laconic: String,
    #[serde(default)]
    pub description_tropes: Vec<String>,
    #[serde(default)]
    pub indexes: Vec<String>,
    #[serde(default)]
    pub occurrences: Vec<OccurrenceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceRecord {
    pub movie: String,
    #[serde(default)]
    pub text: String,
}

/// A movie as it appears in a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieRecord {
    pub id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synopsis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genres: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Occurrence {
    pub movie: MovieIx,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trope {
    pub id: String,
    pub name: String,
    pub laconic: String,
    /// Tropes linked from this trope's description, in file order.
    pub description_tropes: Vec<TropeIx>,
    pub indexes: Vec<IndexIx>,
    pub occurrences: Vec<Occurrence>,
}

impl Trope {
    pub fn occurrence_in(&self, movie: MovieIx) -> Option<&Occurrence> {
        self.occurrences.iter().find(|o| o.movie == movie)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    pub id: String,
    pub name: String,
    /// The trope sharing this index's id, when the index is itself a trope.
    pub trope: Option<TropeIx>,
    /// Ascending. Exactly the tropes listing this index.
    pub members: Vec<TropeIx>,
}

impl Index {
    pub fn is_trope(&self) -> bool {
        self.trope.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Movie {
    pub id: String,
    pub title: String,
    pub year: Option<i32>,
    pub synopsis: Option<String>,
    pub genres: Option<Vec<String>>,
    /// Ascending. Exactly the tropes with an occurrence in this movie.
    pub tropes: Vec<TropeIx>,
}

/// Counters describing what validation changed while building a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub tropes: usize,
    pub indexes: usize,
    pub movies: usize,
    /// Dangling references dropped in lenient mode.
    pub dropped_edges: usize,
    pub dangling: Vec<DanglingEdge>,
    pub self_references_dropped: usize,
    pub duplicate_links_dropped: usize,
    pub occurrences_merged: usize,
    pub unknown_fields: usize,
}

/// Counts and per-trope attribute means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub tropes: usize,
    pub indexes: usize,
    pub movies: usize,
    pub mean_description_tropes: f64,
    pub mean_indexes: f64,
    pub mean_occurrences: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    tropes: Vec<Trope>,
    indexes: Vec<Index>,
    movies: Vec<Movie>,
    trope_ids: HashMap<String, TropeIx>,
    index_ids: HashMap<String, IndexIx>,
    movie_ids: HashMap<String, MovieIx>,
}

impl Corpus {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates and interns a set of records.
    ///
    /// In strict mode the first dangling reference aborts the build; otherwise
    /// dangling references are dropped and listed in the report. Self
    /// references and repeated links are always dropped, and repeated
    /// occurrences of one movie are merged.
    pub fn from_records(
        trope_records: Vec<TropeRecord>,
        movie_records: Vec<MovieRecord>,
        strict: bool,
    ) -> Result<(Corpus, LoadReport), CorpusError> {
        let mut report = LoadReport::default();

        let mut trope_records = trope_records;
        let mut movie_records = movie_records;
        for r in &trope_records {
            check_id(EntityKind::Trope, &r.id)?;
        }
        for r in &movie_records {
            check_id(EntityKind::Movie, &r.id)?;
        }
        trope_records.sort_by(|a, b| a.id.cmp(&b.id));
        movie_records.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = trope_records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(CorpusError::DuplicateId { kind: EntityKind::Trope, id: w[0].id.clone() });
        }
        if let Some(w) = movie_records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(CorpusError::DuplicateId { kind: EntityKind::Movie, id: w[0].id.clone() });
        }

        let trope_ids: HashMap<String, TropeIx> = trope_records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), TropeIx(i as u32)))
            .collect();
        let movie_ids: HashMap<String, MovieIx> = movie_records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), MovieIx(i as u32)))
            .collect();

        let mut index_names: Vec<String> = Vec::new();
        for r in &trope_records {
            for i in &r.indexes {
                check_id(EntityKind::Index, i)?;
                if *i != r.id {
                    index_names.push(i.clone());
                }
            }
        }
        index_names.sort();
        index_names.dedup();
        let index_ids: HashMap<String, IndexIx> = index_names
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), IndexIx(i as u32)))
            .collect();

        let mut tropes = Vec::with_capacity(trope_records.len());
        for r in trope_records {
            let mut description_tropes = Vec::with_capacity(r.description_tropes.len());
            for d in &r.description_tropes {
                if *d == r.id {
                    tracing::warn!(trope = %r.id, "dropping self reference in description tropes");
                    report.self_references_dropped += 1;
                    continue;
                }
                match trope_ids.get(d) {
                    Some(&ix) if description_tropes.contains(&ix) => report.duplicate_links_dropped += 1,
                    Some(&ix) => description_tropes.push(ix),
                    None => {
                        let edge = DanglingEdge {
                            from: r.id.clone(),
                            kind: EdgeKind::DescriptionTrope,
                            to: d.clone(),
                        };
                        if strict {
                            return Err(CorpusError::ReferentialIntegrity(edge));
                        }
                        report.dropped_edges += 1;
                        report.dangling.push(edge);
                    }
                }
            }

            let mut indexes = Vec::with_capacity(r.indexes.len());
            for i in &r.indexes {
                if *i == r.id {
                    tracing::warn!(trope = %r.id, "dropping self reference in indexes");
                    report.self_references_dropped += 1;
                    continue;
                }
                let ix = index_ids[i];
                if indexes.contains(&ix) {
                    report.duplicate_links_dropped += 1;
                } else {
                    indexes.push(ix);
                }
            }

            let mut occurrences: Vec<Occurrence> = Vec::with_capacity(r.occurrences.len());
            for o in r.occurrences {
                let Some(&movie) = movie_ids.get(&o.movie) else {
                    let edge = DanglingEdge {
                        from: r.id.clone(),
                        kind: EdgeKind::Occurrence,
                        to: o.movie.clone(),
                    };
                    if strict {
                        return Err(CorpusError::ReferentialIntegrity(edge));
                    }
                    report.dropped_edges += 1;
                    report.dangling.push(edge);
                    continue;
                };
                if let Some(existing) = occurrences.iter_mut().find(|e| e.movie == movie) {
                    report.occurrences_merged += 1;
                    if !o.text.is_empty() {
                        if !existing.text.is_empty() {
                            existing.text.push('\n');
                        }
                        existing.text.push_str(&o.text);
                    }
                } else {
                    occurrences.push(Occurrence { movie, text: o.text });
                }
            }

            tropes.push(Trope {
                id: r.id,
                name: r.name,
                laconic: r.laconic,
                description_tropes,
                indexes,
                occurrences,
            });
        }

        let mut indexes: Vec<Index> = index_names
            .into_iter()
            .map(|id| {
                let trope = trope_ids.get(&id).copied();
                let name = match trope {
                    Some(t) => tropes[t.index()].name.clone(),
                    None => id.clone(),
                };
                Index { id, name, trope, members: Vec::new() }
            })
            .collect();
        let mut movies: Vec<Movie> = movie_records
            .into_iter()
            .map(|m| Movie {
                id: m.id,
                title: m.title,
                year: m.year,
                synopsis: m.synopsis,
                genres: m.genres,
                tropes: Vec::new(),
            })
            .collect();
        for (t, trope) in tropes.iter().enumerate() {
            for &i in &trope.indexes {
                indexes[i.index()].members.push(TropeIx(t as u32));
            }
            for o in &trope.occurrences {
                movies[o.movie.index()].tropes.push(TropeIx(t as u32));
            }
        }
        report.tropes = tropes.len();
        report.indexes = indexes.len();
        report.movies = movies.len();
        let corpus = Corpus { tropes, indexes, movies, trope_ids, index_ids, movie_ids };
        debug_assert!(corpus.check_integrity().is_ok());
        Ok((corpus, report))
    }

    /// Converts the corpus back into records, tropes and movies sorted by id.
    pub fn to_records(&self) -> (Vec<TropeRecord>, Vec<MovieRecord>) {
        let tropes = self
            .tropes
            .iter()
            .map(|t| TropeRecord {
                id: t.id.clone(),
                name: t.name.clone(),
                laconic: t.laconic.clone(),
                description_tropes: t.description_tropes.iter().map(|&d| self.trope(d).id.clone()).collect(),
                indexes: t.indexes.iter().map(|&i| self.index(i).id.clone()).collect(),
                occurrences: t
                    .occurrences
                    .iter()
                    .map(|o| OccurrenceRecord { movie: self.movie(o.movie).id.clone(), text: o.text.clone() })
                    .collect(),
            })
            .collect();
        let movies = self
            .movies
            .iter()
            .map(|m| MovieRecord {
                id: m.id.clone(),
                title: m.title.clone(),
                year: m.year,
                synopsis: m.synopsis.clone(),
                genres: m.genres.clone(),
            })
            .collect();
        (tropes, movies)
    }

    pub fn tropes(&self) -> &[Trope] {
        &self.tropes
    }

    pub fn indexes(&self) -> &[Index] {
        &self.indexes
    }

    pub fn movies(&self) -> &[Movie] {
        &self.movies
    }

    pub fn trope_count(&self) -> usize {
        self.tropes.len()
    }

    pub fn trope(&self, ix: TropeIx) -> &Trope {
        &self.tropes[ix.index()]
    }

    pub fn index(&self, ix: IndexIx) -> &Index {
        &self.indexes[ix.index()]
    }

    pub fn movie(&self, ix: MovieIx) -> &Movie {
        &self.movies[ix.index()]
    }

    pub fn trope_keys(&self) -> impl ExactSizeIterator<Item = TropeIx> + '_ {
        (0..self.tropes.len() as u32).map(TropeIx)
    }

    pub fn trope_ix(&self, id: &str) -> Result<TropeIx, CorpusError> {
        self.trope_ids
            .get(id)
            .copied()
            .ok_or_else(|| CorpusError::NotFound { kind: EntityKind::Trope, id: id.to_owned() })
    }

    pub fn index_ix(&self, id: &str) -> Result<IndexIx, CorpusError> {
        self.index_ids
            .get(id)
            .copied()
            .ok_or_else(|| CorpusError::NotFound { kind: EntityKind::Index, id: id.to_owned() })
    }

    pub fn movie_ix(&self, id: &str) -> Result<MovieIx, CorpusError> {
        self.movie_ids
            .get(id)
            .copied()
            .ok_or_else(|| CorpusError::NotFound { kind: EntityKind::Movie, id: id.to_owned() })
    }

    /// Counts plus mean description tropes, indexes and occurrences per trope.
    pub fn stats(&self) -> StatsSummary {
        let n = self.tropes.len();
        let mean = |f: fn(&Trope) -> usize| {
            if n == 0 {
                0.0
            } else {
                self.tropes.iter().map(f).sum::<usize>() as f64 / n as f64
            }
        };
        StatsSummary {
            tropes: n,
            indexes: self.indexes.len(),
            movies: self.movies.len(),
            mean_description_tropes: mean(|t| t.description_tropes.len()),
            mean_indexes: mean(|t| t.indexes.len()),
            mean_occurrences: mean(|t| t.occurrences.len()),
        }
    }

    /// Members of the index sharing `trope`'s id; empty when the trope is not an index.
    pub fn sub_tropes(&self, trope: &str) -> Result<Vec<TropeIx>, CorpusError> {
        self.trope_ix(trope)?;
        Ok(self
            .index_ids
            .get(trope)
            .map(|&i| self.index(i).members.clone())
            .unwrap_or_default())
    }

    /// Exhaustively checks the bidirectional and uniqueness invariants.
    pub fn check_integrity(&self) -> Result<(), CorpusError> {
        let bad = |msg: String| Err(CorpusError::Inconsistent(msg));
        for (i, index) in self.indexes.iter().enumerate() {
            if index.members.is_empty() {
                return bad(format!("index {} has no members", index.id));
            }
            for &m in &index.members {
                if !self.trope(m).indexes.contains(&IndexIx(i as u32)) {
                    return bad(format!("{} lists {} as member", index.id, self.trope(m).id));
                }
            }
        }
        for (m, movie) in self.movies.iter().enumerate() {
            for &t in &movie.tropes {
                if self.trope(t).occurrence_in(MovieIx(m as u32)).is_none() {
                    return bad(format!("{} lists {} without occurrence", movie.id, self.trope(t).id));
                }
            }
        }
        for (t, trope) in self.tropes.iter().enumerate() {
            let me = TropeIx(t as u32);
            if trope.description_tropes.contains(&me) {
                return bad(format!("{} describes itself", trope.id));
            }
            if unique_count(&trope.description_tropes) != trope.description_tropes.len()
                || unique_count(&trope.indexes) != trope.indexes.len()
            {
                return bad(format!("{} has duplicate links", trope.id));
            }
            for &i in &trope.indexes {
                let index = self.index(i);
                if index.trope == Some(me) {
                    return bad(format!("{} is its own index", trope.id));
                }
                if index.members.binary_search(&me).is_err() {
                    return bad(format!("{} missing from index {}", trope.id, index.id));
                }
            }
            let movies: Vec<MovieIx> = trope.occurrences.iter().map(|o| o.movie).collect();
            if unique_count(&movies) != movies.len() {
                return bad(format!("{} has duplicate occurrences", trope.id));
            }
            for m in movies {
                if self.movie(m).tropes.binary_search(&me).is_err() {
                    return bad(format!("{} missing from movie {}", trope.id, self.movie(m).id));
                }
            }
        }
        Ok(())
    }
}

fn unique_count<T: Eq + std::hash::Hash>(items: &[T]) -> usize {
    items.iter().collect::<HashSet<_>>().len()
}

fn check_id(kind: EntityKind, id: &str) -> Result<(), CorpusError> {
    if is_valid_id(id) {
        Ok(())
    } else {
        Err(CorpusError::InvalidId { kind, id: id.to_owned() })
    }
}
