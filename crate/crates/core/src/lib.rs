//! Trope suggestion engine.
//!
//! Tropes are treated as documents in three TF-IDF spaces: their expanded
//! index memberships, the movies they occur in, and the text describing those
//! occurrences. [`suggest::Engine`] combines the spaces into ranked,
//! temperature-shaped and sampled suggestions with movie evidence;
//! [`evalkit`] carries the evaluation machinery and [`server`] exposes
//! everything over HTTP.

pub mod corpus;
pub mod evalkit;
pub mod ingest;
pub mod server;
pub mod suggest;
pub mod vectorizer;

pub use corpus::{Corpus, CorpusError, LoadReport, StatsSummary, TropeIx};
pub use ingest::{generate_fixture, load_dataset, save_dataset};
pub use suggest::{Breadth, Engine, ScoredTrope, SuggestError, SuggestionOutcome, SuggestionQuery};
pub use vectorizer::{TermCorpus, Vectorizer};
