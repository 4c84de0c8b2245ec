#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::Value;
use talestream::{load_dataset, Corpus, Engine};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn micro10() -> Corpus {
    load_dataset(data_path("micro10.jsonl"), true).expect("micro10 loads").0
}

pub fn micro10_engine() -> Engine {
    Engine::new(micro10())
}

/// Frozen output of `tests/oracle/micro10_oracle.py`.
pub fn expected() -> Value {
    let text = std::fs::read_to_string(data_path("micro10_expected.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn ids(corpus: &Corpus, keys: &[talestream::TropeIx]) -> Vec<String> {
    keys.iter().map(|&k| corpus.trope(k).id.clone()).collect()
}

pub fn str_list(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_owned()).collect()
}
