// Rank tropes against free text, alone or combined with input tropes.
//
// cargo run --example text_search

use talestream::{load_dataset, Engine, SuggestionQuery};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/micro10.jsonl");

pub fn run_example() -> anyhow::Result<()> {
    let (corpus, _) = load_dataset(DATA, true)?;
    let engine = Engine::new(corpus);

    let query = SuggestionQuery { temperature: 0.0, count: 3, ..SuggestionQuery::for_text("a heist at night") };
    let outcome = engine.suggest(&query)?;
    for s in &outcome.suggestions {
        println!("{:.4}  {}", s.raw_score, s.name);
    }
    anyhow::ensure!(outcome.suggestions[0].trope == "TheHeist");

    let mixed = SuggestionQuery {
        text: Some("smugglers in the harbor".into()),
        temperature: 0.0,
        count: 3,
        ..SuggestionQuery::for_tropes(["CityNoir"])
    };
    for s in engine.suggest(&mixed)?.suggestions {
        println!("with CityNoir: {:.4}  {}", s.raw_score, s.name);
    }

    for t in engine.name_search("city", 5) {
        println!("name match: {}", engine.corpus().trope(t).name);
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
