// Suggest tropes for one or more input tropes at each breadth.
//
// cargo run --example suggest_tropes

use talestream::{load_dataset, Breadth, Engine, SuggestionQuery};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/micro10.jsonl");

pub fn run_example() -> anyhow::Result<()> {
    let (corpus, _) = load_dataset(DATA, true)?;
    let engine = Engine::new(corpus);

    for breadth in [Breadth::Index, Breadth::Mixed, Breadth::Cooccurrence] {
        let query = SuggestionQuery {
            breadth,
            count: 3,
            temperature: 0.0,
            ..SuggestionQuery::for_tropes(["ViceCity"])
        };
        let outcome = engine.suggest(&query)?;
        let names: Vec<&str> = outcome.suggestions.iter().map(|s| s.name.as_str()).collect();
        println!("breadth {}: {names:?}", u8::from(breadth));
    }

    let query = SuggestionQuery { seed: Some(7), count: 4, ..SuggestionQuery::for_tropes(["TheHeist", "NightOfTerror"]) };
    let outcome = engine.suggest(&query)?;
    for s in &outcome.suggestions {
        println!("{:.4}  {}: {}", s.final_score, s.name, s.laconic);
        for e in &s.evidence {
            println!("        {} ({}): {}", e.title, e.movie, e.text);
        }
    }
    let again = engine.suggest(&query)?;
    anyhow::ensure!(again == outcome, "a fixed seed reproduces the suggestions");
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
