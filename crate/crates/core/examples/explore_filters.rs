// Restrict suggestions with index and movie filters, and browse trope and
// movie details the way the explore views do.
//
// cargo run --example explore_filters

use talestream::server::{movie_detail, trope_detail};
use talestream::{load_dataset, Engine, SuggestError, SuggestionQuery};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/micro10.jsonl");

pub fn run_example() -> anyhow::Result<()> {
    let (corpus, _) = load_dataset(DATA, true)?;
    let engine = Engine::new(corpus);

    let query = SuggestionQuery {
        index_filters: vec!["Settings-like".into()],
        temperature: 0.0,
        ..SuggestionQuery::for_tropes(["TheHeist"])
    };
    for s in engine.suggest(&query)?.suggestions {
        println!("setting: {}", s.name);
    }

    let query = SuggestionQuery {
        movie_filters: vec!["M5".into()],
        temperature: 0.0,
        ..SuggestionQuery::for_tropes(["ByronicHero"])
    };
    for s in engine.suggest(&query)?.suggestions {
        println!("in Castle of Wolves: {}", s.name);
    }

    let impossible = SuggestionQuery {
        index_filters: vec!["NightTropes".into()],
        movie_filters: vec!["M2".into()],
        ..SuggestionQuery::for_tropes(["TheHeist"])
    };
    match engine.suggest(&impossible) {
        Err(e @ SuggestError::EmptyCandidateSet) => println!("no candidates: {}", e.code()),
        other => anyhow::bail!("expected an empty candidate set, got {other:?}"),
    }

    let corpus = engine.corpus();
    let night = corpus.index_ix("NightTropes")?;
    let heist = trope_detail(corpus, "TheHeist", &[night])?;
    for o in &heist.occurrences {
        println!("TheHeist in a night movie: {} ({})", o.title, o.text);
    }
    let movie = movie_detail(corpus, "M6", &[night])?;
    for t in &movie.tropes {
        println!("{} night trope: {}", movie.title, t.name);
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
