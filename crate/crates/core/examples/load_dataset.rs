// Load a JSON Lines dataset, inspect the load report and corpus statistics.
//
// cargo run --example load_dataset

use talestream::load_dataset;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/micro10.jsonl");

pub fn run_example() -> anyhow::Result<()> {
    let (corpus, report) = load_dataset(DATA, true)?;
    println!("loaded {} tropes, {} indexes, {} movies", report.tropes, report.indexes, report.movies);

    let stats = corpus.stats();
    println!(
        "per trope: {:.2} description tropes, {:.2} indexes, {:.2} occurrences",
        stats.mean_description_tropes, stats.mean_indexes, stats.mean_occurrences
    );

    let vice = corpus.trope(corpus.trope_ix("ViceCity")?);
    println!("{}: {}", vice.name, vice.laconic);
    for &i in &vice.indexes {
        println!("  in index {}", corpus.index(i).name);
    }
    for sub in corpus.sub_tropes("AntiHeroLike")? {
        println!("  sub-trope of AntiHeroLike: {}", corpus.trope(sub).name);
    }
    anyhow::ensure!(stats.tropes == 10);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
