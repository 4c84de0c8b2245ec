// Generate a seeded synthetic corpus and write it in canonical form.
//
// cargo run --example synthetic_fixture

use talestream::ingest::fingerprint;
use talestream::{generate_fixture, load_dataset, save_dataset};

pub fn run_example() -> anyhow::Result<()> {
    let corpus = generate_fixture(500, 60, 120, 3);
    let stats = corpus.stats();
    println!(
        "{} tropes, {} indexes, {} movies; means {:.1} / {:.1} / {:.1}",
        stats.tropes,
        stats.indexes,
        stats.movies,
        stats.mean_description_tropes,
        stats.mean_indexes,
        stats.mean_occurrences
    );

    let dir = std::env::temp_dir().join(format!("talestream-fixture-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("fixture.jsonl");
    save_dataset(&corpus, &path)?;
    let (reloaded, _) = load_dataset(&path, true)?;
    println!("wrote {} ({})", path.display(), fingerprint(&reloaded));
    std::fs::remove_dir_all(&dir)?;

    anyhow::ensure!(reloaded == corpus);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
