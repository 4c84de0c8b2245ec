// Compare the index and co-occurrence methods on a synthetic corpus.
//
// cargo run --example method_overlap

use talestream::evalkit::{overlap_campaign, random_baseline};
use talestream::{generate_fixture, Breadth, Engine};

pub fn run_example() -> anyhow::Result<()> {
    let engine = Engine::new(generate_fixture(200, 30, 50, 42));

    let campaign = overlap_campaign(&engine, 36, 5, 42, Breadth::Index, Breadth::Cooccurrence)?;
    println!(
        "index vs co-occurrence: mean overlap {:.2} of {}, lists differ on {:.0}% of inputs",
        campaign.mean_overlap,
        campaign.k,
        campaign.distinct_fraction * 100.0
    );
    let same = overlap_campaign(&engine, 36, 5, 42, Breadth::Index, Breadth::Index)?;
    println!("index vs itself: mean overlap {:.2}", same.mean_overlap);

    let baseline = random_baseline(engine.corpus(), 5, 1, &[])?;
    let ids: Vec<&str> = baseline.iter().map(|&t| engine.corpus().trope(t).id.as_str()).collect();
    println!("random baseline: {ids:?}");

    anyhow::ensure!(campaign.mean_overlap < same.mean_overlap);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
