// The temperature transform and seeded weighted sampling, on plain scores.
//
// cargo run --example temperature_sampling

use talestream::suggest::{apply_temperature, sample_suggestions, top_k};

pub fn run_example() -> anyhow::Result<()> {
    let scores = [("a", 0.8), ("b", 0.6), ("c", 0.6), ("d", 0.3), ("e", 0.1)];

    for theta in [0.02, 0.5, 1.0, 5.0] {
        let ranked = apply_temperature(&scores, theta)?;
        let finals: Vec<String> = ranked.iter().map(|r| format!("{}={:.3}", r.key, r.final_score)).collect();
        println!("theta {theta}: {}", finals.join(" "));
        anyhow::ensure!(ranked[0].final_score == ranked[0].raw);
    }

    let ranked = apply_temperature(&scores, 1.0)?;
    for seed in 0..3 {
        let picks: Vec<&str> = sample_suggestions(&ranked, 3, seed)?.iter().map(|r| r.key).collect();
        println!("seed {seed}: {picks:?}");
    }

    let best: Vec<&str> = top_k(&scores, 3).iter().map(|r| r.key).collect();
    println!("deterministic top 3: {best:?}");
    anyhow::ensure!(best == ["a", "b", "c"]);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
