// Aggregate Likert ratings from a CSV and bootstrap confidence intervals.
//
// cargo run --example bootstrap_ratings

use talestream::evalkit::{bootstrap_ci, bootstrap_report, question_correlation, read_ratings_csv, Question};

const RATINGS: &str = "\
input_id,method,question,rater_id,rating
ViceCity,index,S1-1,ana,6
ViceCity,index,S2-1,ana,5
ViceCity,cooccurrence,S2-1,ana,3
ViceCity,index,S1-1,ben,2
ViceCity,index,S2-1,ben,7
TheHeist,index,S1-1,ana,7
TheHeist,index,S2-1,ana,6
TheHeist,cooccurrence,S2-1,ana,4
TheHeist,index,S1-1,ben,6
TheHeist,index,S2-1,ben,5
TheHeist,cooccurrence,S2-1,ben,2
CityNoir,index,S1-1,ana,5
CityNoir,index,S2-1,ana,4
CityNoir,cooccurrence,S2-1,ana,5
";

pub fn run_example() -> anyhow::Result<()> {
    let samples = read_ratings_csv(RATINGS.as_bytes())?;
    let report = bootstrap_report(&samples, 5, 1000, 0.95, 1)?;
    println!("dropped {:.0}% of ratings from unfamiliar raters", report.dropped_fraction * 100.0);
    for g in &report.groups {
        println!(
            "{} {}: mean {:.2} [{:.2}, {:.2}] over {} inputs",
            g.method,
            g.question.label(),
            g.ci.mean,
            g.ci.ci_low,
            g.ci.ci_high,
            g.inputs
        );
    }
    if let Some(r) = question_correlation(&samples, Question::S1_1, Question::S2_1) {
        println!("familiarity vs S2-1 correlation: {r:.3}");
    }

    let ci = bootstrap_ci(&[4.0, 5.0, 6.0, 5.5, 4.5, 5.0], 2000, 0.9, 3)?;
    println!("plain values: {:.2} [{:.2}, {:.2}]", ci.mean, ci.ci_low, ci.ci_high);
    anyhow::ensure!(ci.ci_low < ci.ci_high);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
