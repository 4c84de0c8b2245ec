// Use the TF-IDF vectorizer on its own: documents are term multisets.
//
// cargo run --example tfidf_vectors

use talestream::{TermCorpus, Vectorizer};

pub fn run_example() -> anyhow::Result<()> {
    let docs: Vec<TermCorpus<&str>> = vec![
        ["crime", "crime", "city", "night"].into_iter().collect(),
        ["crime", "city"].into_iter().collect(),
        ["castle", "night", "horror"].into_iter().collect(),
    ];
    let space = Vectorizer::fit(&docs);

    for term in ["crime", "night", "horror"] {
        println!("idf({term}) = {:.4}", space.idf(&term).unwrap_or(0.0));
    }
    for (term, w) in space.weights(0)? {
        println!("doc 0 weight {term}: {w:.4}");
    }
    let sims = space.similarities_to(0)?;
    println!("similarities to doc 0: {sims:.4?}");

    let query: TermCorpus<&str> = ["night", "castle"].into_iter().collect();
    let scores = space.query_similarity(&query);
    println!("query scores: {scores:.4?}");

    anyhow::ensure!((sims[0] - 1.0).abs() < 1e-12);
    anyhow::ensure!(scores[2] > scores[0] && scores[1] == 0.0);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
