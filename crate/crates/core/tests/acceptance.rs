//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Set `TALESTREAM_REAL_DUMP` to a canonical dataset converted from the real
//! wiki extraction to run the dataset check; it is skipped otherwise.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use talestream::corpus::CorpusError;
use talestream::evalkit::{bootstrap_ci, overlap_campaign};
use talestream::ingest::{canonical_bytes, read_dataset, IngestError};
use talestream::suggest::{apply_temperature, sample_suggestions, RankedScore};
use talestream::{generate_fixture, Breadth, Corpus, Engine, SuggestionQuery};

const TOL: f64 = 1e-9;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tfidf_oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let engine = common::micro10_engine();
    let exp = common::expected();
    let c = engine.corpus();
    let mut checked = 0;
    for a in c.trope_keys() {
        for b in c.trope_keys() {
            let (ia, ib) = (&c.trope(a).id, &c.trope(b).id);
            for (space, got) in [
                ("index", engine.index_similarity(a, b)),
                ("movie", engine.movie_similarity(a, b)),
                ("text", engine.text_similarity(a, b)),
            ] {
                let got = got.map_err(|e| e.to_string())?;
                let want = exp["spaces"][space]["similarity"][ia][ib].as_f64().ok_or("missing oracle value")?;
                ensure((got - want).abs() <= TOL, || format!("{space} {ia}/{ib}: {got} vs {want}"))?;
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} similarities within {TOL:e}, {elapsed:.2?}"))
}

fn formula_equivalence() -> Result<String, String> {
    let engine = common::micro10_engine();
    let exp = common::expected();
    let c = engine.corpus();
    let mut checked = 0;
    for set in exp["index_score"].as_object().ok_or("missing oracle table")?.keys() {
        let inputs: Vec<_> = set.split(',').map(|id| c.trope_ix(id).unwrap()).collect();
        for t in c.trope_keys() {
            let id = &c.trope(t).id;
            let ind = engine.index_score(&inputs, t).map_err(|e| e.to_string())?;
            let co = engine.cooccurrence_score_multi(&inputs, t).map_err(|e| e.to_string())?;
            let want_ind = exp["index_score"][set][id].as_f64().unwrap();
            let want_co = exp["cooccurrence_score"][set][id].as_f64().unwrap();
            ensure((ind - want_ind).abs() <= TOL, || format!("index_score {set} {id}"))?;
            ensure((co - want_co).abs() <= TOL, || format!("cooccurrence_score {set} {id}"))?;
            checked += 2;
        }
        for (b, breadth) in [("1", Breadth::Index), ("2", Breadth::Mixed), ("3", Breadth::Cooccurrence)] {
            let query = SuggestionQuery {
                input_tropes: set.split(',').map(String::from).collect(),
                breadth,
                seed: Some(0),
                ..Default::default()
            };
            let resolved = engine.resolve(&query).map_err(|e| e.to_string())?;
            for (t, s) in engine.combined_raw_scores(&resolved).map_err(|e| e.to_string())? {
                let id = &c.trope(t).id;
                let want = exp["combined_raw"][b][set][id].as_f64().unwrap();
                ensure((s - want).abs() <= TOL, || format!("combined_raw b{b} {set} {id}: {s} vs {want}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (input, candidate) values within {TOL:e}"))
}

fn temperature_and_sampling() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..1000 {
        let n = rng.random_range(1..=200usize);
        let theta = rng.random_range(0.1..=5.0);
        let scores: Vec<(u32, f64)> = (0..n as u32).map(|k| (k, 1.0 - rng.random::<f64>())).collect();
        let ranked = apply_temperature(&scores, theta).map_err(|e| e.to_string())?;
        let mut by_raw: Vec<u32> = (0..n as u32).collect();
        by_raw.sort_by(|&a, &b| scores[b as usize].1.total_cmp(&scores[a as usize].1).then(a.cmp(&b)));
        let mut by_final: Vec<&RankedScore<u32>> = ranked.iter().collect();
        by_final.sort_by(|a, b| b.final_score.total_cmp(&a.final_score).then(a.key.cmp(&b.key)));
        let by_final: Vec<u32> = by_final.iter().map(|r| r.key).collect();
        ensure(by_raw == by_final, || format!("argsort differs on vector {trial}"))?;
        ensure(ranked[0].final_score == ranked[0].raw, || format!("rank-0 multiplier not 1 on vector {trial}"))?;
    }

    let two = apply_temperature(&[(0u8, 0.9), (1u8, 0.1)], 1.0).map_err(|e| e.to_string())?;
    let fixed: Vec<RankedScore<u8>> = two
        .iter()
        .map(|r| RankedScore { final_score: r.raw, ..*r })
        .collect();
    let draws = 100_000u64;
    let mut first = 0u64;
    for seed in 0..draws {
        if sample_suggestions(&fixed, 1, seed).map_err(|e| e.to_string())?[0].key == 0 {
            first += 1;
        }
    }
    let share = first as f64 / draws as f64;
    ensure((share - 0.9).abs() <= 0.01, || format!("Monte Carlo share {share:.4}"))?;

    let engine = Engine::new(generate_fixture(200, 30, 50, 42));
    let corpus = engine.corpus();
    let mut identical = 0;
    for trial in 0..100u64 {
        let mut pick = ChaCha8Rng::seed_from_u64(trial);
        let input = corpus.trope(talestream::TropeIx(pick.random_range(0..corpus.trope_count() as u32))).id.clone();
        let query = SuggestionQuery {
            breadth: [Breadth::Index, Breadth::Mixed, Breadth::Cooccurrence][trial as usize % 3],
            temperature: 0.5,
            seed: Some(trial),
            ..SuggestionQuery::for_tropes([input])
        };
        let a = engine.suggest(&query);
        let b = engine.suggest(&query);
        if format!("{a:?}") == format!("{b:?}") {
            identical += 1;
        }
    }
    ensure(identical == 100, || format!("{identical}/100 seeded repeats identical"))?;
    Ok(format!("argsort 1000/1000, rank-0 exact, Monte Carlo {:.2}%, determinism 100/100", share * 100.0))
}

fn method_distinctness() -> Result<String, String> {
    let engine = Engine::new(generate_fixture(200, 30, 50, 42));
    let campaign =
        overlap_campaign(&engine, 36, 5, 42, Breadth::Index, Breadth::Cooccurrence).map_err(|e| e.to_string())?;
    ensure(campaign.inputs.len() == 36, || "campaign did not cover 36 inputs".into())?;
    ensure(campaign.mean_overlap < 2.5, || format!("mean overlap {:.3}", campaign.mean_overlap))?;
    ensure(campaign.distinct_fraction >= 0.8, || format!("distinct on {:.1}%", campaign.distinct_fraction * 100.0))?;
    Ok(format!(
        "mean overlap {:.3} of 5, lists differ on {:.1}% of 36 inputs",
        campaign.mean_overlap,
        campaign.distinct_fraction * 100.0
    ))
}

fn bootstrap_coverage() -> Result<String, String> {
    let start = Instant::now();
    let normal = Normal::new(5.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 500;
    let mut covered = 0;
    for trial in 0..trials {
        let values: Vec<f64> = (0..36).map(|_| normal.sample(&mut rng)).collect();
        let ci = bootstrap_ci(&values, 1000, 0.95, trial).map_err(|e| e.to_string())?;
        if ci.ci_low <= 5.0 && 5.0 <= ci.ci_high {
            covered += 1;
        }
    }
    let coverage = covered as f64 / trials as f64;
    let elapsed = start.elapsed();
    ensure((0.93..=0.97).contains(&coverage), || format!("coverage {:.1}%", coverage * 100.0))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("coverage {:.1}% over {trials} trials, {elapsed:.2?}", coverage * 100.0))
}

fn load_bytes(bytes: &[u8], strict: bool) -> Result<Corpus, IngestError> {
    read_dataset(bytes, strict).map(|(c, _)| c)
}

fn round_trip(name: &str, first: &Corpus) -> Result<(), String> {
    let bytes = canonical_bytes(first);
    let second = load_bytes(&bytes, true).map_err(|e| format!("{name}: {e}"))?;
    ensure(&second == first, || format!("{name}: reloaded corpus differs"))?;
    ensure(canonical_bytes(&second) == bytes, || format!("{name}: canonical bytes differ"))
}

fn ingest_fixpoint_and_strict() -> Result<String, String> {
    round_trip("micro10", &common::micro10())?;
    let fixture = generate_fixture(200, 30, 50, 42);
    let reloaded = load_bytes(&canonical_bytes(&fixture), true).map_err(|e| e.to_string())?;
    round_trip("fixture", &reloaded)?;

    let clean = std::fs::read_to_string(common::data_path("micro10.jsonl")).unwrap();
    let drop_line = |prefix: &str| -> String {
        clean.lines().filter(|l| !l.starts_with(prefix)).map(|l| format!("{l}\n")).collect()
    };
    let variants = [
        ("unknown description trope", clean.replacen(r#""description_tropes":["TheHeist","ViceCity"]"#, r#""description_tropes":["TheHeist","Atlantis"]"#, 1)),
        ("unknown occurrence movie", clean.replacen(r#"{"movie":"M2","text":"A heist"#, r#"{"movie":"M99","text":"A heist"#, 1)),
        ("missing movie record", drop_line(r#"{"kind":"movie","id":"M4""#)),
        ("missing trope record", drop_line(r#"{"kind":"trope","id":"TheHeist""#)),
        ("case-mismatched reference", clean.replacen(r#""description_tropes":["ViceCity"]"#, r#""description_tropes":["viceCity"]"#, 1)),
    ];
    for (label, text) in &variants {
        ensure(text != &clean, || format!("variant `{label}` did not change the input"))?;
        match load_bytes(text.as_bytes(), true) {
            Err(IngestError::Corpus(CorpusError::ReferentialIntegrity(_))) => {}
            other => return Err(format!("variant `{label}`: expected a dangling reference, got {other:?}")),
        }
        ensure(load_bytes(text.as_bytes(), false).is_ok(), || format!("variant `{label}` fails in lenient mode"))?;
    }
    Ok(format!("fixpoint on micro10 and the 200-trope fixture, {}/5 corrupted variants rejected", variants.len()))
}

fn p95(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    samples[(samples.len() * 95).div_ceil(100) - 1]
}

fn performance() -> Result<String, String> {
    let corpus = generate_fixture(24_000, 2_000, 15_000, 7);
    let start = Instant::now();
    let engine = Engine::new(corpus);
    let build = start.elapsed();
    ensure(build < Duration::from_secs(60), || format!("build took {build:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = engine.corpus().trope_count() as u32;
    let mut latencies = Vec::with_capacity(100);
    for q in 0..100u64 {
        let input = engine.corpus().trope(talestream::TropeIx(rng.random_range(0..n))).id.clone();
        let query = SuggestionQuery { breadth: Breadth::Mixed, seed: Some(q), ..SuggestionQuery::for_tropes([input]) };
        let t = Instant::now();
        let outcome = engine.suggest(&query);
        latencies.push(t.elapsed());
        match outcome {
            Ok(_) | Err(talestream::SuggestError::AllZeroScores) => {}
            Err(e) => return Err(format!("query {q}: {e}")),
        }
    }
    let p95 = p95(latencies);
    ensure(p95 < Duration::from_millis(200), || format!("breadth-2 p95 {p95:?}"))?;
    Ok(format!("build {build:.2?}, breadth-2 p95 {p95:.2?} over 100 queries"))
}

const REFERENCE_COUNTS: (usize, usize, usize) = (23_665, 1_988, 15_304);
const REFERENCE_MEANS: (f64, f64, f64) = (13.1, 4.2, 26.2);
const VICE_CITY_INDEX_TOP5: [&str; 5] = ["Wretched Hive", "City Noir", "The Big Rotten Apple", "The City", "Crapsaccharine World"];

fn real_dump() -> Outcome {
    let Ok(path) = std::env::var("TALESTREAM_REAL_DUMP") else {
        return Outcome::Skip("TALESTREAM_REAL_DUMP not set".into());
    };
    let run = || -> Result<String, String> {
        let (corpus, _) = talestream::load_dataset(&path, false).map_err(|e| e.to_string())?;
        let s = corpus.stats();
        ensure((s.tropes, s.indexes, s.movies) == REFERENCE_COUNTS, || {
            format!("counts {}/{}/{}", s.tropes, s.indexes, s.movies)
        })?;
        for (label, got, want) in [
            ("description tropes", s.mean_description_tropes, REFERENCE_MEANS.0),
            ("indexes", s.mean_indexes, REFERENCE_MEANS.1),
            ("occurrences", s.mean_occurrences, REFERENCE_MEANS.2),
        ] {
            ensure((got - want).abs() <= 0.05, || format!("mean {label} {got:.3}"))?;
        }
        let vice = corpus.tropes().iter().find(|t| t.name == "Vice City").ok_or("no trope named Vice City")?.id.clone();
        let engine = Engine::new(corpus);
        let top = talestream::evalkit::deterministic_top_k(&engine, &vice, Breadth::Index, 5).map_err(|e| e.to_string())?;
        let names: Vec<String> = top.iter().map(|id| engine.corpus().trope(engine.corpus().trope_ix(id).unwrap()).name.clone()).collect();
        let got: BTreeSet<&str> = names.iter().map(String::as_str).collect();
        let want: BTreeSet<&str> = VICE_CITY_INDEX_TOP5.into_iter().collect();
        ensure(got == want, || format!("Vice City index top-5 {names:?}"))?;
        let order = if names.iter().map(String::as_str).eq(VICE_CITY_INDEX_TOP5) { "same order" } else { "order differs" };
        Ok(format!("reference counts and means match, Vice City top-5 set matches ({order}: {names:?})"))
    };
    match run() {
        Ok(detail) => Outcome::Pass(detail),
        Err(detail) => Outcome::Fail(detail),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn check(f: fn() -> Result<String, String>) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(detail)) => Outcome::Pass(detail),
        Ok(Err(detail)) => Outcome::Fail(detail),
        Err(_) => Outcome::Fail("panicked".into()),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("tf-idf oracle equivalence", || check(tfidf_oracle_equivalence)),
        ("scoring formula equivalence", || check(formula_equivalence)),
        ("temperature and sampling", || check(temperature_and_sampling)),
        ("method distinctness", || check(method_distinctness)),
        ("bootstrap coverage", || check(bootstrap_coverage)),
        ("ingest fixpoint and strict mode", || check(ingest_fixpoint_and_strict)),
        ("performance at full scale", || check(performance)),
        ("real dump (conditional)", real_dump),
    ];
    let (mut failed, mut skipped) = (0, 0);
    for (name, run) in &criteria {
        match run() {
            Outcome::Pass(detail) => println!("PASS  {name}: {detail}"),
            Outcome::Skip(detail) => {
                skipped += 1;
                println!("SKIP  {name}: {detail}");
            }
            Outcome::Fail(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed, {skipped} skipped", criteria.len() - failed - skipped);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
