use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use talestream::evalkit::{self, DEFAULT_FAMILIARITY_THRESHOLD, DEFAULT_ITERATIONS, DEFAULT_LEVEL};
use talestream::server::{self, ServerConfig};
use talestream::suggest::{DEFAULT_COUNT, DEFAULT_TEMPERATURE};
use talestream::{generate_fixture, load_dataset, save_dataset, Breadth, Corpus, Engine, SuggestionQuery};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "talestream", version, about = "Trope suggestions from a trope/movie corpus")]
struct Cli {
    /// Canonical JSON Lines dataset.
    #[arg(long, global = true, env = "TALESTREAM_DATA")]
    data: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset, print the load report and optionally write it canonically.
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fail on dangling references instead of dropping them.
        #[arg(long)]
        strict: bool,
    },
    /// Suggest tropes for input tropes and/or free text.
    Suggest(SuggestArgs),
    /// Offline evaluation tools.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Write a synthetic dataset.
    Fixture {
        #[arg(long, default_value_t = 200)]
        tropes: usize,
        #[arg(long, default_value_t = 30)]
        indexes: usize,
        #[arg(long, default_value_t = 50)]
        movies: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "canvases")]
        canvas_dir: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Seed used when a request does not carry one.
        #[arg(long)]
        seed_default: Option<u64>,
        #[arg(long)]
        cors_origin: Option<String>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SuggestArgs {
    /// Input trope id; repeatable.
    #[arg(long = "trope")]
    tropes: Vec<String>,
    #[arg(long)]
    text: Option<String>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=3))]
    breadth: u8,
    #[arg(long = "index-filter")]
    index_filters: Vec<String>,
    #[arg(long = "movie-filter")]
    movie_filters: Vec<String>,
    #[arg(long = "exclude")]
    exclude: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_COUNT)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
    temperature: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Overlap between two methods' top-k lists over random inputs.
    Overlap {
        #[arg(long, default_value_t = 36)]
        inputs: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        method_a: u8,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
        method_b: u8,
        #[arg(long)]
        json: bool,
    },
    /// Bootstrap confidence intervals from a ratings CSV.
    Bootstrap {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: usize,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_FAMILIARITY_THRESHOLD)]
        threshold: u8,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    User(anyhow::Error),
    Internal(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Internal(e.into())
    }
}

fn user<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::User(e.into())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn data_path(data: &Option<PathBuf>) -> Result<&Path, Failure> {
    data.as_deref().ok_or_else(|| user(anyhow::anyhow!("no dataset given; pass --data or set TALESTREAM_DATA")))
}

fn load(path: &Path, strict: bool) -> Result<Corpus, Failure> {
    let (corpus, _) = load_dataset(path, strict).with_context(|| format!("loading {}", path.display())).map_err(user)?;
    Ok(corpus)
}

fn breadth(v: u8) -> Breadth {
    Breadth::try_from(v).expect("range checked by clap")
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = io::stdout();
    let mut out = BufWriter::new(out.lock());
    match cli.command {
        Command::Ingest { input, out: target, strict } => {
            let (corpus, report) =
                load_dataset(&input, strict).with_context(|| format!("loading {}", input.display())).map_err(user)?;
            if let Some(target) = target {
                save_dataset(&corpus, &target).with_context(|| format!("writing {}", target.display()))?;
            }
            let summary = serde_json::json!({
                "fingerprint": talestream::ingest::fingerprint(&corpus),
                "report": report,
                "stats": corpus.stats(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
        }
        Command::Suggest(args) => {
            let engine = Engine::new(load(data_path(&cli.data)?, false)?);
            let query = SuggestionQuery {
                input_tropes: args.tropes,
                text: args.text,
                breadth: breadth(args.breadth),
                index_filters: args.index_filters,
                movie_filters: args.movie_filters,
                count: args.count,
                temperature: args.temperature,
                seed: args.seed,
                exclude: args.exclude,
            };
            let outcome = engine.suggest(&query).map_err(user)?;
            if args.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&outcome)?)?;
            } else {
                for s in &outcome.suggestions {
                    writeln!(out, "{}\t{:.6}\t{}\t{}: {}", s.rank + 1, s.final_score, s.trope, s.name, s.laconic)?;
                }
                writeln!(out, "seed {}", outcome.query.seed.unwrap_or_default())?;
            }
        }
        Command::Eval(EvalCommand::Overlap { inputs, k, seed, method_a, method_b, json }) => {
            let engine = Engine::new(load(data_path(&cli.data)?, false)?);
            let campaign = evalkit::overlap_campaign(&engine, inputs, k, seed, breadth(method_a), breadth(method_b))
                .map_err(user)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&campaign)?)?;
            } else {
                writeln!(out, "inputs {}", campaign.inputs.len())?;
                writeln!(out, "mean overlap {:.3} of {}", campaign.mean_overlap, campaign.k)?;
                writeln!(out, "distinct {:.1}%", campaign.distinct_fraction * 100.0)?;
            }
        }
        Command::Eval(EvalCommand::Bootstrap { ratings, iterations, level, seed, threshold, json }) => {
            let file = File::open(&ratings).with_context(|| format!("opening {}", ratings.display())).map_err(user)?;
            let samples = evalkit::read_ratings_csv(file).map_err(user)?;
            let report = evalkit::bootstrap_report(&samples, threshold, iterations, level, seed).map_err(user)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(out, "dropped {:.1}% (familiarity below {})", report.dropped_fraction * 100.0, threshold)?;
                for g in &report.groups {
                    writeln!(
                        out,
                        "{}\t{}\tn={}\tmean {:.3}\t[{:.3}, {:.3}]",
                        g.method,
                        g.question.label(),
                        g.inputs,
                        g.ci.mean,
                        g.ci.ci_low,
                        g.ci.ci_high
                    )?;
                }
            }
        }
        Command::Fixture { tropes, indexes, movies, seed, out: target } => {
            if tropes == 0 || indexes == 0 || movies == 0 {
                return Err(user(anyhow::anyhow!("fixture sizes must be positive")));
            }
            let corpus = generate_fixture(tropes, indexes, movies, seed);
            save_dataset(&corpus, &target).with_context(|| format!("writing {}", target.display()))?;
            writeln!(out, "{}", talestream::ingest::fingerprint(&corpus))?;
        }
        Command::Serve { canvas_dir, port, host, seed_default, cors_origin, static_dir } => {
            let config = ServerConfig {
                data: data_path(&cli.data)?.to_path_buf(),
                canvas_dir,
                port,
                host,
                default_seed: seed_default,
                cors_origin,
                static_dir,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(server::serve(config)).map_err(|e| {
                if e.is::<talestream::ingest::IngestError>() || e.is::<std::net::AddrParseError>() {
                    user(e)
                } else {
                    Failure::Internal(e)
                }
            })?;
        }
    }
    out.flush()?;
    Ok(())
}
