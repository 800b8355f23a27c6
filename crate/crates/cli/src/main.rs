mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use apnforge::estimate::{as_f64, mle_class_count, overlap_class_count, SampleStats};
use apnforge::io::{self, Item};
use apnforge::search::{
    bent_pipeline, enumerate_bent_spaces, input_pipeline, BentPipelineOptions, DedupKey,
    SearchBudget, SelectionPredicate,
};
use apnforge::store::{DedupStore, Provenance};
use apnforge::vecfun::{
    comp_space, differential_uniformity, find_bent_subspace, is_apn_alpha, is_apn_flat,
    j2_signature, profile, BSPair, VectorialFunction,
};
use apnforge::Error;
use clap::{Args, Parser, Subcommand};

use config::Config;

#[derive(Parser)]
#[command(
    name = "apnforge",
    version,
    about = "Construct and classify quadratic APN functions"
)]
struct Cli {
    /// TOML file with default budgets, worker count and selection predicate.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: APNFORGE_WORKERS, then all cores).
    #[arg(long, global = true, env = "APNFORGE_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate quadratic (n, m)-bent spaces up to equivalence.
    GenBent {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extend bent spaces to APN functions along a profile.
    ExtendBent {
        #[arg(long)]
        seeds: PathBuf,
        /// BS pairs by dimension, e.g. "[(0,0),(1,1),(3,3)]"; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        profile: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Optional function database to add the new classes to.
        #[arg(long)]
        db: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Lift classified (n_start, m)-functions to (m, m)-APN functions.
    ExtendInput {
        #[arg(long)]
        n_start: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        attempts: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        max_results: Option<usize>,
        #[arg(long)]
        time_limit_secs: Option<u64>,
    },
    /// Print invariants of every function in a file.
    Invariants {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated subset of od, j2, profile.
        #[arg(long, default_value = "od,j2,profile")]
        which: String,
        /// Profile length (default: dimension of the component space).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run the three APN tests on every function.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Add functions to a database, one record per ortho-derivative class.
    Dedup {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        db: PathBuf,
    },
    /// Class-count estimators.
    Estimate {
        #[command(subcommand)]
        which: EstimateCommand,
    },
    /// Search each space for a bent subspace of the given dimension.
    FindBentSubspace {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dim: usize,
    },
}

#[derive(Subcommand)]
enum EstimateCommand {
    /// Maximum-likelihood class count from t samples with l distinct labels.
    Mle {
        #[arg(long)]
        t: u64,
        #[arg(long)]
        l: u64,
    },
    /// t M / (t - t').
    Overlap {
        #[arg(long)]
        t: u64,
        #[arg(long)]
        tprime: u64,
        #[arg(long = "M")]
        m: u64,
    },
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    max_results: Option<usize>,
    #[arg(long)]
    time_limit_secs: Option<u64>,
    /// all or half.
    #[arg(long)]
    selection: Option<String>,
    /// j2, exact or none.
    #[arg(long)]
    dedup: Option<String>,
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => Config::default(),
    };
    if let Some(w) = cli.workers.or(config.workers) {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global();
    }
    match run(cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn resolve_seed(flag: Option<u64>, config: &Config) -> u64 {
    flag.or(config.seed).unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

fn write_out(path: &Path, text: &str) -> Outcome {
    io::write_file(path, text).map_err(Failure::from)
}

fn parse_profile(s: &str) -> Result<Vec<BSPair>, Failure> {
    let nums: Vec<u64> = s
        .split(|c: char| !c.is_ascii_digit())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Failure::Validation(format!("bad number {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    if nums.len() % 2 == 1 {
        return Err(Failure::Validation(format!(
            "profile {s:?} has an odd number of entries"
        )));
    }
    Ok(nums.chunks(2).map(|p| BSPair::new(p[0], p[1])).collect())
}

fn read_functions(path: &Path) -> Result<Vec<VectorialFunction>, Failure> {
    Ok(io::read_file(path)?
        .into_iter()
        .map(Item::into_function)
        .collect::<Result<Vec<_>, _>>()?)
}

fn run(command: Command, config: &Config) -> Outcome {
    match command {
        Command::GenBent { n, m, out } => {
            let reps = enumerate_bent_spaces(n, m)?;
            write_out(&out, &io::write_quad_bases(&reps))?;
            println!(
                "{} class(es) of quadratic ({n}, {m})-bent spaces",
                reps.len()
            );
        }
        Command::ExtendBent {
            seeds,
            profile,
            out,
            seed,
            checkpoint,
            db,
            budget,
        } => {
            let spaces = io::read_file(&seeds)?
                .into_iter()
                .map(Item::into_space)
                .collect::<Result<Vec<_>, _>>()?;
            let target = parse_profile(&profile)?;
            let search_budget = SearchBudget {
                seed: resolve_seed(seed, config),
                attempts: config.attempts.unwrap_or(256),
                max_results: budget.max_results.or(config.max_results),
                time_limit: budget
                    .time_limit_secs
                    .or(config.time_limit_secs)
                    .map(Duration::from_secs),
            };
            let options = BentPipelineOptions {
                dedup: match budget.dedup.as_deref().or(config.dedup.as_deref()) {
                    Some(s) => s.parse()?,
                    None => DedupKey::J2,
                },
                selection: match budget.selection.as_deref().or(config.selection.as_deref()) {
                    Some(s) => s.parse()?,
                    None => SelectionPredicate::All,
                },
                checkpoint,
            };
            let store = match &db {
                Some(path) => DedupStore::load(path)?,
                None => DedupStore::new(),
            };
            let report = bent_pipeline(&spaces, &target, &search_budget, &options, &store)?;
            write_out(&out, &io::write_value_tables(&report.emitted))?;
            if let Some(path) = &db {
                store.save(path)?;
            }
            for (dim, count) in &report.levels {
                println!("dimension {dim}: {count} space(s)");
            }
            println!(
                "{} APN space(s), {} new class(es){}",
                report.apn_spaces,
                report.emitted.len(),
                if report.complete {
                    ""
                } else {
                    " (stopped by budget)"
                }
            );
        }
        Command::ExtendInput {
            n_start,
            m,
            attempts,
            out,
            seed,
            db,
            max_results,
            time_limit_secs,
        } => {
            let budget = SearchBudget {
                seed: resolve_seed(seed, config),
                attempts: attempts.or(config.attempts).unwrap_or(256),
                max_results: max_results.or(config.max_results),
                time_limit: time_limit_secs
                    .or(config.time_limit_secs)
                    .map(Duration::from_secs),
            };
            let store = match &db {
                Some(path) => DedupStore::load(path)?,
                None => DedupStore::new(),
            };
            let report = input_pipeline(n_start, m, &budget, &store)?;
            write_out(&out, &io::write_value_tables(&report.emitted))?;
            if let Some(path) = &db {
                store.save(path)?;
            }
            for (n, c) in &report.classified {
                println!("({n}, {m}): {c} class(es)");
            }
            for (n, c) in &report.random_levels {
                println!("({n}, {m}): {c} random lift(s)");
            }
            println!("{} new class(es)", report.emitted.len());
        }
        Command::Invariants { input, which, k } => {
            let wanted: Vec<&str> = which.split(',').map(str::trim).collect();
            for w in &wanted {
                if !["od", "j2", "profile"].contains(w) {
                    return Err(Failure::Validation(format!("unknown invariant {w:?}")));
                }
            }
            for (i, item) in io::read_file(&input)?.into_iter().enumerate() {
                let (space, function) = match item {
                    Item::Table(f) => (comp_space(&f)?, Some(f)),
                    Item::Space(s) => (s, None),
                };
                let mut line = format!("{i}");
                for w in &wanted {
                    match *w {
                        "od" => {
                            let f = match &function {
                                Some(f) => f.clone(),
                                None => space.to_function()?,
                            };
                            let sig = apnforge::orthoderiv::od_signature(&f)?;
                            line.push_str(&format!(
                                " od={} od_signature={}",
                                sig.label(),
                                sig.canonical_string()
                            ));
                        }
                        "j2" => {
                            line.push_str(&format!(
                                " j2={}",
                                j2_signature(&space).canonical_string()
                            ));
                        }
                        _ => {
                            let p = profile(&space, k.unwrap_or(space.dim()))?;
                            line.push_str(&format!(" profile={}", p.to_string().replace(' ', "")));
                        }
                    }
                }
                println!("{line}");
            }
        }
        Command::Verify { input } => {
            let mut failed = 0;
            for (i, f) in read_functions(&input)?.into_iter().enumerate() {
                let by_delta = differential_uniformity(&f) == 2;
                let by_alpha = is_apn_alpha(&f)?;
                let by_flat = match comp_space(&f) {
                    Ok(s) if s.dim() == f.n() || !by_delta => Some(is_apn_flat(&s)?),
                    Ok(_) => Some(false),
                    Err(Error::NotQuadratic(_)) => None,
                    // degenerate component space: not APN
                    Err(_) => Some(false),
                };
                let agree = by_flat.is_none_or(|b| b == by_delta) && by_alpha == by_delta;
                let flat = by_flat.map_or("n/a".to_string(), |b| b.to_string());
                println!("{i} delta2={by_delta} alpha={by_alpha} flat={flat}");
                if !agree {
                    eprintln!("{i}: APN tests disagree");
                    failed += 1;
                } else if !by_delta {
                    failed += 1;
                }
            }
            if failed > 0 {
                return Err(Failure::Validation(format!(
                    "{failed} function(s) failed verification"
                )));
            }
        }
        Command::Dedup { input, db } => {
            let store = DedupStore::load(&db)?;
            let before = store.len();
            let mut added = 0;
            for f in read_functions(&input)? {
                if store.insert(&f, Provenance::imported())? {
                    added += 1;
                }
            }
            store.save(&db)?;
            println!(
                "{added} new class(es); {} total ({before} before)",
                store.len()
            );
        }
        Command::Estimate { which } => match which {
            EstimateCommand::Mle { t, l } => {
                println!("{}", mle_class_count(&SampleStats::new(t, l))?);
            }
            EstimateCommand::Overlap { t, tprime, m } => {
                let e = overlap_class_count(&SampleStats::with_overlap(t, tprime, m))?;
                println!(
                    "{} ({}/{} = {:.3})",
                    e.nearest,
                    e.exact.numer(),
                    e.exact.denom(),
                    as_f64(&e.exact)
                );
            }
        },
        Command::FindBentSubspace { input, dim } => {
            for (i, item) in io::read_file(&input)?.into_iter().enumerate() {
                let space = item.into_space()?;
                match find_bent_subspace(&space, dim)? {
                    Some(b) => print!("{}", io::write_quad_bases(&[b])),
                    None => println!("# {i}: no bent subspace of dimension {dim}"),
                }
            }
        }
    }
    Ok(())
}
