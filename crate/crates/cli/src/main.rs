//! `coderel`: simulate rating studies, estimate coder reliability, run
//! accuracy sweeps and explore the two-category indeterminacy region.
//!
//! Exit status is 0 on success, 2 on usage errors (bad flags, unreadable
//! files, schema violations) and 1 when a computation fails.

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coderel::coincidence::empirical_stats;
use coderel::estimators::{beta_p_known, beta_tau_known, default_eps, estimate, indeterminacy_region};
use coderel::harness::sweep;
use coderel::model::{sample_ratings, CategorySet, RatingsMatrix};
use coderel::refine::{refine, RefineOptions};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "coderel", version, about = "Coder reliability under the mixture coder model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a ratings matrix from the model in a config file
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate reliability from a ratings CSV
    Estimate {
        #[arg(long)]
        ratings: PathBuf,
        /// Known true-category frequencies, comma-separated
        #[arg(long, value_delimiter = ',', conflicts_with = "p")]
        tau: Option<Vec<f64>>,
        /// Known a-priori distribution, comma-separated
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        /// Category labels in order, comma-separated (default: order of appearance)
        #[arg(long, value_delimiter = ',')]
        categories: Option<Vec<String>>,
        /// Report the closed-form estimate without least-squares refinement
        #[arg(long)]
        no_refine: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte-Carlo accuracy sweep
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-category indeterminacy region for given (β, τ, e1)
    Region {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        e1: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<coderel::Error> for Failure {
    fn from(e: coderel::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn open(path: &Path, what: &str) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Usage(format!("cannot read {what} {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), Failure> {
    w.flush()
        .map_err(|e| Failure::Compute(format!("writing {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = RunConfig::load(&config).map_err(Failure::Usage)?;
            let model = cfg.model().map_err(usage)?;
            if cfg.raters < 1 {
                return Err(Failure::Usage("raters must be >= 1".into()));
            }
            let ratings = sample_ratings(&model, cfg.raters, cfg.seed);
            let mut w = create(&out)?;
            ratings.write_csv(&mut w)?;
            finish(w, &out)
        }
        Command::Estimate {
            ratings,
            tau,
            p,
            categories,
            no_refine,
            out,
        } => {
            let cats = categories.map(CategorySet::new).transpose().map_err(usage)?;
            let matrix = RatingsMatrix::read_csv(open(&ratings, "ratings")?, cats.as_ref())
                .map_err(|e| Failure::Usage(format!("invalid ratings {}: {e}", ratings.display())))?;
            let stats = empirical_stats(&matrix)?;
            let result = match (tau, p) {
                (Some(t), _) => beta_tau_known(&stats, &t)?,
                (_, Some(p)) => beta_p_known(&stats, &p)?,
                (None, None) => {
                    let start = estimate(&stats, default_eps(&stats))?;
                    if no_refine {
                        start
                    } else {
                        refine(&stats, &start, &RefineOptions::default())?
                    }
                }
            };
            for d in &result.diagnostics {
                eprintln!("note: {d}");
            }
            let mut w = create(&out)?;
            writeln!(w, "{}", result.to_record()).map_err(|e| Failure::Compute(e.to_string()))?;
            finish(w, &out)
        }
        Command::Sweep { config, out } => {
            let cfg = RunConfig::load(&config).map_err(Failure::Usage)?;
            let sweep_cfg = cfg.sweep_config().map_err(Failure::Usage)?.map_err(usage)?;
            sweep_cfg.validate().map_err(usage)?;
            let report = sweep(&sweep_cfg)?;
            for row in report.rows.iter().filter(|r| r.flagged) {
                eprintln!(
                    "warning: {} of {} replications failed at {}={}",
                    row.n_fail,
                    row.n_fail + row.n_success,
                    report.axis.as_str(),
                    row.sweep_value
                );
            }
            let mut w = create(&out)?;
            report.write_csv(&mut w)?;
            finish(w, &out)
        }
        Command::Region {
            beta,
            tau,
            e1,
            n,
            out,
        } => {
            if !(0.0..=1.0).contains(&beta) || !(0.0..=1.0).contains(&tau) || !(e1 > 0.0 && e1 <= 1.0) || n < 2 {
                return Err(Failure::Usage(
                    "need beta, tau in [0,1], e1 in (0,1] and n >= 2".into(),
                ));
            }
            let region = indeterminacy_region(beta, tau, e1, n);
            let mut w = create(&out)?;
            let io = |e: std::io::Error| Failure::Compute(e.to_string());
            writeln!(w, "kind,n,lo,hi").map_err(io)?;
            for iv in &region.intervals {
                writeln!(w, "interval,,{},{}", iv.lo, iv.hi).map_err(io)?;
            }
            for alt in &region.admissible {
                writeln!(w, "alternative,{},{},{}", alt.n, alt.beta, alt.beta).map_err(io)?;
            }
            finish(w, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
