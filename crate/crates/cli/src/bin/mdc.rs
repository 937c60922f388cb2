//! PET profile optimization for a flow vector, and the two-description
//! Gaussian comparison curve.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use jnsc_cli::{load_counts, load_weights, parse_drf, print_json};
use jnsc_core::experiment::{run_ozarow_sweep, write_ozarow_csv};
use jnsc_core::mdc::{optimize_profile, OptimizationProblem};
use jnsc_core::pet::{pet_distortion, PetProfile};

#[derive(Parser)]
#[command(name = "mdc", version, about = "Multiple description code design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Optimize {
        /// Per-sink description counts: a JSON array or `{sink: q}` object.
        #[arg(long)]
        rfv: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        #[arg(long)]
        descriptions: usize,
        /// Per-sink weights in the same shape as `--rfv`.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value = "gaussian")]
        drf: String,
    },
    Ozarow {
        #[arg(long, default_value_t = 0.1)]
        cmin: f64,
        #[arg(long, default_value_t = 3.0)]
        cmax: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Directory for `ozarow.csv`; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Optimize {
            rfv,
            rate,
            descriptions,
            weights,
            drf,
        } => {
            let q = load_counts(&rfv)?;
            let p = match weights {
                Some(path) => load_weights(&path)?,
                None => vec![1.0; q.len()],
            };
            if p.len() != q.len() {
                bail!("{} weights for {} sinks", p.len(), q.len());
            }
            let drf = parse_drf(&drf)?;
            let problem = OptimizationProblem::new(q, p, rate, drf.clone())?;
            let opt = optimize_profile(&problem, descriptions)?;
            let profile = PetProfile::new(opt.y.clone(), rate)?;
            let table: Vec<f64> = (0..=descriptions).map(|k| pet_distortion(k, &profile, &drf)).collect();
            print_json(&serde_json::json!({
                "y": opt.y,
                "objective": opt.objective,
                "certified": opt.certified,
                "kkt_residual": opt.kkt_residual,
                "iterations": opt.iterations,
                "pet_distortion": table,
            }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Ozarow { cmin, cmax, step, out } => {
            let rows = run_ozarow_sweep(cmin, cmax, step)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = write_ozarow_csv(&rows, &dir)?;
                    eprintln!("wrote {}", path.display());
                }
                None => {
                    let mut w = std::io::stdout().lock();
                    writeln!(w, "C,D_star,avg_mdc,avg_sep,ratio")?;
                    for r in &rows {
                        writeln!(w, "{},{},{},{},{}", r.c, r.d_star, r.avg_mdc, r.avg_sep, r.ratio)?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
