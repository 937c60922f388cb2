//! Solve the cardinality (or weighted) rainbow network flow problem on a
//! network document.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use jnsc_cli::{parse_delta, parse_drf, print_json};
use jnsc_core::crnf::{
    brute_force, build_crnf_ilp_with, build_weighted_rnf_ilp_with, extract_flow, solve_with,
    BuildOptions, Engine, SolveOptions,
};
use jnsc_core::netgen::load_network;
use jnsc_core::rainbow::{rainbow_flow_vector, DescriptionSet};

#[derive(Parser)]
#[command(name = "crnf", version, about = "Rainbow network flow solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Spectrum,
    Lp,
}

#[derive(Subcommand)]
enum Command {
    Solve {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        descriptions: usize,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        /// Minimize weighted distortion instead of counting descriptions.
        #[arg(long)]
        weighted: bool,
        /// `cardinality`, `δ(0),…,δ(K)`, or `pet:<profile.json>`.
        #[arg(long, default_value = "cardinality")]
        delta: String,
        #[arg(long, default_value = "gaussian")]
        drf: String,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
        engine: EngineArg,
        /// Add lexicographic color-ordering rows.
        #[arg(long)]
        symmetry: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive optimum for tiny instances.
    Brute {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        descriptions: usize,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            network,
            descriptions,
            rate,
            weighted,
            delta,
            drf,
            time_limit,
            engine,
            symmetry,
            out,
        } => {
            let net = load_network(&network)?;
            let desc = DescriptionSet::new(descriptions, rate)?;
            let opts = BuildOptions {
                symmetry_breaking: symmetry,
            };
            let model = if weighted {
                let dm = parse_delta(&delta, descriptions, rate, &parse_drf(&drf)?)?;
                let p = net.sink_weights().clone();
                build_weighted_rnf_ilp_with(&net, &desc, &dm, &p, opts)
            } else {
                build_crnf_ilp_with(&net, &desc, opts)
            };
            if let Some(t) = time_limit {
                if !(t.is_finite() && t > 0.0) {
                    bail!("time limit must be positive");
                }
            }
            let sol = solve_with(
                &model,
                &SolveOptions {
                    time_limit: time_limit.map(Duration::from_secs_f64),
                    engine: match engine {
                        EngineArg::Auto => Engine::Auto,
                        EngineArg::Spectrum => Engine::SpectrumSearch,
                        EngineArg::Lp => Engine::LpBranchAndBound,
                    },
                    warm_start: None,
                },
            );
            if sol.assignment.is_none() {
                eprintln!("no feasible flow found ({:?})", sol.status);
                return Ok(ExitCode::FAILURE);
            }
            let flow = extract_flow(&sol, &net, &desc)?;
            if let Some(path) = &out {
                std::fs::write(path, flow.to_json())?;
                eprintln!("wrote {}", path.display());
            }
            print_json(&serde_json::json!({
                "status": sol.status,
                "objective": sol.objective_value,
                "upper_bound": sol.upper_bound,
                "gap": sol.gap(),
                "nodes_explored": sol.nodes_explored,
                "q": rainbow_flow_vector(&flow, &net),
            }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Brute {
            network,
            descriptions,
            rate,
        } => {
            let net = load_network(&network)?;
            let desc = DescriptionSet::new(descriptions, rate)?;
            println!("{}", brute_force(&net, &desc)?);
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
