//! Experiment driver: K-sweep pipeline, size sweep, Ozarow sweep,
//! refinement, network generation and flow evaluation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use jnsc_cli::{parse_delta, parse_drf, parse_list, print_json};
use jnsc_core::experiment::{
    run_jnsc, run_ozarow_sweep, run_refinement, run_size_sweep, write_distortion_csv, write_manifest,
    write_ozarow_csv, write_refinement_csv, write_size_csv, ExperimentConfig, OzarowConfig,
};
use jnsc_core::netgen::{grow_dag, load_network, save_network, GrowthParams};
use jnsc_core::rainbow::{
    average_distortion, is_admissible, sink_distortion, validate_flow, RainbowFlow,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "jnsc", version, about = "Joint network-source coding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CRNF routing then PET profile optimization, sweeping K per seed.
    Run(Common),
    /// Distribution of delivered description counts across network sizes.
    SizeSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated node counts.
        #[arg(long)]
        sizes: Option<String>,
        /// K used for every size.
        #[arg(long)]
        descriptions: Option<usize>,
    },
    /// Balanced two-description optimum against separate coding.
    Ozarow {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        cmin: Option<f64>,
        #[arg(long)]
        cmax: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Alternate weighted routing and profile optimization.
    Refine {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        descriptions: Option<usize>,
    },
    /// Write a random growth-model network.
    Grow {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 3)]
        draws: usize,
        #[arg(long, default_value_t = 3)]
        cmax: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-sink and average distortion of a flow.
    Evaluate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        flow: PathBuf,
        #[arg(long)]
        descriptions: usize,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        /// `cardinality`, `δ(0),…,δ(K)`, or `pet:<profile.json>`.
        #[arg(long, default_value = "cardinality")]
        delta: String,
        #[arg(long, default_value = "gaussian")]
        drf: String,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds, replacing the config's list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
    /// Seconds per solve.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Run every K instead of stopping at convergence.
    #[arg(long)]
    all_k: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(s) = &self.seeds {
            cfg.seeds = parse_list(s)?;
        }
        if let Some(k) = self.k_min {
            cfg.k_min = k;
        }
        if let Some(k) = self.k_max {
            cfg.k_max = k;
        }
        if let Some(r) = self.rate {
            cfg.rate = r;
        }
        if let Some(t) = self.time_limit {
            cfg.time_limit = Some(t);
        }
        if self.all_k {
            cfg.stop_on_convergence = false;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        std::fs::create_dir_all(&cfg.output_dir)
            .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct SinkRow {
    sink: u32,
    q: usize,
    distortion: f64,
}

fn finish(failures: &[String]) -> ExitCode {
    for f in failures {
        eprintln!("failed: {f}");
    }
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report_outputs(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.load()?;
            let report = run_jnsc(&cfg)?;
            let dir = cfg.output_dir.as_path();
            let csv = write_distortion_csv(&report, dir)?;
            let manifest = write_manifest("run", &cfg, &[csv.clone()], &report.failures, report.wall_secs, dir)?;
            for s in &report.series {
                let series: Vec<String> = s.cells.iter().map(|c| format!("{}:{:.6}", c.k, c.dbar)).collect();
                println!(
                    "seed {}: converged K = {} | {}",
                    s.seed,
                    s.converged_k.map_or("-".into(), |k| k.to_string()),
                    series.join(" ")
                );
            }
            report_outputs(&[csv, manifest]);
            Ok(finish(&report.failures))
        }
        Command::SizeSweep {
            common,
            sizes,
            descriptions,
        } => {
            let mut cfg = common.load()?;
            if let Some(s) = sizes {
                cfg.sweep.sizes = parse_list(&s)?;
            }
            if let Some(k) = descriptions {
                cfg.sweep.descriptions = k;
            }
            let report = run_size_sweep(&cfg)?;
            let dir = cfg.output_dir.as_path();
            let mut outputs = write_size_csv(&report, dir)?;
            outputs.push(write_manifest("size-sweep", &cfg, &outputs, &report.failures, report.wall_secs, dir)?);
            for s in &report.sizes {
                println!(
                    "N={}: mean Σq/(K|T|) = {:.4}, mean d̄* = {:.6}, over {} seeds",
                    s.n_nodes, s.mean_normalized_count, s.mean_dbar, s.seeds
                );
            }
            report_outputs(&outputs);
            Ok(finish(&report.failures))
        }
        Command::Ozarow {
            config,
            cmin,
            cmax,
            step,
            out,
        } => {
            let (base, dir) = match &config {
                Some(path) => {
                    let cfg = ExperimentConfig::load(path)?;
                    (cfg.ozarow.clone(), out.unwrap_or(cfg.output_dir))
                }
                None => (OzarowConfig::default(), out.unwrap_or_else(|| PathBuf::from("out"))),
            };
            let rows = run_ozarow_sweep(
                cmin.unwrap_or(base.c_min),
                cmax.unwrap_or(base.c_max),
                step.unwrap_or(base.step),
            )?;
            std::fs::create_dir_all(&dir)?;
            let path = write_ozarow_csv(&rows, &dir)?;
            for r in &rows {
                println!("C={:.2} ratio={:.6}", r.c, r.ratio);
            }
            report_outputs(&[path]);
            Ok(ExitCode::SUCCESS)
        }
        Command::Refine {
            common,
            rounds,
            descriptions,
        } => {
            let mut cfg = common.load()?;
            cfg.refinement.enabled = true;
            if let Some(r) = rounds {
                cfg.refinement.max_rounds = r;
            }
            if descriptions.is_some() {
                cfg.refinement.descriptions = descriptions;
            }
            let report = run_refinement(&cfg)?;
            let dir = cfg.output_dir.as_path();
            let csv = write_refinement_csv(&report, dir)?;
            let manifest = write_manifest("refine", &cfg, &[csv.clone()], &report.failures, report.wall_secs, dir)?;
            for t in &report.traces {
                let trace: Vec<String> = t.rounds.iter().map(|r| format!("{:.6}", r.dbar)).collect();
                println!("seed {}: {}", t.seed, trace.join(" -> "));
            }
            report_outputs(&[csv, manifest]);
            Ok(finish(&report.failures))
        }
        Command::Grow {
            nodes,
            draws,
            cmax,
            seed,
            out,
        } => {
            let net = grow_dag(&GrowthParams::new(nodes, draws, cmax, seed)?);
            save_network(&net, &out)?;
            eprintln!("wrote {} ({} nodes, {} edges)", out.display(), net.node_count(), net.edge_count());
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate {
            network,
            flow,
            descriptions,
            rate,
            delta,
            drf,
        } => evaluate(&network, &flow, descriptions, rate, &delta, &drf),
    }
}

fn evaluate(network: &Path, flow: &Path, k: usize, rate: f64, delta: &str, drf: &str) -> Result<ExitCode> {
    let net = load_network(network)?;
    let text = std::fs::read_to_string(flow).with_context(|| format!("reading {}", flow.display()))?;
    let flow = RainbowFlow::from_json(k, &text)?;
    let violations = validate_flow(&flow, &net);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("invalid flow: {v:?}");
        }
        return Ok(ExitCode::FAILURE);
    }
    let model = parse_delta(delta, k, rate, &parse_drf(drf)?)?;
    let desc = jnsc_core::rainbow::DescriptionSet::new(k, rate)?;
    let admissible = is_admissible(&flow, &net, &desc).is_admissible();
    let q = jnsc_core::rainbow::rainbow_flow_vector(&flow, &net);
    let sinks = net
        .sinks()
        .iter()
        .map(|&t| {
            Ok(SinkRow {
                sink: t,
                q: q.get(t).unwrap_or(0),
                distortion: sink_distortion(&flow, &net, t, &model)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    print_json(&serde_json::json!({
        "admissible": admissible,
        "sinks": sinks,
        "average_distortion": average_distortion(&flow, &net, &model),
    }))?;
    Ok(if admissible { ExitCode::SUCCESS } else { ExitCode::FAILURE })
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
