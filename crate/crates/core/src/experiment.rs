//! End-to-end pipeline and experiment drivers: CRNF routing, then PET
//! profile optimization, swept over K, network size and capacity, plus the
//! alternating refinement between flow and profile.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crnf::{
    assignment_from_spectra, build_crnf_ilp, build_weighted_rnf_ilp, extract_flow, solve_with,
    spectra_of, IlpModel, IlpSolution, SolveOptions, SolveStatus,
};
use crate::error::{Error, Result, SolverError};
use crate::mdc::{
    objective, optimize_profile, ozarow_balanced_optimum, separate_coding_baseline,
    OptimizationProblem,
};
use crate::netgen::{grow_dag, load_network, GrowthParams, Network};
use crate::pet::PetProfile;
use crate::rainbow::{is_admissible, rainbow_flow_vector, validate_flow, DescriptionSet, Drf};

/// Improvement below which the K-sweep and the refinement loop stop.
pub const CONVERGENCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSpec {
    Growth {
        n_nodes: usize,
        #[serde(default = "default_draws")]
        in_degree_draws: usize,
        #[serde(default = "default_c_max")]
        c_max: u32,
    },
    File { file: PathBuf },
}

fn default_draws() -> usize {
    3
}

fn default_c_max() -> u32 {
    3
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsPolicy {
    /// Every sink weighs 1.
    #[default]
    Uniform,
    /// Weights stored with the network.
    Network,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub descriptions: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: vec![50, 100, 200],
            descriptions: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefinementConfig {
    pub enabled: bool,
    pub max_rounds: usize,
    /// K for the refinement; `k_max` when absent.
    pub descriptions: Option<usize>,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            max_rounds: 10,
            descriptions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OzarowConfig {
    pub c_min: f64,
    pub c_max: f64,
    pub step: f64,
}

impl Default for OzarowConfig {
    fn default() -> Self {
        Self {
            c_min: 0.1,
            c_max: 3.0,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSpec,
    #[serde(default = "default_rate")]
    pub rate: f64,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub drf: Drf,
    #[serde(default)]
    pub weights: WeightsPolicy,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Per solve, in seconds.
    #[serde(default = "default_time_limit")]
    pub time_limit: Option<f64>,
    /// Stop raising K once d̄* stops improving.
    #[serde(default = "default_true")]
    pub stop_on_convergence: bool,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub refinement: RefinementConfig,
    #[serde(default)]
    pub ozarow: OzarowConfig,
}

fn default_rate() -> f64 {
    1.0
}

fn default_k_min() -> usize {
    1
}

fn default_k_max() -> usize {
    8
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_time_limit() -> Option<f64> {
    Some(60.0)
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// Growth-model config with the defaults `m = 3`, `C_max = 3`,
    /// `r = 1`.
    pub fn growth(n_nodes: usize, seeds: Vec<u64>) -> Self {
        Self {
            network: NetworkSpec::Growth {
                n_nodes,
                in_degree_draws: default_draws(),
                c_max: default_c_max(),
            },
            rate: default_rate(),
            k_min: default_k_min(),
            k_max: default_k_max(),
            drf: Drf::default(),
            weights: WeightsPolicy::default(),
            seeds,
            output_dir: default_output(),
            time_limit: default_time_limit(),
            stop_on_convergence: true,
            sweep: SweepConfig::default(),
            refinement: RefinementConfig::default(),
            ozarow: OzarowConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k_min == 0 || self.k_min > self.k_max {
            return bad(format!("K range [{}, {}] is empty or starts at 0", self.k_min, self.k_max));
        }
        if self.k_max > 64 {
            return bad(format!("k_max = {} exceeds 64", self.k_max));
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return bad(format!("rate {} is not positive", self.rate));
        }
        if let Some(t) = self.time_limit {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("time limit {t} is not positive"));
            }
        }
        if self.drf.check_convex_nonincreasing(self.rate * self.k_max as f64, 1000).is_err() {
            return bad("distortion-rate function is not convex non-increasing".into());
        }
        if let NetworkSpec::Growth {
            n_nodes,
            in_degree_draws,
            c_max,
        } = self.network
        {
            GrowthParams::new(n_nodes, in_degree_draws, c_max, 0)?;
        }
        let s = &self.sweep;
        if s.descriptions == 0 || s.descriptions > 64 || s.sizes.contains(&0) {
            return bad("sweep needs 1..=64 descriptions and positive sizes".into());
        }
        let o = &self.ozarow;
        if !(o.c_min > 0.0 && o.c_min < o.c_max && o.step > 0.0) {
            return bad("ozarow sweep needs 0 < c_min < c_max and a positive step".into());
        }
        if self.refinement.descriptions.is_some_and(|k| k == 0 || k > 64) {
            return bad("refinement descriptions must be in 1..=64".into());
        }
        Ok(())
    }

    fn settings(&self) -> Settings {
        Settings {
            rate: self.rate,
            drf: self.drf.clone(),
            weights: self.weights,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
        }
    }

    /// The network for `seed` (a file network ignores the seed).
    pub fn network_for(&self, seed: u64, n_override: Option<usize>) -> Result<Network> {
        match &self.network {
            NetworkSpec::Growth {
                n_nodes,
                in_degree_draws,
                c_max,
            } => {
                let n = n_override.unwrap_or(*n_nodes);
                Ok(grow_dag(&GrowthParams::new(n, *in_degree_draws, *c_max, seed)?))
            }
            NetworkSpec::File { file } => Ok(load_network(file)?),
        }
    }
}

/// Per-solve parameters shared by all drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub rate: f64,
    pub drf: Drf,
    pub weights: WeightsPolicy,
    pub time_limit: Option<Duration>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            rate: 1.0,
            drf: Drf::default(),
            weights: WeightsPolicy::Uniform,
            time_limit: None,
        }
    }
}

impl Settings {
    fn weights_for(&self, net: &Network) -> Vec<f64> {
        match self.weights {
            WeightsPolicy::Uniform => vec![1.0; net.sinks().len()],
            WeightsPolicy::Network => net
                .sinks()
                .iter()
                .map(|&t| net.sink_weight(t).unwrap_or(1.0))
                .collect(),
        }
    }

    fn problem(&self, net: &Network, q: &[usize]) -> Result<OptimizationProblem> {
        Ok(OptimizationProblem::new(
            q.to_vec(),
            self.weights_for(net),
            self.rate,
            self.drf.clone(),
        )?)
    }
}

/// One solved (network, K) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub k: usize,
    pub objective: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub status: SolveStatus,
    /// `q_t` in sink order.
    pub q: Vec<usize>,
    /// Per-node description masks of the flow.
    pub spectra: Vec<u64>,
    pub y: Vec<f64>,
    pub dbar: f64,
    pub certified: bool,
    pub solve_secs: f64,
    pub optimize_secs: f64,
}

impl Cell {
    /// Number of sinks with `q_t = j`, for `j = 0..=K`.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.k + 1];
        for &q in &self.q {
            h[q.min(self.k)] += 1;
        }
        h
    }

    /// Σ_t q_t / (K·|T|).
    pub fn normalized_count(&self) -> f64 {
        if self.q.is_empty() {
            return 0.0;
        }
        self.q.iter().sum::<usize>() as f64 / (self.k * self.q.len()) as f64
    }
}

/// Checks the solver output, rebuilds the flow and reads off `q`.
fn flow_vector(net: &Network, desc: &DescriptionSet, sol: &IlpSolution) -> Result<Vec<usize>> {
    let flow = extract_flow(sol, net, desc)?;
    let violations = validate_flow(&flow, net);
    if !violations.is_empty() {
        return Err(SolverError::Inconsistent(format!("extracted flow is invalid: {violations:?}")).into());
    }
    if !is_admissible(&flow, net, desc).is_admissible() {
        return Err(SolverError::Inconsistent("extracted flow exceeds a capacity".into()).into());
    }
    let rfv = rainbow_flow_vector(&flow, net);
    Ok(net.sinks().iter().map(|&t| rfv.get(t).unwrap_or(0)).collect())
}

fn solve_model(
    model: &IlpModel,
    settings: &Settings,
    warm: Option<&[u64]>,
) -> Result<(IlpSolution, f64)> {
    let start = Instant::now();
    let warm_start = warm.and_then(|s| assignment_from_spectra(model, s));
    let sol = solve_with(
        model,
        &SolveOptions {
            time_limit: settings.time_limit,
            warm_start,
            ..Default::default()
        },
    );
    let secs = start.elapsed().as_secs_f64();
    if sol.assignment.is_none() {
        return Err(SolverError::NoSolution("solver found no feasible flow").into());
    }
    Ok((sol, secs))
}

fn optimized(net: &Network, q: &[usize], k: usize, settings: &Settings) -> Result<(Vec<f64>, f64, bool, f64)> {
    let start = Instant::now();
    let opt = optimize_profile(&settings.problem(net, q)?, k)?;
    Ok((opt.y, opt.objective, opt.certified, start.elapsed().as_secs_f64()))
}

/// CRNF for `K` descriptions, then the best PET profile for the resulting
/// flow vector. `warm` seeds the search with per-node masks.
pub fn solve_cell(net: &Network, k: usize, settings: &Settings, warm: Option<&[u64]>) -> Result<Cell> {
    let desc = DescriptionSet::new(k, settings.rate)?;
    let model = build_crnf_ilp(net, &desc);
    let (sol, solve_secs) = solve_model(&model, settings, warm)?;
    let q = flow_vector(net, &desc, &sol)?;
    let spectra = spectra_of(&model, sol.assignment.as_ref().expect("checked")).expect("structured model");
    let (y, dbar, certified, optimize_secs) = optimized(net, &q, k, settings)?;
    Ok(Cell {
        k,
        objective: sol.objective_value,
        upper_bound: sol.upper_bound,
        gap: sol.gap(),
        status: sol.status,
        q,
        spectra,
        y,
        dbar,
        certified,
        solve_secs,
        optimize_secs,
    })
}

/// K-sweep results for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSeries {
    pub seed: u64,
    pub n_nodes: usize,
    pub cells: Vec<Cell>,
    /// Smallest K whose d̄* is final: the next K improved by less than
    /// [`CONVERGENCE`]. `None` if the sweep ended first.
    pub converged_k: Option<usize>,
    pub wall_secs: f64,
}

impl SeedSeries {
    pub fn dbar_series(&self) -> Vec<(usize, f64)> {
        self.cells.iter().map(|c| (c.k, c.dbar)).collect()
    }
}

/// Runs K = k_min, k_min+1, … on one network, warm-starting each K from
/// the previous flow.
pub fn k_sweep(
    net: &Network,
    k_min: usize,
    k_max: usize,
    settings: &Settings,
    stop_on_convergence: bool,
) -> Result<(Vec<Cell>, Option<usize>)> {
    let mut cells: Vec<Cell> = Vec::new();
    let mut converged = None;
    for k in k_min..=k_max {
        let warm = cells.last().map(|c| c.spectra.clone());
        let cell = solve_cell(net, k, settings, warm.as_deref())?;
        if let Some(prev) = cells.last() {
            if converged.is_none() && prev.dbar - cell.dbar < CONVERGENCE {
                converged = Some(prev.k);
            }
        }
        cells.push(cell);
        if stop_on_convergence && converged.is_some() {
            break;
        }
    }
    Ok((cells, converged))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub series: Vec<SeedSeries>,
    /// Mean d̄* per K over the seeds that reached that K.
    pub mean_dbar_by_k: Vec<(usize, f64)>,
    pub failures: Vec<String>,
    pub wall_secs: f64,
}

/// The routing-then-coding pipeline over every seed.
pub fn run_jnsc(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let settings = config.settings();
    let results: Vec<(u64, Result<SeedSeries>)> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let run = || -> Result<SeedSeries> {
                let t = Instant::now();
                let net = config.network_for(seed, None)?;
                let (cells, converged_k) =
                    k_sweep(&net, config.k_min, config.k_max, &settings, config.stop_on_convergence)?;
                Ok(SeedSeries {
                    seed,
                    n_nodes: net.node_count(),
                    cells,
                    converged_k,
                    wall_secs: t.elapsed().as_secs_f64(),
                })
            };
            (seed, run())
        })
        .collect();

    let mut series = Vec::new();
    let mut failures = Vec::new();
    for (seed, r) in results {
        match r {
            Ok(s) => series.push(s),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    series.sort_by_key(|s| s.seed);
    let mean_dbar_by_k = (config.k_min..=config.k_max)
        .filter_map(|k| {
            let vals: Vec<f64> = series
                .iter()
                .filter_map(|s| s.cells.iter().find(|c| c.k == k).map(|c| c.dbar))
                .collect();
            (!vals.is_empty()).then(|| (k, vals.iter().sum::<f64>() / vals.len() as f64))
        })
        .collect();
    Ok(ExperimentReport {
        series,
        mean_dbar_by_k,
        failures,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

/// One (size, seed) cell of the size sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCell {
    pub n_nodes: usize,
    pub seed: u64,
    pub cell: Cell,
}

/// Seed averages for one network size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n_nodes: usize,
    pub k: usize,
    /// Fraction of sinks with `q_t ≤ j`, for `j = 0..=K`.
    pub cumulative: Vec<f64>,
    /// Mean of Σ_t q_t / (K·|T|).
    pub mean_normalized_count: f64,
    pub mean_y: Vec<f64>,
    pub mean_dbar: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSweepReport {
    pub cells: Vec<SizeCell>,
    pub sizes: Vec<SizeSummary>,
    pub failures: Vec<String>,
    pub wall_secs: f64,
}

/// Fraction of sinks with `q_t ≤ j`, for `j = 0..=K`.
pub fn cumulative_fractions(q: &[usize], k: usize) -> Vec<f64> {
    let mut h = vec![0usize; k + 1];
    for &v in q {
        h[v.min(k)] += 1;
    }
    let total = q.len().max(1) as f64;
    let mut acc = 0;
    h.iter()
        .map(|&c| {
            acc += c;
            if q.is_empty() {
                1.0
            } else {
                acc as f64 / total
            }
        })
        .collect()
}

/// CRNF at fixed K over a list of growth-model sizes.
pub fn run_size_sweep(config: &ExperimentConfig) -> Result<SizeSweepReport> {
    config.validate()?;
    if !matches!(config.network, NetworkSpec::Growth { .. }) {
        return Err(Error::Config("size sweep needs a growth-model network".into()));
    }
    if config.sweep.sizes.is_empty() {
        return Err(Error::Config("size sweep needs at least one size".into()));
    }
    let start = Instant::now();
    let settings = config.settings();
    let k = config.sweep.descriptions;
    let jobs: Vec<(usize, u64)> = config
        .sweep
        .sizes
        .iter()
        .flat_map(|&n| config.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<((usize, u64), Result<Cell>)> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let run = || -> Result<Cell> {
                let net = config.network_for(seed, Some(n))?;
                solve_cell(&net, k, &settings, None)
            };
            ((n, seed), run())
        })
        .collect();

    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for ((n, seed), r) in results {
        match r {
            Ok(cell) => cells.push(SizeCell {
                n_nodes: n,
                seed,
                cell,
            }),
            Err(e) => failures.push(format!("N={n} seed {seed}: {e}")),
        }
    }
    cells.sort_by_key(|c| (c.n_nodes, c.seed));

    let mut sizes = Vec::new();
    for &n in &config.sweep.sizes {
        let group: Vec<&Cell> = cells.iter().filter(|c| c.n_nodes == n).map(|c| &c.cell).collect();
        if group.is_empty() || sizes.iter().any(|s: &SizeSummary| s.n_nodes == n) {
            continue;
        }
        let m = group.len() as f64;
        let mut cumulative = vec![0.0; k + 1];
        let mut mean_y = vec![0.0; k];
        for c in &group {
            for (a, f) in cumulative.iter_mut().zip(cumulative_fractions(&c.q, k)) {
                *a += f / m;
            }
            for (a, y) in mean_y.iter_mut().zip(&c.y) {
                *a += y / m;
            }
        }
        sizes.push(SizeSummary {
            n_nodes: n,
            k,
            cumulative,
            mean_normalized_count: group.iter().map(|c| c.normalized_count()).sum::<f64>() / m,
            mean_y,
            mean_dbar: group.iter().map(|c| c.dbar).sum::<f64>() / m,
            seeds: group.len(),
        });
    }
    Ok(SizeSweepReport {
        cells,
        sizes,
        failures,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OzarowRow {
    pub c: f64,
    pub d_star: f64,
    pub avg_mdc: f64,
    pub avg_sep: f64,
    pub ratio: f64,
}

/// Balanced two-description optimum against separate coding on the grid
/// `c_min, c_min + step, …, c_max`.
pub fn run_ozarow_sweep(c_min: f64, c_max: f64, step: f64) -> Result<Vec<OzarowRow>> {
    if !(c_min > 0.0 && c_min < c_max && step > 0.0) {
        return Err(Error::Config(format!(
            "need 0 < c_min < c_max and step > 0, got {c_min}, {c_max}, {step}"
        )));
    }
    let count = ((c_max - c_min) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| {
            // rounded to suppress accumulation noise in the printed grid
            let c = ((c_min + i as f64 * step) * 1e12).round() / 1e12;
            let opt = ozarow_balanced_optimum(c)?;
            let avg_sep = separate_coding_baseline(c);
            Ok(OzarowRow {
                c,
                d_star: opt.side_distortion,
                avg_mdc: opt.average(),
                avg_sep,
                ratio: opt.average() / avg_sep,
            })
        })
        .collect()
}

/// One round of the flow/profile alternation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRound {
    pub round: usize,
    /// ILP objective of the round's routing step (the CRNF count in round 0).
    pub objective: f64,
    pub gap: f64,
    pub q: Vec<usize>,
    pub y: Vec<f64>,
    pub dbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementTrace {
    pub seed: u64,
    pub k: usize,
    pub rounds: Vec<RefinementRound>,
    /// d̄* of the plain pipeline (round 0).
    pub crnf_dbar: f64,
    pub final_dbar: f64,
    pub converged: bool,
}

/// Alternates the weighted routing problem for the current profile with
/// profile optimization for the current flow, starting from the CRNF flow.
pub fn refine(net: &Network, k: usize, settings: &Settings, max_rounds: usize, seed: u64) -> Result<RefinementTrace> {
    let base = solve_cell(net, k, settings, None)?;
    let mut spectra = base.spectra.clone();
    let mut current = RefinementRound {
        round: 0,
        objective: base.objective,
        gap: base.gap,
        q: base.q.clone(),
        y: base.y.clone(),
        dbar: base.dbar,
    };
    let mut rounds = vec![current.clone()];
    let weights = settings.weights_for(net);
    let desc = DescriptionSet::new(k, settings.rate)?;
    let mut converged = false;

    for round in 1..=max_rounds {
        let profile = PetProfile::new(current.y.clone(), settings.rate)?;
        let delta = profile.distortion_model(&settings.drf)?;
        let p = net.sinks().iter().copied().zip(weights.iter().copied()).collect();
        let model = build_weighted_rnf_ilp(net, &desc, &delta, &p);
        let (sol, _) = solve_model(&model, settings, Some(&spectra))?;
        let q = flow_vector(net, &desc, &sol)?;

        let problem = settings.problem(net, &q)?;
        let held = objective(&current.y, &problem);
        let opt = optimize_profile(&problem, k)?;
        let (y, dbar) = if opt.objective <= held {
            (opt.y, opt.objective)
        } else {
            (current.y.clone(), held)
        };
        let next = if dbar <= current.dbar {
            spectra = spectra_of(&model, sol.assignment.as_ref().expect("checked")).expect("structured model");
            RefinementRound {
                round,
                objective: sol.objective_value,
                gap: sol.gap(),
                q,
                y,
                dbar,
            }
        } else {
            // a timed-out routing step can land above the held flow
            RefinementRound {
                round,
                ..current.clone()
            }
        };
        let improvement = current.dbar - next.dbar;
        rounds.push(next.clone());
        current = next;
        if improvement < CONVERGENCE {
            converged = true;
            break;
        }
    }
    Ok(RefinementTrace {
        seed,
        k,
        crnf_dbar: rounds[0].dbar,
        final_dbar: current.dbar,
        rounds,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub traces: Vec<RefinementTrace>,
    pub failures: Vec<String>,
    pub wall_secs: f64,
}

/// [`refine`] on every seed's network.
pub fn run_refinement(config: &ExperimentConfig) -> Result<RefinementReport> {
    config.validate()?;
    if !config.refinement.enabled {
        return Err(Error::Config("refinement is disabled in the config".into()));
    }
    let start = Instant::now();
    let settings = config.settings();
    let k = config.refinement.descriptions.unwrap_or(config.k_max);
    let results: Vec<(u64, Result<RefinementTrace>)> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let run = || {
                let net = config.network_for(seed, None)?;
                refine(&net, k, &settings, config.refinement.max_rounds, seed)
            };
            (seed, run())
        })
        .collect();
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (seed, r) in results {
        match r {
            Ok(t) => traces.push(t),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    traces.sort_by_key(|t| t.seed);
    Ok(RefinementReport {
        traces,
        failures,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(";")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct KRowCsv {
    seed: u64,
    #[serde(rename = "K")]
    k: usize,
    objective: f64,
    dbar: f64,
    upper_bound: f64,
    gap: f64,
    status: &'static str,
    y: String,
    solve_secs: f64,
}

fn status_label(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::TimedOut => "timed_out",
        SolveStatus::Infeasible => "infeasible",
    }
}

/// `distortion_vs_k.csv`.
pub fn write_distortion_csv(report: &ExperimentReport, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("distortion_vs_k.csv");
    write_csv(
        &path,
        report.series.iter().flat_map(|s| {
            s.cells.iter().map(move |c| KRowCsv {
                seed: s.seed,
                k: c.k,
                objective: c.objective,
                dbar: c.dbar,
                upper_bound: c.upper_bound,
                gap: c.gap,
                status: status_label(c.status),
                y: join(&c.y),
                solve_secs: c.solve_secs,
            })
        }),
    )?;
    Ok(path)
}

#[derive(Serialize)]
struct CdfCsv {
    #[serde(rename = "N")]
    n: usize,
    k: usize,
    fraction: f64,
}

#[derive(Serialize)]
struct SizeCsv {
    #[serde(rename = "N")]
    n: usize,
    seeds: usize,
    mean_normalized_count: f64,
    mean_dbar: f64,
    mean_y: String,
}

/// `rfv_cdf.csv` and `size_summary.csv`.
pub fn write_size_csv(report: &SizeSweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let cdf = dir.join("rfv_cdf.csv");
    write_csv(
        &cdf,
        report.sizes.iter().flat_map(|s| {
            s.cumulative.iter().enumerate().map(move |(k, &fraction)| CdfCsv {
                n: s.n_nodes,
                k,
                fraction,
            })
        }),
    )?;
    let summary = dir.join("size_summary.csv");
    write_csv(
        &summary,
        report.sizes.iter().map(|s| SizeCsv {
            n: s.n_nodes,
            seeds: s.seeds,
            mean_normalized_count: s.mean_normalized_count,
            mean_dbar: s.mean_dbar,
            mean_y: join(&s.mean_y),
        }),
    )?;
    Ok(vec![cdf, summary])
}

#[derive(Serialize)]
struct OzarowCsv {
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "D_star")]
    d_star: f64,
    avg_mdc: f64,
    avg_sep: f64,
    ratio: f64,
}

/// `ozarow.csv`.
pub fn write_ozarow_csv(rows: &[OzarowRow], dir: &Path) -> Result<PathBuf> {
    let path = dir.join("ozarow.csv");
    write_csv(
        &path,
        rows.iter().map(|r| OzarowCsv {
            c: r.c,
            d_star: r.d_star,
            avg_mdc: r.avg_mdc,
            avg_sep: r.avg_sep,
            ratio: r.ratio,
        }),
    )?;
    Ok(path)
}

#[derive(Serialize)]
struct RefineCsv {
    seed: u64,
    #[serde(rename = "K")]
    k: usize,
    round: usize,
    objective: f64,
    gap: f64,
    dbar: f64,
    y: String,
}

/// `refinement.csv`.
pub fn write_refinement_csv(report: &RefinementReport, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("refinement.csv");
    write_csv(
        &path,
        report.traces.iter().flat_map(|t| {
            t.rounds.iter().map(move |r| RefineCsv {
                seed: t.seed,
                k: t.k,
                round: r.round,
                objective: r.objective,
                gap: r.gap,
                dbar: r.dbar,
                y: join(&r.y),
            })
        }),
    )?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub wall_secs: f64,
    pub threads: usize,
    pub outputs: Vec<OutputFile>,
    pub failures: Vec<String>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes `run_manifest.json` next to `outputs`.
pub fn write_manifest(
    command: &str,
    config: &ExperimentConfig,
    outputs: &[PathBuf],
    failures: &[String],
    wall_secs: f64,
    dir: &Path,
) -> Result<PathBuf> {
    let outputs = outputs
        .iter()
        .map(|p| {
            Ok(OutputFile {
                name: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        wall_secs,
        threads: rayon::current_num_threads(),
        outputs,
        failures: failures.to_vec(),
    };
    let path = dir.join("run_manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::fig1_network;

    #[test]
    fn config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            seeds = [1, 2]
            [network]
            n_nodes = 50
            "#,
        )
        .unwrap();
        assert_eq!(cfg.k_max, 8);
        assert_eq!(cfg.rate, 1.0);
        assert_eq!(
            cfg.network,
            NetworkSpec::Growth {
                n_nodes: 50,
                in_degree_draws: 3,
                c_max: 3
            }
        );
        let file = ExperimentConfig::from_toml("seeds = [0]\nnetwork = { file = \"net.json\" }").unwrap();
        assert!(matches!(file.network, NetworkSpec::File { .. }));
    }

    #[test]
    fn config_rejects_nonsense() {
        assert!(ExperimentConfig::from_toml("seeds = []\nnetwork = { n_nodes = 5 }").is_err());
        assert!(ExperimentConfig::from_toml("seeds = [0]\nk_min = 3\nk_max = 2\nnetwork = { n_nodes = 5 }").is_err());
        assert!(ExperimentConfig::from_toml("seeds = [0]\nbogus = 1\nnetwork = { n_nodes = 5 }").is_err());
        assert!(ExperimentConfig::from_toml("seeds = [0]\nrate = -1.0\nnetwork = { n_nodes = 5 }").is_err());
    }

    #[test]
    fn fixture_cell_matches_direct_optimization() {
        let net = fig1_network(1.0);
        let s = Settings::default();
        let cell = solve_cell(&net, 2, &s, None).unwrap();
        assert_eq!(cell.objective, 6.0);
        assert_eq!(cell.q, vec![1, 1, 2, 2]);
        let direct = optimize_profile(
            &OptimizationProblem::uniform(vec![1, 1, 2, 2], 1.0, Drf::unit_gaussian()).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(cell.dbar, direct.objective);
        assert_eq!(cell.histogram(), vec![0, 2, 2]);
    }

    #[test]
    fn single_description_pipeline() {
        let net = grow_dag(&GrowthParams::new(30, 3, 3, 5).unwrap());
        let cell = solve_cell(&net, 1, &Settings::default(), None).unwrap();
        assert_eq!(cell.y, vec![1.0]);
        let expected = cell.q.iter().map(|&q| crate::mdc::gaussian_drf(q.min(1) as f64)).sum::<f64>()
            / cell.q.len() as f64;
        assert!((cell.dbar - expected).abs() < 1e-15);
    }

    #[test]
    fn cumulative_fractions_end_at_one() {
        let f = cumulative_fractions(&[0, 1, 1, 3], 3);
        assert_eq!(f, vec![0.25, 0.75, 0.75, 1.0]);
        assert_eq!(cumulative_fractions(&[1, 1], 1), vec![0.0, 1.0]);
    }

    #[test]
    fn ozarow_grid() {
        let rows = run_ozarow_sweep(0.1, 3.0, 0.1).unwrap();
        assert_eq!(rows.len(), 30);
        assert_eq!(rows[29].c, 3.0);
        assert!(rows.iter().all(|r| r.ratio > 0.0 && r.ratio < 1.0));
    }
}
