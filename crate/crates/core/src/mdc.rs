//! Optimization of the PET profile for a fixed rainbow flow vector, and the
//! two-description Gaussian (Ozarow) analysis with its separate-coding
//! baseline.

use serde::{Deserialize, Serialize};

use crate::error::OptimizeError;
use crate::rainbow::Drf;

/// Unit-variance Gaussian distortion-rate function, `2^(-2R)`.
pub fn gaussian_drf(rate: f64) -> f64 {
    (-2.0 * rate).exp2()
}

/// Distortion of separate source and network coding at capacity `C`.
pub fn separate_coding_baseline(capacity: f64) -> f64 {
    gaussian_drf(capacity)
}

/// Weighted average distortion as a function of the profile `y`, for fixed
/// per-sink description counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    /// `q*_t` per sink.
    pub rfv: Vec<usize>,
    /// `p_t` per sink, unnormalized.
    pub weights: Vec<f64>,
    pub rate: f64,
    pub drf: Drf,
    /// Stop once one step improves the objective by less than this.
    pub tolerance: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-15;

/// Tolerance on the KKT residual for a solution to count as certified.
pub const KKT_TOLERANCE: f64 = 1e-6;

impl OptimizationProblem {
    pub fn new(rfv: Vec<usize>, weights: Vec<f64>, rate: f64, drf: Drf) -> Result<Self, OptimizeError> {
        if rfv.len() != weights.len() {
            return Err(OptimizeError::InvalidProblem(format!(
                "{} counts but {} weights",
                rfv.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(OptimizeError::InvalidProblem(format!("weight {w} is not positive")));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(OptimizeError::InvalidProblem(format!("rate {rate} is not positive")));
        }
        Ok(Self {
            rfv,
            weights,
            rate,
            drf,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    /// Unit weights on every sink.
    pub fn uniform(rfv: Vec<usize>, rate: f64, drf: Drf) -> Result<Self, OptimizeError> {
        let weights = vec![1.0; rfv.len()];
        Self::new(rfv, weights, rate, drf)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn sink_rate(&self, y: &[f64], q: usize) -> f64 {
        self.rate
            * y.iter()
                .take(q)
                .enumerate()
                .map(|(i, v)| (i + 1) as f64 * v)
                .sum::<f64>()
    }
}

/// |T|⁻¹ Σ_t p_t D_X(r Σ_{l≤q_t} l·y_l).
pub fn objective(y: &[f64], problem: &OptimizationProblem) -> f64 {
    if problem.rfv.is_empty() {
        return 0.0;
    }
    let total: f64 = problem
        .rfv
        .iter()
        .zip(&problem.weights)
        .map(|(&q, &p)| p * problem.drf.eval(problem.sink_rate(y, q)))
        .sum();
    total / problem.rfv.len() as f64
}

/// ∂/∂y_l = |T|⁻¹ Σ_{t: q_t ≥ l} p_t·r·l·D_X'(R_t).
pub fn objective_gradient(y: &[f64], problem: &OptimizationProblem) -> Vec<f64> {
    let mut g = vec![0.0; y.len()];
    if problem.rfv.is_empty() {
        return g;
    }
    let scale = problem.rate / problem.rfv.len() as f64;
    for (&q, &p) in problem.rfv.iter().zip(&problem.weights) {
        if q == 0 {
            continue;
        }
        let d = p * problem.drf.derivative(problem.sink_rate(y, q)) * scale;
        for (l, gl) in g.iter_mut().enumerate().take(q) {
            *gl += (l + 1) as f64 * d;
        }
    }
    g
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// KKT residual on the simplex: spread of the gradient over the support,
/// plus how far any zero coordinate undercuts it.
pub fn kkt_residual(y: &[f64], gradient: &[f64]) -> f64 {
    const SUPPORT: f64 = 1e-9;
    let support: Vec<f64> = y
        .iter()
        .zip(gradient)
        .filter(|(v, _)| **v > SUPPORT)
        .map(|(_, g)| *g)
        .collect();
    let lo = support.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = support.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if support.is_empty() {
        return f64::INFINITY;
    }
    let undercut = y
        .iter()
        .zip(gradient)
        .filter(|(v, _)| **v <= SUPPORT)
        .map(|(_, g)| (lo - g).max(0.0))
        .fold(0.0, f64::max);
    (hi - lo).max(undercut)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptimum {
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// KKT residual within [`KKT_TOLERANCE`].
    pub certified: bool,
}

const MAX_ITERATIONS: usize = 200_000;

/// Minimizes the objective over the K-simplex by projected gradient with
/// backtracking, from the uniform profile.
pub fn optimize_profile(problem: &OptimizationProblem, k: usize) -> Result<ProfileOptimum, OptimizeError> {
    if k == 0 {
        return Err(OptimizeError::InvalidProblem("need at least one description".into()));
    }
    if let Some(q) = problem.rfv.iter().find(|&&q| q > k) {
        return Err(OptimizeError::InvalidProblem(format!(
            "a sink receives {q} descriptions but K = {k}"
        )));
    }
    let r_max = problem.rate * k as f64;
    problem
        .drf
        .check_convex_nonincreasing(r_max, 1000)
        .map_err(OptimizeError::NonConvexDrf)?;

    let mut y = vec![1.0 / k as f64; k];
    let mut f = objective(&y, problem);
    let mut step = 1.0;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let g = objective_gradient(&y, problem);
        let mut accepted = None;
        let mut t = step;
        while t > 1e-20 {
            let trial: Vec<f64> = y.iter().zip(&g).map(|(v, gi)| v - t * gi).collect();
            let cand = project_to_simplex(&trial);
            let decrease: f64 = g.iter().zip(cand.iter().zip(&y)).map(|(gi, (c, v))| gi * (c - v)).sum();
            let dist2: f64 = cand.iter().zip(&y).map(|(c, v)| (c - v) * (c - v)).sum();
            if dist2 == 0.0 {
                break;
            }
            let fc = objective(&cand, problem);
            // sufficient decrease for a projected step
            if fc <= f + decrease + dist2 / (2.0 * t) {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc)) = accepted else { break };
        let improvement = f - fc;
        y = cand;
        f = fc;
        step = t * 2.0;
        if improvement < problem.tolerance {
            break;
        }
    }

    let g = objective_gradient(&y, problem);
    let residual = kkt_residual(&y, &g);
    Ok(ProfileOptimum {
        objective: f,
        certified: residual <= KKT_TOLERANCE,
        kkt_residual: residual,
        iterations,
        y,
    })
}

/// Balanced two-description operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OzarowPoint {
    pub side_distortion: f64,
    pub joint_distortion: f64,
    pub capacity: f64,
}

impl OzarowPoint {
    /// (2·D12 + D1 + D2) / 4 with D1 = D2.
    pub fn average(&self) -> f64 {
        (2.0 * self.joint_distortion + 2.0 * self.side_distortion) / 4.0
    }
}

/// Smallest achievable joint distortion at side distortion `d` on links
/// of capacity `c`, floored at `2^(-4C)`.
pub fn ozarow_joint_bound(d: f64, c: f64) -> Result<f64, OptimizeError> {
    let floor = gaussian_drf(c);
    if !(c.is_finite() && c >= 0.0) {
        return Err(OptimizeError::InvalidProblem(format!("capacity {c} is negative")));
    }
    if !(d >= floor * (1.0 - 1e-12)) {
        return Err(OptimizeError::Domain {
            d,
            capacity: c,
            floor,
        });
    }
    if d > 1.0 + 1e-12 {
        return Err(OptimizeError::InvalidProblem(format!("side distortion {d} exceeds 1")));
    }
    let a = gaussian_drf(2.0 * c);
    let s = (d * d - a).max(0.0).sqrt();
    Ok(a.max(a / ((d + s) * (2.0 - d - s))))
}

/// Minimizes the balanced average over `D` in `[2^(-2C), (1 + 2^(-4C))/2]`
/// by golden-section search.
pub fn ozarow_balanced_optimum(c: f64) -> Result<OzarowPoint, OptimizeError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(OptimizeError::InvalidProblem(format!("capacity {c} is not positive")));
    }
    let avg = |d: f64| {
        let d12 = ozarow_joint_bound(d, c).expect("search stays in the domain");
        (2.0 * d12 + 2.0 * d) / 4.0
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = gaussian_drf(c);
    let mut hi = (1.0 + gaussian_drf(2.0 * c)) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (avg(x1), avg(x2));
    while hi - lo > 1e-10 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = avg(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = avg(x2);
        }
    }
    // the interval ends are candidates too
    let mid = (lo + hi) / 2.0;
    let endpoints = [gaussian_drf(c), (1.0 + gaussian_drf(2.0 * c)) / 2.0];
    let best = std::iter::once(mid)
        .chain(endpoints)
        .min_by(|a, b| avg(*a).total_cmp(&avg(*b)))
        .expect("non-empty");
    Ok(OzarowPoint {
        side_distortion: best,
        joint_distortion: ozarow_joint_bound(best, c)?,
        capacity: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eight_sinks() -> OptimizationProblem {
        OptimizationProblem::uniform(vec![1, 1, 1, 2, 2, 2, 2, 3], 1.0, Drf::unit_gaussian()).unwrap()
    }

    #[test]
    fn gaussian_values() {
        assert_eq!(gaussian_drf(0.0), 1.0);
        assert_eq!(gaussian_drf(1.0), 0.25);
        assert_eq!(gaussian_drf(3.0), 2f64.powi(-6));
        assert_eq!(separate_coding_baseline(0.5), 0.5);
        assert_eq!(separate_coding_baseline(0.0), 1.0);
    }

    #[test]
    fn eight_sink_optimum() {
        let opt = optimize_profile(&eight_sinks(), 3).unwrap();
        for (got, want) in opt.y.iter().zip([0.82, 0.18, 0.0]) {
            assert!((got - want).abs() <= 0.01, "{:?}", opt.y);
        }
        assert!(opt.certified, "residual {}", opt.kkt_residual);
    }

    #[test]
    fn eight_sink_objective_by_hand() {
        let v = objective(&[0.82, 0.18, 0.0], &eight_sinks());
        let by_hand = (3.0 * 2f64.powf(-1.64) + 5.0 * 2f64.powf(-2.36)) / 8.0;
        assert!((v - by_hand).abs() < 1e-15);
        assert!((v - 0.24207).abs() < 1e-5);
    }

    #[test]
    fn degenerate_profiles() {
        let one = OptimizationProblem::uniform(vec![4], 1.0, Drf::unit_gaussian()).unwrap();
        let opt = optimize_profile(&one, 4).unwrap();
        assert!((opt.y[3] - 1.0).abs() < 1e-9, "{:?}", opt.y);

        let ones = OptimizationProblem::uniform(vec![1; 5], 1.0, Drf::unit_gaussian()).unwrap();
        let opt = optimize_profile(&ones, 3).unwrap();
        assert!((opt.y[0] - 1.0).abs() < 1e-9, "{:?}", opt.y);
        assert!(opt.certified);
    }

    #[test]
    fn projection_lands_on_simplex() {
        for v in [vec![0.2, 0.3, 0.5], vec![3.0, -1.0, 0.0], vec![-5.0, -5.0], vec![0.4, 0.4, 0.4, 0.4]] {
            let p = project_to_simplex(&v);
            assert!(p.iter().all(|x| *x >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(project_to_simplex(&[3.0, -1.0, 0.0]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(optimize_profile(&eight_sinks(), 2).is_err());
        let wavy = Drf::PiecewiseLinear {
            points: vec![(0.0, 1.0), (1.0, 0.9), (2.0, 0.2), (3.0, 0.0)],
        };
        let p = OptimizationProblem::uniform(vec![1, 2], 1.0, wavy).unwrap();
        assert!(matches!(optimize_profile(&p, 3), Err(OptimizeError::NonConvexDrf(_))));
        assert!(OptimizationProblem::new(vec![1], vec![0.0], 1.0, Drf::unit_gaussian()).is_err());
    }

    #[test]
    fn ozarow_examples() {
        assert_eq!(ozarow_joint_bound(1.0, 0.0).unwrap(), 1.0);
        for c in [0.3, 1.0, 2.0] {
            let b = gaussian_drf(c);
            let at_floor = ozarow_joint_bound(b, c).unwrap();
            assert!((at_floor - b / (2.0 - b)).abs() < 1e-12);
            let top = (1.0 + gaussian_drf(2.0 * c)) / 2.0;
            assert!((ozarow_joint_bound(top, c).unwrap() - gaussian_drf(2.0 * c)).abs() < 1e-12);
        }
        assert!(matches!(ozarow_joint_bound(0.1, 1.0), Err(OptimizeError::Domain { .. })));
    }

    #[test]
    fn balanced_optimum_matches_grid() {
        let opt = ozarow_balanced_optimum(1.0).unwrap();
        let lo = gaussian_drf(1.0);
        let hi = (1.0 + gaussian_drf(2.0)) / 2.0;
        let n = 1_000_000;
        let grid = (0..=n)
            .map(|i| {
                let d = lo + (hi - lo) * i as f64 / n as f64;
                let d12 = ozarow_joint_bound(d, 1.0).unwrap();
                (2.0 * d12 + 2.0 * d) / 4.0
            })
            .fold(f64::INFINITY, f64::min);
        assert!((opt.average() - grid).abs() < 1e-8);
        assert!(opt.average() < separate_coding_baseline(1.0));
    }
}
