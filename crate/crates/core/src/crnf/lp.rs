//! Dense two-phase simplex for small linear programs with box bounds.
//!
//! Used for the relaxation bound inside branch and bound. Problems are
//! `max c·x` subject to row constraints and `0 <= x <= u`.

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(objective.len(), upper.len());
        Self {
            objective,
            upper,
            rows: Vec::new(),
        }
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, sense: RowSense, rhs: f64) {
        self.rows.push(LpRow { terms, sense, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

struct Tableau {
    // m rows of width `width` followed by the objective row; last column is rhs
    data: Vec<f64>,
    m: usize,
    width: usize,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.data[pr * w + pc];
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        let prow: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f.abs() < 1e-15 {
                continue;
            }
            let row = &mut self.data[r * w..(r + 1) * w];
            for (dst, src) in row.iter_mut().zip(&prow) {
                *dst -= f * src;
            }
        }
        self.basis[pr] = pc;
    }

    /// Runs simplex iterations on the objective row (stored as reduced
    /// costs to be driven non-negative). Only columns `< active` may enter.
    fn optimize(&mut self, active: usize) -> bool {
        let obj = self.m;
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run > 50;
            let mut enter = None;
            let mut best = -EPS;
            for c in 0..active {
                let rc = self.at(obj, c);
                if rc < -EPS {
                    if bland {
                        enter = Some(c);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        enter = Some(c);
                    }
                }
            }
            let Some(pc) = enter else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return false;
            };
            if ratio.abs() <= EPS {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(pr, pc);
        }
    }
}

/// Solves the problem with the two-phase method.
pub fn solve_lp(problem: &LpProblem) -> LpOutcome {
    let n = problem.num_vars();

    // Normalise every row to a non-negative right-hand side.
    let mut rows: Vec<(Vec<(usize, f64)>, RowSense, f64)> = Vec::new();
    for row in &problem.rows {
        let (terms, sense, rhs) = if row.rhs < 0.0 {
            let flipped = match row.sense {
                RowSense::Le => RowSense::Ge,
                RowSense::Ge => RowSense::Le,
                RowSense::Eq => RowSense::Eq,
            };
            (
                row.terms.iter().map(|&(j, a)| (j, -a)).collect(),
                flipped,
                -row.rhs,
            )
        } else {
            (row.terms.clone(), row.sense, row.rhs)
        };
        rows.push((terms, sense, rhs));
    }
    for (j, &u) in problem.upper.iter().enumerate() {
        if u.is_finite() {
            rows.push((vec![(j, 1.0)], RowSense::Le, u.max(0.0)));
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != RowSense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != RowSense::Le).count();
    let width = n + n_slack + n_art + 1;
    let mut t = Tableau {
        data: vec![0.0; (m + 1) * width],
        m,
        width,
        basis: vec![0; m],
    };

    let mut slack = n;
    let mut art = n + n_slack;
    let art_start = art;
    for (r, (terms, sense, rhs)) in rows.iter().enumerate() {
        for &(j, a) in terms {
            t.data[r * width + j] += a;
        }
        t.data[r * width + width - 1] = *rhs;
        match sense {
            RowSense::Le => {
                t.data[r * width + slack] = 1.0;
                t.basis[r] = slack;
                slack += 1;
            }
            RowSense::Ge => {
                t.data[r * width + slack] = -1.0;
                slack += 1;
                t.data[r * width + art] = 1.0;
                t.basis[r] = art;
                art += 1;
            }
            RowSense::Eq => {
                t.data[r * width + art] = 1.0;
                t.basis[r] = art;
                art += 1;
            }
        }
    }

    if n_art > 0 {
        // Phase 1: minimise the sum of artificials. The objective row holds
        // reduced costs of `max -sum(a)`, expressed in the starting basis.
        for c in 0..width {
            let mut v = 0.0;
            for r in 0..m {
                if t.basis[r] >= art_start {
                    v -= t.at(r, c);
                }
            }
            t.data[m * width + c] = v;
        }
        for c in art_start..width - 1 {
            t.data[m * width + c] = 0.0;
        }
        t.optimize(art_start);
        if -t.at(m, width - 1) > 1e-7 {
            return LpOutcome::Infeasible;
        }
        // drive remaining zero-valued artificials out of the basis
        for r in 0..m {
            if t.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| t.at(r, c).abs() > EPS) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // Phase 2 objective row: reduced costs of max c·x in the current basis.
    for c in 0..width {
        t.data[m * width + c] = 0.0;
    }
    for (j, &cj) in problem.objective.iter().enumerate() {
        t.data[m * width + j] = -cj;
    }
    for r in 0..m {
        let b = t.basis[r];
        if b < n {
            let cb = problem.objective[b];
            if cb != 0.0 {
                for c in 0..width {
                    let v = t.at(r, c);
                    t.data[m * width + c] += cb * v;
                }
            }
        }
    }
    if !t.optimize(art_start) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r);
        }
    }
    let value = problem
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum();
    LpOutcome::Optimal { x, value }
}
