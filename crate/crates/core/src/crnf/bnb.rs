//! Best-first branch and bound on binary programs with the LP relaxation
//! as the bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::lp::{solve_lp, LpOutcome, LpProblem, RowSense};
use super::{full_mask, IlpModel, IlpSolution, Sense, SolveStatus};

const INT_TOL: f64 = 1e-6;

struct Relaxed {
    value: f64,
    x: Vec<f64>,
}

/// Solves the relaxation with some variables fixed. Returns `None` when
/// the fixings are infeasible.
fn relax(model: &IlpModel, fixings: &[Option<bool>]) -> Option<Relaxed> {
    let n = model.num_vars();
    let mut free_index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for (j, f) in fixings.iter().enumerate() {
        if f.is_none() {
            free_index[j] = free.len();
            free.push(j);
        }
    }
    let constant: f64 = fixings
        .iter()
        .zip(model.objective())
        .filter(|(f, _)| **f == Some(true))
        .map(|(_, c)| c)
        .sum();

    let objective = free.iter().map(|&j| model.objective()[j]).collect();
    let mut lp = LpProblem::new(objective, vec![1.0; free.len()]);
    for c in model.constraints() {
        let mut rhs = c.rhs;
        let mut terms = Vec::with_capacity(c.terms.len());
        for &(j, a) in &c.terms {
            match fixings[j] {
                Some(true) => rhs -= a,
                Some(false) => {}
                None => terms.push((free_index[j], a)),
            }
        }
        let tol = 1e-9 * c.rhs.abs().max(1.0);
        if terms.is_empty() {
            let ok = match c.sense {
                Sense::Le => 0.0 <= rhs + tol,
                Sense::Eq => rhs.abs() <= tol,
            };
            if !ok {
                return None;
            }
            continue;
        }
        let sense = match c.sense {
            Sense::Le => RowSense::Le,
            Sense::Eq => RowSense::Eq,
        };
        lp.add_row(terms, sense, rhs);
    }

    match solve_lp(&lp) {
        LpOutcome::Optimal { x: fx, value } => {
            let mut x: Vec<f64> = fixings
                .iter()
                .map(|f| if *f == Some(true) { 1.0 } else { 0.0 })
                .collect();
            for (i, &j) in free.iter().enumerate() {
                x[j] = fx[i].clamp(0.0, 1.0);
            }
            Some(Relaxed {
                value: value + constant,
                x,
            })
        }
        LpOutcome::Infeasible => None,
        // Bounded variables; cannot happen.
        LpOutcome::Unbounded => None,
    }
}

pub(super) fn root_relaxation(model: &IlpModel) -> Option<f64> {
    relax(model, model.fixed()).map(|r| r.value)
}

/// Rounds an LP point down to a feasible flow: keep only integral-one edge
/// variables whose tail actually holds the description, propagating in
/// topological order.
fn repair(model: &IlpModel, x: &[f64]) -> Option<Vec<bool>> {
    let s = model.structure()?;
    let net = &s.net;
    let k = s.desc.count();
    let full = full_mask(k);
    let mut spectra = vec![0u64; net.node_count()];
    let mut carried = vec![0u64; net.edge_count()];
    for &v in net.topo_order() {
        if net.is_source_at(v) {
            spectra[v] = full;
        }
        // in-edges were settled when their tails were visited
        if !net.is_source_at(v) {
            spectra[v] = net.in_edges(v).iter().fold(0, |m, &e| m | carried[e]);
        }
        for &e in net.out_edges(v) {
            let mut m = 0u64;
            for c in 0..k {
                if x[s.layout.edge_var(e, c)] >= 1.0 - INT_TOL {
                    m |= 1 << c;
                }
            }
            carried[e] = m & spectra[v];
        }
    }
    let a = super::assignment_from_spectra(model, &spectra)?;
    let a = if s.symmetry_breaking {
        super::spectrum::canonical_colors(model, a)
    } else {
        a
    };
    model.is_feasible(&a).then_some(a)
}

struct Node {
    bound: f64,
    id: u64,
    fixings: Vec<Option<bool>>,
    x: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap on bound; earlier nodes first among equal bounds
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

pub(super) fn solve(
    model: &IlpModel,
    time_limit: Option<Duration>,
    warm: Option<Vec<bool>>,
) -> IlpSolution {
    let start = Instant::now();
    let integral = model.integral_objective();
    let usable = |bound: f64| {
        if integral {
            (bound + INT_TOL).floor()
        } else {
            bound
        }
    };

    let mut best: Option<(f64, Vec<bool>)> = warm.map(|w| (model.evaluate(&w), w));
    let mut explored = 0u64;
    let mut next_id = 0u64;
    let mut heap = BinaryHeap::new();

    let offer = |best: &mut Option<(f64, Vec<bool>)>, cand: Vec<bool>| {
        let v = model.evaluate(&cand);
        if best.as_ref().is_none_or(|(b, _)| v > *b + 1e-12) {
            *best = Some((v, cand));
        }
    };

    if let Some(root) = relax(model, model.fixed()) {
        heap.push(Node {
            bound: root.value,
            id: next_id,
            fixings: model.fixed().to_vec(),
            x: root.x,
        });
        next_id += 1;
    }

    let mut timed_out = false;
    while let Some(node) = heap.pop() {
        if let Some(limit) = time_limit {
            if start.elapsed() >= limit {
                heap.push(node);
                timed_out = true;
                break;
            }
        }
        if let Some((b, _)) = &best {
            if usable(node.bound) <= *b + 1e-9 {
                continue;
            }
        }
        explored += 1;

        if let Some(a) = repair(model, &node.x) {
            offer(&mut best, a);
        }

        // most-valued fractional variable, ties to the lowest index
        let mut branch: Option<(usize, f64)> = None;
        for (j, &v) in node.x.iter().enumerate() {
            if node.fixings[j].is_some() || v <= INT_TOL || v >= 1.0 - INT_TOL {
                continue;
            }
            if branch.is_none_or(|(_, bv)| v > bv + 1e-12) {
                branch = Some((j, v));
            }
        }

        let Some((j, _)) = branch else {
            let a: Vec<bool> = node.x.iter().map(|&v| v > 0.5).collect();
            if model.is_feasible(&a) {
                offer(&mut best, a);
            }
            continue;
        };

        for value in [true, false] {
            let mut fixings = node.fixings.clone();
            fixings[j] = Some(value);
            if let Some(r) = relax(model, &fixings) {
                if best
                    .as_ref()
                    .is_some_and(|(b, _)| usable(r.value) <= *b + 1e-9)
                {
                    continue;
                }
                heap.push(Node {
                    bound: r.value,
                    id: next_id,
                    fixings,
                    x: r.x,
                });
                next_id += 1;
            }
        }
    }

    let open_bound = heap
        .iter()
        .map(|n| usable(n.bound))
        .fold(f64::NEG_INFINITY, f64::max);
    match best {
        Some((value, a)) => IlpSolution {
            assignment: Some(a),
            objective_value: value,
            upper_bound: if timed_out { open_bound.max(value) } else { value },
            status: if timed_out {
                SolveStatus::TimedOut
            } else {
                SolveStatus::Optimal
            },
            nodes_explored: explored,
        },
        None => IlpSolution {
            assignment: None,
            objective_value: f64::NEG_INFINITY,
            upper_bound: if timed_out { open_bound } else { f64::NEG_INFINITY },
            status: if timed_out {
                SolveStatus::TimedOut
            } else {
                SolveStatus::Infeasible
            },
            nodes_explored: explored,
        },
    }
}
