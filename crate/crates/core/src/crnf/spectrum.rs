//! Exact search over node spectra for structured rainbow-flow models.
//!
//! Nodes are decided in topological order. Once a node's parents are
//! decided, the description sets it can receive are the independent sets
//! of a transversal matroid (descriptions matched to in-edge slots), and a
//! larger set never hurts: downstream edges choose subsets and gains are
//! non-decreasing in the count. So only bases of that matroid are tried.
//! Descriptions that no decided node tells apart are interchangeable, so a
//! basis is chosen per class of equivalent descriptions by count, taking
//! the lowest-numbered members. Subtrees are cut with the propagated
//! per-node count bound.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::{
    assignment_from_spectra, full_mask, IlpModel, IlpSolution, RnfStructure,
    SolveStatus,
};

#[derive(Clone, Copy)]
struct Parent {
    node: usize,
    slots: usize,
}

/// Matches descriptions of `mask` to in-edges `(edge, available, slots)`.
/// Returns the set carried by each edge, or `None` if not every description
/// can be delivered.
pub(super) fn route(mask: u64, parents: &[(usize, u64, usize)]) -> Option<Vec<(usize, u64)>> {
    let avail: Vec<(u64, usize)> = parents.iter().map(|&(_, a, s)| (a, s)).collect();
    let (matched, assigned) = max_matching(mask, &avail);
    if matched != mask {
        return None;
    }
    Some(
        parents
            .iter()
            .zip(assigned)
            .map(|(&(e, _, _), colors)| (e, colors.iter().fold(0u64, |m, &c| m | 1 << c)))
            .collect(),
    )
}

/// Maximum b-matching of the descriptions in `mask` onto parents with
/// `(available, slots)`. Returns the matched set and per-parent colors.
fn max_matching(mask: u64, parents: &[(u64, usize)]) -> (u64, Vec<Vec<u32>>) {
    fn augment(
        c: u32,
        parents: &[(u64, usize)],
        assigned: &mut [Vec<u32>],
        visited: &mut [bool],
    ) -> bool {
        for i in 0..parents.len() {
            let (avail, slots) = parents[i];
            if visited[i] || avail >> c & 1 == 0 || slots == 0 {
                continue;
            }
            visited[i] = true;
            if assigned[i].len() < slots {
                assigned[i].push(c);
                return true;
            }
            for j in 0..assigned[i].len() {
                let other = assigned[i][j];
                if augment(other, parents, assigned, visited) {
                    assigned[i][j] = c;
                    return true;
                }
            }
        }
        false
    }

    let mut assigned = vec![Vec::new(); parents.len()];
    let mut matched = 0u64;
    let mut rest = mask;
    while rest != 0 {
        let c = rest.trailing_zeros();
        rest &= rest - 1;
        let mut visited = vec![false; parents.len()];
        if augment(c, parents, &mut assigned, &mut visited) {
            matched |= 1 << c;
        }
    }
    (matched, assigned)
}

/// Size of a maximum b-matching of `mask` onto `(set, capacity)` offers.
/// `assigned` is scratch space.
fn matched_count(mask: u64, offers: &[(u64, usize)], assigned: &mut Vec<u64>) -> usize {
    fn augment(c: u32, offers: &[(u64, usize)], assigned: &mut [u64], visited: &mut u64) -> bool {
        for i in 0..offers.len() {
            let (set, cap) = offers[i];
            if *visited >> i & 1 == 1 || set >> c & 1 == 0 {
                continue;
            }
            *visited |= 1 << i;
            if (assigned[i].count_ones() as usize) < cap {
                assigned[i] |= 1 << c;
                return true;
            }
            let mut held = assigned[i];
            while held != 0 {
                let other = held.trailing_zeros();
                held &= held - 1;
                if augment(other, offers, assigned, visited) {
                    assigned[i] = (assigned[i] & !(1 << other)) | 1 << c;
                    return true;
                }
            }
        }
        false
    }

    if offers.len() > 64 {
        return max_matching(mask, offers).0.count_ones() as usize;
    }
    let total_cap: usize = offers.iter().map(|o| o.1).sum();
    if total_cap == 0 {
        return 0;
    }
    assigned.clear();
    assigned.resize(offers.len(), 0);
    let mut count = 0;
    let mut rest = mask;
    while rest != 0 && count < total_cap {
        let c = rest.trailing_zeros();
        rest &= rest - 1;
        let mut visited = 0u64;
        if augment(c, offers, assigned, &mut visited) {
            count += 1;
        }
    }
    count
}

/// Maximum number of edge-disjoint-by-slot unit flows from the sources to
/// `target`, capped at `limit`. Every description at `target` needs its own
/// unit, so this bounds the count there.
/// `links[u]` lists `(w, i)` with `parents[w][i].node == u`.
fn cut_bound(
    parents: &[Vec<Parent>],
    links: &[Vec<(usize, usize)>],
    is_source: &[bool],
    target: usize,
    limit: usize,
) -> usize {
    if is_source[target] {
        return limit;
    }
    // flow runs parent -> child; the search walks backwards from the target
    let n = parents.len();
    let children = links;
    let mut used: Vec<Vec<usize>> = parents.iter().map(|ps| vec![0; ps.len()]).collect();
    let mut flow = 0;
    while flow < limit {
        // BFS from target over edges with residual capacity
        let mut prev: Vec<Option<(usize, usize, bool)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[target] = true;
        let mut queue = std::collections::VecDeque::from([target]);
        let mut found = None;
        while let Some(x) = queue.pop_front() {
            if is_source[x] {
                found = Some(x);
                break;
            }
            // forward residual: parent edge (p -> x) with spare slots
            for (i, p) in parents[x].iter().enumerate() {
                if !seen[p.node] && used[x][i] < p.slots {
                    seen[p.node] = true;
                    prev[p.node] = Some((x, i, true));
                    queue.push_back(p.node);
                }
            }
            // backward residual: undo flow on (x -> w)
            for &(w, i) in &children[x] {
                if !seen[w] && used[w][i] > 0 {
                    seen[w] = true;
                    prev[w] = Some((w, i, false));
                    queue.push_back(w);
                }
            }
        }
        let Some(mut at) = found else {
            break;
        };
        while at != target {
            let (w, i, forward) = prev[at].expect("path back to target");
            if forward {
                used[w][i] += 1;
                at = w;
            } else {
                used[w][i] -= 1;
                at = parents[w][i].node;
            }
        }
        flow += 1;
    }
    flow
}

/// Relabels descriptions so that usage counts `Σ_v y[v][k]` are
/// non-increasing in `k`. Objective and feasibility are unchanged.
pub(super) fn canonical_colors(model: &IlpModel, a: Vec<bool>) -> Vec<bool> {
    let Some(s) = model.structure() else {
        return a;
    };
    let k = s.desc.count();
    let l = s.layout;
    let usage: Vec<usize> = (0..k)
        .map(|c| (0..l.nodes).filter(|&v| a[l.node_var(v, c)]).count())
        .collect();
    let mut perm: Vec<usize> = (0..k).collect();
    perm.sort_by(|&x, &y| usage[y].cmp(&usage[x]).then(x.cmp(&y)));
    let mut out = a.clone();
    for (new, &old) in perm.iter().enumerate() {
        for e in 0..l.edges {
            out[l.edge_var(e, new)] = a[l.edge_var(e, old)];
        }
        for v in 0..l.nodes {
            out[l.node_var(v, new)] = a[l.node_var(v, old)];
        }
    }
    out
}

/// Limits for an incomplete pass: at most `discrepancies` departures from
/// the preferred candidate along any branch, and a node budget.
#[derive(Clone, Copy)]
struct Probe {
    discrepancies: usize,
    node_limit: u64,
}

/// Node budget of each incomplete pass run before the exhaustive search.
const PROBE_NODES: u64 = 50_000;

struct Search<'a> {
    gains: &'a [Vec<f64>],
    integral: bool,
    order: Vec<usize>,
    parents: Vec<Vec<Parent>>,
    children: Vec<Vec<usize>>,
    cut: Vec<usize>,
    has_future: Vec<bool>,

    spec: Vec<u64>,
    decided: Vec<bool>,
    classes: Vec<u64>,
    freq: Vec<u32>,
    acc: f64,
    ub: Vec<usize>,
    reach: Vec<u64>,
    future: f64,
    pos: Vec<usize>,
    trail: Vec<(usize, usize, u64)>,
    dirty: Vec<bool>,
    queue: BinaryHeap<Reverse<usize>>,
    offers: Vec<(u64, usize)>,
    scratch: Vec<u64>,

    best: f64,
    best_spec: Option<Vec<u64>>,
    explored: u64,
    probe: Option<Probe>,
    deadline: Option<Instant>,
    timed_out: bool,
    open_bound: f64,
}

impl<'a> Search<'a> {
    fn new(s: &'a RnfStructure, integral: bool) -> Self {
        let net = &s.net;
        let k = s.desc.count();
        let full = full_mask(k);
        let n = net.node_count();
        let mut spec = vec![0u64; n];
        let mut decided = vec![false; n];
        let mut acc = 0.0;
        for v in 0..n {
            if net.is_source_at(v) {
                spec[v] = full;
                decided[v] = true;
                acc += s.gains[v][k];
            }
        }
        let order: Vec<usize> = net
            .topo_order()
            .iter()
            .copied()
            .filter(|&v| !net.is_source_at(v))
            .collect();
        let parents: Vec<Vec<Parent>> = (0..n)
            .map(|v| {
                net.in_edges(v)
                    .iter()
                    .filter_map(|&e| {
                        let (u, _) = net.endpoints(e);
                        let slots = s.desc.slots(net.edges()[e].capacity);
                        (slots > 0).then_some(Parent { node: u, slots })
                    })
                    .collect()
            })
            .collect();
        let is_source: Vec<bool> = (0..n).map(|v| net.is_source_at(v)).collect();
        let mut links: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (w, ps) in parents.iter().enumerate() {
            for (i, p) in ps.iter().enumerate() {
                links[p.node].push((w, i));
            }
        }
        let cut: Vec<usize> = (0..n)
            .map(|v| cut_bound(&parents, &links, &is_source, v, k))
            .collect();
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (w, ps) in parents.iter().enumerate() {
            if net.is_source_at(w) {
                continue;
            }
            for p in ps {
                if !children[p.node].contains(&w) {
                    children[p.node].push(w);
                }
            }
        }
        let has_future: Vec<bool> = (0..n)
            .map(|v| {
                net.out_edges(v).iter().any(|&e| {
                    let (_, w) = net.endpoints(e);
                    !net.is_source_at(w) && s.desc.slots(net.edges()[e].capacity) > 0
                })
            })
            .collect();
        Search {
            gains: &s.gains,
            integral,
            order,
            parents,
            children,
            cut,
            has_future,
            spec,
            decided,
            classes: if k > 0 { vec![full] } else { vec![] },
            freq: vec![0; k],
            acc,
            ub: vec![0; n],
            reach: vec![0; n],
            future: 0.0,
            pos,
            trail: Vec::new(),
            dirty: vec![false; n],
            queue: BinaryHeap::new(),
            offers: Vec::new(),
            scratch: Vec::new(),
            best: f64::NEG_INFINITY,
            best_spec: None,
            explored: 0,
            probe: None,
            deadline: None,
            timed_out: false,
            open_bound: f64::NEG_INFINITY,
        }
    }

    fn usable(&self, bound: f64) -> f64 {
        if self.integral {
            (bound + 1e-6).floor()
        } else {
            bound
        }
    }

    fn parent_avail(&self, v: usize) -> Vec<(u64, usize)> {
        self.parents[v]
            .iter()
            .map(|p| (self.spec[p.node], p.slots))
            .collect()
    }

    /// Count cap and reachable set of an undecided node: a matching of
    /// the descriptions its parents could hold onto the parents, each
    /// offering at most `min(slots, parent cap)`.
    fn estimate(&mut self, w: usize) -> (usize, u64) {
        let mut offers = std::mem::take(&mut self.offers);
        offers.clear();
        let mut union = 0u64;
        for p in &self.parents[w] {
            let (set, cap) = if self.decided[p.node] {
                let a = self.spec[p.node];
                (a, a.count_ones() as usize)
            } else {
                (self.reach[p.node], self.ub[p.node])
            };
            let cap = cap.min(p.slots);
            if cap > 0 && set != 0 {
                union |= set;
                offers.push((set, cap));
            }
        }
        let q = matched_count(union, &offers, &mut self.scratch).min(self.cut[w]);
        self.offers = offers;
        (q, if q == 0 { 0 } else { union })
    }

    /// Estimates every node from scratch; the bound is `acc + future`.
    fn init_bound(&mut self) -> f64 {
        self.future = 0.0;
        for i in 0..self.order.len() {
            let w = self.order[i];
            let (q, reach) = self.estimate(w);
            self.ub[w] = q;
            self.reach[w] = reach;
            self.future += self.gains[w][q];
        }
        self.acc + self.future
    }

    /// Re-estimates undecided descendants of `v` whose inputs changed.
    fn propagate(&mut self, v: usize) {
        for i in 0..self.children[v].len() {
            let w = self.children[v][i];
            if !self.decided[w] && !self.dirty[w] {
                self.dirty[w] = true;
                self.queue.push(Reverse(self.pos[w]));
            }
        }
        while let Some(Reverse(i)) = self.queue.pop() {
            let w = self.order[i];
            self.dirty[w] = false;
            let (q, reach) = self.estimate(w);
            if q == self.ub[w] && reach == self.reach[w] {
                continue;
            }
            self.trail.push((w, self.ub[w], self.reach[w]));
            self.future += self.gains[w][q] - self.gains[w][self.ub[w]];
            self.ub[w] = q;
            self.reach[w] = reach;
            for j in 0..self.children[w].len() {
                let c = self.children[w][j];
                if !self.decided[c] && !self.dirty[c] {
                    self.dirty[c] = true;
                    self.queue.push(Reverse(self.pos[c]));
                }
            }
        }
    }

    fn candidates(&self, v: usize) -> Vec<u64> {
        let avail = self.parent_avail(v);
        let union = avail.iter().fold(0u64, |m, &(a, s)| if s > 0 { m | a } else { m });
        let (basis, _) = max_matching(union, &avail);
        if basis == union || !self.has_future[v] || avail.len() > 64 {
            return vec![basis];
        }
        let rank = basis.count_ones() as usize;

        // classes inside the union, grouped by which parents offer them
        let mut groups: Vec<(u64, Vec<u64>)> = Vec::new();
        for &cls in &self.classes {
            if cls & union == 0 {
                continue;
            }
            debug_assert_eq!(cls & union, cls);
            let pattern = avail
                .iter()
                .enumerate()
                .filter(|(_, (a, s))| *s > 0 && a & cls != 0)
                .fold(0u64, |m, (i, _)| m | 1 << i);
            match groups.iter_mut().find(|(p, _)| *p == pattern) {
                Some((_, members)) => members.push(cls),
                None => groups.push((pattern, vec![cls])),
            }
        }
        let sizes: Vec<usize> = groups
            .iter()
            .map(|(_, m)| m.iter().map(|c| c.count_ones() as usize).sum())
            .collect();

        let mut out = Vec::new();
        let mut totals = vec![0usize; groups.len()];
        self.pattern_totals(0, rank, &sizes, &mut totals, &groups, &avail, &mut out);

        out.sort_unstable();
        out.dedup();
        let mut scratch = Vec::new();
        let mut offers = Vec::new();
        let mut keyed: Vec<(usize, u32, u64)> = out
            .into_iter()
            .map(|m| (self.lookahead(v, m, &mut offers, &mut scratch), self.rarity(m), m))
            .collect();
        keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        keyed.into_iter().map(|(_, _, m)| m).collect()
    }

    /// How often the descriptions of `mask` already occur at decided nodes.
    fn rarity(&self, mask: u64) -> u32 {
        let mut s = 0;
        let mut r = mask;
        while r != 0 {
            s += self.freq[r.trailing_zeros() as usize];
            r &= r - 1;
        }
        s
    }

    /// Descriptions the children of `v` could collect from their decided
    /// parents if `v` held `mask`.
    fn lookahead(
        &self,
        v: usize,
        mask: u64,
        offers: &mut Vec<(u64, usize)>,
        scratch: &mut Vec<u64>,
    ) -> usize {
        let mut total = 0;
        for &w in &self.children[v] {
            offers.clear();
            let mut union = 0u64;
            for p in &self.parents[w] {
                let set = if p.node == v {
                    mask
                } else if self.decided[p.node] {
                    self.spec[p.node]
                } else {
                    continue;
                };
                union |= set;
                offers.push((set, p.slots));
            }
            total += matched_count(union, offers, scratch);
        }
        total
    }

    #[allow(clippy::too_many_arguments)]
    fn pattern_totals(
        &self,
        g: usize,
        remaining: usize,
        sizes: &[usize],
        totals: &mut Vec<usize>,
        groups: &[(u64, Vec<u64>)],
        avail: &[(u64, usize)],
        out: &mut Vec<u64>,
    ) {
        if g == groups.len() {
            if remaining != 0 {
                return;
            }
            // representative set: lowest members of each group
            let mut rep = 0u64;
            for (gi, (_, members)) in groups.iter().enumerate() {
                rep |= lowest_across(members, totals[gi]);
            }
            if max_matching(rep, avail).0 != rep {
                return;
            }
            let mut acc = Vec::new();
            for (gi, (_, members)) in groups.iter().enumerate() {
                acc.push(distributions(members, totals[gi]));
            }
            let mut partial = vec![0u64];
            for options in acc {
                let mut next = Vec::with_capacity(partial.len() * options.len());
                for &p in &partial {
                    for &o in &options {
                        next.push(p | o);
                    }
                }
                partial = next;
            }
            out.extend(partial);
            return;
        }
        let rest: usize = sizes[g + 1..].iter().sum();
        let lo = remaining.saturating_sub(rest);
        let hi = sizes[g].min(remaining);
        for t in (lo..=hi).rev() {
            totals[g] = t;
            self.pattern_totals(g + 1, remaining - t, sizes, totals, groups, avail, out);
        }
    }

    fn decide(&mut self, v: usize, mask: u64) -> (Vec<u64>, usize) {
        self.spec[v] = mask;
        self.decided[v] = true;
        self.acc += self.gains[v][mask.count_ones() as usize];
        self.future -= self.gains[v][self.ub[v]];
        let mut r = mask;
        while r != 0 {
            self.freq[r.trailing_zeros() as usize] += 1;
            r &= r - 1;
        }
        let saved = self.classes.clone();
        let mut refined = Vec::with_capacity(self.classes.len() + 4);
        for &c in &self.classes {
            let inside = c & mask;
            let outside = c & !mask;
            if inside != 0 {
                refined.push(inside);
            }
            if outside != 0 {
                refined.push(outside);
            }
        }
        self.classes = refined;
        let mark = self.trail.len();
        self.propagate(v);
        (saved, mark)
    }

    fn undo(&mut self, v: usize, mask: u64, (saved, mark): (Vec<u64>, usize)) {
        while self.trail.len() > mark {
            let (w, q, reach) = self.trail.pop().expect("trail entry");
            self.future += self.gains[w][q] - self.gains[w][self.ub[w]];
            self.ub[w] = q;
            self.reach[w] = reach;
        }
        self.classes = saved;
        let mut r = mask;
        while r != 0 {
            self.freq[r.trailing_zeros() as usize] -= 1;
            r &= r - 1;
        }
        self.acc -= self.gains[v][mask.count_ones() as usize];
        self.future += self.gains[v][self.ub[v]];
        self.decided[v] = false;
        self.spec[v] = 0;
    }

    fn dfs(&mut self, d: usize, bound: f64) {
        self.explored += 1;
        if self.explored.is_multiple_of(256) {
            if let Some(dl) = self.deadline {
                if Instant::now() >= dl {
                    self.timed_out = true;
                }
            }
        }
        if self.timed_out {
            self.open_bound = self.open_bound.max(self.usable(bound));
            return;
        }
        if d == self.order.len() {
            if self.acc > self.best + 1e-9 {
                self.best = self.acc;
                self.best_spec = Some(self.spec.clone());
            }
            return;
        }
        let v = self.order[d];
        let budget = self.probe;
        for (i, mask) in self.candidates(v).into_iter().enumerate() {
            if let Some(p) = budget {
                if i > 0 && p.discrepancies == 0 || self.explored >= p.node_limit {
                    break;
                }
                if i > 0 {
                    self.probe = Some(Probe {
                        discrepancies: p.discrepancies - 1,
                        ..p
                    });
                }
            }
            let saved = self.decide(v, mask);
            let b = self.acc + self.future;
            if self.usable(b) > self.best + 1e-9 {
                if self.timed_out {
                    self.open_bound = self.open_bound.max(self.usable(b));
                } else {
                    self.dfs(d + 1, b);
                }
            }
            self.undo(v, mask, saved);
            self.probe = budget;
        }
    }
}

/// Lowest `count` colors, filling classes in order.
fn lowest_across(members: &[u64], mut count: usize) -> u64 {
    let mut out = 0u64;
    for &cls in members {
        let take = count.min(cls.count_ones() as usize);
        out |= lowest(cls, take);
        count -= take;
    }
    out
}

fn lowest(mut cls: u64, take: usize) -> u64 {
    let mut out = 0u64;
    for _ in 0..take {
        let bit = cls & cls.wrapping_neg();
        out |= bit;
        cls &= !bit;
    }
    out
}

/// All ways to take `total` colors from the classes, lowest members first
/// within a class.
fn distributions(members: &[u64], total: usize) -> Vec<u64> {
    fn rec(members: &[u64], i: usize, left: usize, cur: u64, out: &mut Vec<u64>) {
        if i == members.len() {
            if left == 0 {
                out.push(cur);
            }
            return;
        }
        let rest: usize = members[i + 1..].iter().map(|c| c.count_ones() as usize).sum();
        let size = members[i].count_ones() as usize;
        let lo = left.saturating_sub(rest);
        for t in (lo..=size.min(left)).rev() {
            rec(members, i + 1, left - t, cur | lowest(members[i], t), out);
        }
    }
    let mut out = Vec::new();
    rec(members, 0, total, 0, &mut out);
    out
}

pub(super) fn solve(
    model: &IlpModel,
    s: &RnfStructure,
    time_limit: Option<Duration>,
    warm: Option<Vec<bool>>,
) -> IlpSolution {
    let mut search = Search::new(s, model.integral_objective());
    search.deadline = time_limit.map(|t| Instant::now() + t);

    let mut warm_value = f64::NEG_INFINITY;
    if let Some(w) = &warm {
        warm_value = model.evaluate(w);
        search.best = warm_value;
    }

    let root = search.init_bound();
    // limited-discrepancy passes find good incumbents before the full search
    for discrepancies in 0..=2 {
        search.probe = Some(Probe {
            discrepancies,
            node_limit: search.explored + PROBE_NODES,
        });
        search.dfs(0, root);
    }
    search.probe = None;
    if search.timed_out {
        // the passes skip subtrees, so only the root bound is proven
        search.open_bound = search.usable(root);
    } else {
        search.dfs(0, root);
    }

    let finish = |assignment: Vec<bool>, value: f64, search: &Search| {
        let timed_out = search.timed_out;
        IlpSolution {
            assignment: Some(assignment),
            objective_value: value,
            upper_bound: if timed_out {
                search.open_bound.max(value)
            } else {
                value
            },
            status: if timed_out {
                SolveStatus::TimedOut
            } else {
                SolveStatus::Optimal
            },
            nodes_explored: search.explored,
        }
    };

    match (&search.best_spec, warm) {
        (Some(spec), _) => {
            let mut a = assignment_from_spectra(model, spec)
                .expect("searched spectra are deliverable");
            if s.symmetry_breaking {
                a = canonical_colors(model, a);
            }
            debug_assert!(model.is_feasible(&a));
            let value = model.evaluate(&a);
            finish(a, value, &search)
        }
        (None, Some(w)) => finish(w, warm_value, &search),
        (None, None) => {
            // only reachable with a zero time limit; fall back to the empty flow
            let spec = vec![0u64; s.net.node_count()];
            let a = assignment_from_spectra(model, &spec).expect("empty flow is deliverable");
            let value = model.evaluate(&a);
            let mut sol = finish(a, value, &search);
            sol.upper_bound = sol.upper_bound.max(root);
            sol
        }
    }
}
