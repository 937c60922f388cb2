use std::collections::BTreeMap;

use jnsc_core::crnf::{
    brute_force, brute_force_weighted, build_crnf_ilp, build_crnf_ilp_with,
    build_weighted_rnf_ilp, combinatorial_bound, extract_flow, lp_relaxation_bound, sink_counts,
    solve, solve_with, BuildOptions, Engine, Family, SolveOptions, BRUTE_FORCE_LIMIT,
};
use jnsc_core::netgen::{fig1_network, Edge, Network};
use jnsc_core::rainbow::{
    is_admissible, rainbow_flow_vector, validate_flow, DescriptionSet, DistortionModel, Drf,
};
use proptest::prelude::*;

/// Small random DAG: node 0 is the source, edges only go forward.
fn small_dag() -> impl Strategy<Value = (Network, usize)> {
    (2usize..=6, 1usize..=3)
        .prop_flat_map(|(n, k)| {
            let pairs: Vec<(u32, u32)> = (0..n as u32)
                .flat_map(|i| (i + 1..n as u32).map(move |j| (i, j)))
                .collect();
            let m = pairs.len();
            (
                Just(n),
                Just(k),
                Just(pairs),
                proptest::collection::vec(0u32..=3, m),
                proptest::collection::vec(any::<bool>(), m),
            )
        })
        .prop_filter_map("enumeration bound", |(n, k, pairs, caps, keep)| {
            let edges: Vec<Edge> = pairs
                .iter()
                .zip(caps.iter().zip(&keep))
                .filter(|(_, (_, &kp))| kp)
                .map(|(&(from, to), (&c, _))| Edge {
                    from,
                    to,
                    capacity: c as f64,
                })
                .collect();
            if edges.len() * k > BRUTE_FORCE_LIMIT {
                return None;
            }
            let nodes: Vec<u32> = (0..n as u32).collect();
            let sinks: Vec<u32> = (1..n as u32).collect();
            Network::new(nodes, edges, vec![0], sinks, None)
                .ok()
                .map(|net| (net, k))
        })
}

fn check_solution(net: &Network, desc: &DescriptionSet, engine: Engine) -> f64 {
    let model = build_crnf_ilp(net, desc);
    let sol = solve_with(&model, &SolveOptions { engine, ..Default::default() });
    assert!(sol.is_optimal());
    let a = sol.assignment.as_ref().unwrap();
    assert!(model.is_feasible(a));
    assert_eq!(model.evaluate(a), sol.objective_value);

    let flow = extract_flow(&sol, net, desc).unwrap();
    assert!(validate_flow(&flow, net).is_empty());
    assert!(is_admissible(&flow, net, desc).is_admissible());
    let q = rainbow_flow_vector(&flow, net);
    let counts = sink_counts(net, desc, a);
    assert_eq!(q.as_map(), &counts);
    sol.objective_value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn both_engines_match_enumeration((net, k) in small_dag()) {
        let desc = DescriptionSet::new(k, 1.0).unwrap();
        let truth = brute_force(&net, &desc).unwrap() as f64;
        prop_assert_eq!(check_solution(&net, &desc, Engine::SpectrumSearch), truth);
        prop_assert_eq!(check_solution(&net, &desc, Engine::LpBranchAndBound), truth);
    }

    #[test]
    fn bounds_sandwich_optimum((net, k) in small_dag()) {
        let desc = DescriptionSet::new(k, 1.0).unwrap();
        let model = build_crnf_ilp(&net, &desc);
        let opt = solve(&model, None).objective_value;
        let lp = lp_relaxation_bound(&model).unwrap();
        let comb = combinatorial_bound(&model).unwrap();
        prop_assert!(opt <= lp + 1e-6);
        prop_assert!(lp <= comb + 1e-6);
    }

    #[test]
    fn raising_a_capacity_never_hurts((net, k) in small_dag(), pick in any::<prop::sample::Index>()) {
        prop_assume!(net.edge_count() > 0);
        let desc = DescriptionSet::new(k, 1.0).unwrap();
        let e = pick.index(net.edge_count());
        let before = solve(&build_crnf_ilp(&net, &desc), None).objective_value;
        let raised = net.with_capacity(e, net.edges()[e].capacity + 1.0).unwrap();
        let after = solve(&build_crnf_ilp(&raised, &desc), None).objective_value;
        prop_assert!(after >= before);
    }

    #[test]
    fn one_more_description_never_hurts((net, k) in small_dag()) {
        let lo = solve(&build_crnf_ilp(&net, &DescriptionSet::new(k, 1.0).unwrap()), None);
        let hi = solve(&build_crnf_ilp(&net, &DescriptionSet::new(k + 1, 1.0).unwrap()), None);
        prop_assert!(hi.objective_value >= lo.objective_value);
    }

    #[test]
    fn symmetry_rows_do_not_change_optimum((net, k) in small_dag()) {
        let desc = DescriptionSet::new(k, 1.0).unwrap();
        let plain = solve(&build_crnf_ilp(&net, &desc), None);
        let model = build_crnf_ilp_with(&net, &desc, BuildOptions { symmetry_breaking: true });
        prop_assert_eq!(model.count_constraints(Family::Symmetry), k - 1);
        for engine in [Engine::SpectrumSearch, Engine::LpBranchAndBound] {
            let sym = solve_with(&model, &SolveOptions { engine, ..Default::default() });
            prop_assert_eq!(sym.objective_value, plain.objective_value);
            prop_assert!(model.is_feasible(sym.assignment.as_ref().unwrap()));
        }
    }

    #[test]
    fn weighted_model_matches_weighted_enumeration(
        (net, k) in small_dag(),
        raw in proptest::collection::vec(0.0f64..1.0, 3),
        weights in proptest::collection::vec(0.5f64..2.0, 6),
    ) {
        let desc = DescriptionSet::new(k, 1.0).unwrap();
        // δ(0) = 1, then any non-increasing sequence
        let mut levels = vec![1.0];
        let mut sorted = raw[..k].to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        levels.extend(sorted);
        let dm = DistortionModel::new(levels, Drf::unit_gaussian()).unwrap();
        let p: BTreeMap<u32, f64> = net.sinks().iter().zip(&weights).map(|(&t, &w)| (t, w)).collect();
        let truth = brute_force_weighted(&net, &desc, &dm, &p).unwrap();
        let model = build_weighted_rnf_ilp(&net, &desc, &dm, &p);
        for engine in [Engine::SpectrumSearch, Engine::LpBranchAndBound] {
            let sol = solve_with(&model, &SolveOptions { engine, ..Default::default() });
            prop_assert!((sol.objective_value - truth).abs() < 1e-9, "{engine:?}: {} vs {truth}", sol.objective_value);
            prop_assert!(model.is_feasible(sol.assignment.as_ref().unwrap()));
        }
    }
}

#[test]
fn fixture_optimum_and_paths() {
    for c in [1.0, 2.5] {
        let net = fig1_network(c);
        let desc = DescriptionSet::new(2, c).unwrap();
        assert_eq!(check_solution(&net, &desc, Engine::SpectrumSearch), 6.0);
        assert_eq!(check_solution(&net, &desc, Engine::LpBranchAndBound), 6.0);
        assert_eq!(brute_force(&net, &desc).unwrap(), 6);
    }
}

#[test]
fn convex_distortion_keeps_the_fixture_flow() {
    let net = fig1_network(1.0);
    let desc = DescriptionSet::new(2, 1.0).unwrap();
    let dm = DistortionModel::new(vec![1.0, 0.4, 0.1], Drf::unit_gaussian()).unwrap();
    let w = BTreeMap::new();
    let model = build_weighted_rnf_ilp(&net, &desc, &dm, &w);
    let sol = solve(&model, None);
    // sinks 2, 3 get one description, 4, 5 get two
    let expected = 2.0 * (1.0 - 0.4) + 2.0 * (1.0 - 0.1);
    assert!((sol.objective_value - expected).abs() < 1e-12);
    assert!((brute_force_weighted(&net, &desc, &dm, &w).unwrap() - expected).abs() < 1e-12);
    let q = sink_counts(&net, &desc, sol.assignment.as_ref().unwrap());
    assert_eq!(q.values().copied().collect::<Vec<_>>(), vec![1, 1, 2, 2]);
}

#[test]
fn empty_assignment_gives_empty_flow() {
    // rate above every capacity: nothing can move
    let net = fig1_network(1.0);
    let desc = DescriptionSet::new(2, 2.0).unwrap();
    let sol = solve(&build_crnf_ilp(&net, &desc), None);
    assert_eq!(sol.objective_value, 0.0);
    assert!(extract_flow(&sol, &net, &desc).unwrap().is_empty());
}
