use jnsc_core::mdc::{
    objective, optimize_profile, ozarow_balanced_optimum, ozarow_joint_bound, project_to_simplex,
    OptimizationProblem,
};
use jnsc_core::rainbow::Drf;
use proptest::prelude::*;

/// Every point of the simplex in `k` coordinates with spacing `1/steps`.
fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn fill(k: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            fill(k, left - c, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    fill(k, steps, steps, &mut Vec::new(), &mut out);
    out
}

fn problem_strategy() -> impl Strategy<Value = (OptimizationProblem, usize)> {
    (1usize..=4).prop_flat_map(|k| {
        (
            proptest::collection::vec(0..=k, 1..10),
            proptest::collection::vec(0.1f64..3.0, 10),
            0.25f64..3.0,
        )
            .prop_map(move |(q, p, rate)| {
                let p = p[..q.len()].to_vec();
                (OptimizationProblem::new(q, p, rate, Drf::unit_gaussian()).unwrap(), k)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimum_beats_the_simplex_grid((problem, k) in problem_strategy()) {
        let opt = optimize_profile(&problem, k).unwrap();
        prop_assert!((opt.y.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(opt.y.iter().all(|&v| v >= 0.0));
        let best = simplex_grid(k, 20)
            .iter()
            .map(|y| objective(y, &problem))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(opt.objective <= best + 1e-9, "{} vs grid {}", opt.objective, best);
    }

    #[test]
    fn argmin_ignores_weight_scale((problem, k) in problem_strategy(), scale in 0.1f64..10.0) {
        let scaled = OptimizationProblem::new(
            problem.rfv.clone(),
            problem.weights.iter().map(|w| w * scale).collect(),
            problem.rate,
            problem.drf.clone(),
        )
        .unwrap();
        let a = optimize_profile(&problem, k).unwrap();
        let b = optimize_profile(&scaled, k).unwrap();
        prop_assert!((b.objective - scale * a.objective).abs() <= 1e-9 * scale.max(1.0));
        prop_assert!((objective(&b.y, &problem) - a.objective).abs() <= 1e-9);
    }

    #[test]
    fn projection_lands_on_simplex(v in proptest::collection::vec(-5.0f64..5.0, 1..12)) {
        let y = project_to_simplex(&v);
        prop_assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(y.iter().all(|&x| x >= 0.0));
        let again = project_to_simplex(&y);
        prop_assert!(y.iter().zip(&again).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

#[test]
fn two_description_average_falls_with_capacity() {
    let mut prev = f64::INFINITY;
    for i in 1..=60 {
        let c = i as f64 * 0.05;
        let avg = ozarow_balanced_optimum(c).unwrap().average();
        assert!(avg < prev, "C = {c}");
        prev = avg;
    }
}

#[test]
fn balanced_optimum_matches_a_fine_grid() {
    for c in [0.05, 0.3, 1.0, 2.2] {
        let lo = 2f64.powf(-2.0 * c);
        let hi = (1.0 + 2f64.powf(-4.0 * c)) / 2.0;
        let n = 200_000;
        let grid = (0..=n)
            .map(|i| {
                let d = lo + (hi - lo) * i as f64 / n as f64;
                (d + ozarow_joint_bound(d, c).unwrap()) / 2.0
            })
            .fold(f64::INFINITY, f64::min);
        let got = ozarow_balanced_optimum(c).unwrap().average();
        assert!(got <= grid + 1e-9 && grid - got < 1e-6, "C = {c}: {got} vs {grid}");
    }
}
