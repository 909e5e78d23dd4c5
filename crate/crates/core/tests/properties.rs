mod common;

use common::*;
use local_lmo::rules::RadiusRule;
use local_lmo::solvers::{run, sample_index, Method, Rule, SolverConfig};
use local_lmo::{local_lmo, ConstraintSet, LocalBall};
use proptest::prelude::*;
use rand::Rng;

fn instance() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 0..FAMILIES.len(), 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn projection_is_idempotent_and_nonexpansive((seed, fam, d) in instance()) {
        let mut r = rng(seed);
        let set = random_set(&mut r, FAMILIES[fam], d);
        let x = uniform(&mut r, d, -6.0, 6.0);
        let y = uniform(&mut r, d, -6.0, 6.0);
        let px = set.project(&x).unwrap();
        let py = set.project(&y).unwrap();
        prop_assert!(set.contains(&px, 1e-9).unwrap());
        prop_assert!(set.project(&px).unwrap().dist(&px) <= 1e-12 * (1.0 + px.norm()));
        prop_assert!(px.dist(&py) <= x.dist(&y) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn local_lmo_is_feasible_and_beats_sampled_points((seed, fam, d) in instance()) {
        let mut r = rng(seed);
        let set = random_set(&mut r, FAMILIES[fam], d);
        let x = feasible_point(&mut r, &set);
        let t = 10f64.powf(r.gen_range(-2.0..0.5));
        let g = uniform(&mut r, d, -3.0, 3.0);
        let ball = LocalBall::new(x.clone(), t);
        let z = local_lmo(&set, &ball, &g).unwrap();
        prop_assert!(set.contains(&z, 1e-9).unwrap());
        prop_assert!(z.dist(&x) <= t * (1.0 + 1e-12) + 1e-12);
        let best = g.dot(&z);
        for _ in 0..50 {
            // x + s (Proj(p) - x) stays in the set by convexity
            let p = set.project(&uniform(&mut r, d, -6.0, 6.0)).unwrap();
            let dir = &p - &x;
            let n = dir.norm();
            if n == 0.0 {
                continue;
            }
            let s = r.gen_range(0.0..1.0) * (t / n).min(1.0);
            let w = x.axpy(s, &dir);
            prop_assert!(best <= g.dot(&w) + 1e-10 * (1.0 + g.norm() * t));
        }
    }

    #[test]
    fn theta_rule_steps_are_fejer((seed, fam, d) in instance()) {
        let mut r = rng(seed);
        let set = random_set(&mut r, FAMILIES[fam], d);
        let obj = quadratic_with_optimum(&mut r, &set);
        let x0 = feasible_point(&mut r, &set);
        let cfg = SolverConfig::new(Method::LocalLMO, Rule::Radius(RadiusRule::StronglyConvexTheta), 10);
        let traj = run(&set, &obj, &x0, &cfg).unwrap();
        let x_star = &obj.optimum().unwrap().x_star;
        for (k, t) in traj.steps.iter().enumerate() {
            let before = traj.iterates[k].dist_sq(x_star);
            let after = traj.iterates[k + 1].dist_sq(x_star);
            prop_assert!(after <= before - t * t + 1e-10 * (1.0 + before));
        }
    }

    #[test]
    fn sets_round_trip_through_toml((seed, fam, d) in instance()) {
        let mut r = rng(seed);
        let set = random_set(&mut r, FAMILIES[fam], d);
        #[derive(serde::Serialize, serde::Deserialize)]
        struct Wrap { set: ConstraintSet }
        let text = toml::to_string(&Wrap { set: set.clone() }).unwrap();
        let back: Wrap = toml::from_str(&text).unwrap();
        prop_assert_eq!(back.set, set);
    }

    #[test]
    fn sampling_is_in_range_and_repeatable(seed in any::<u64>(), k in 0usize..10_000, n in 1usize..50) {
        let i = sample_index(seed, k, n);
        prop_assert!(i < n);
        prop_assert_eq!(i, sample_index(seed, k, n));
    }
}
