mod common;

use common::{bisect, log_delta_oracle, log_uniform, rel, trigamma_series, zoomed_grid_min};
use dirdp::accountant::{
    alpha_min_closed_form, alpha_min_for_target, compose, compose_all, g_of_lambda, log_delta_at,
    r_for_target, rdp_epsilon, rdp_to_approx_dp, PriorFloor, PriorSpec, RdpGuarantee, SensitivityBounds,
};
use dirdp::divergence::{renyi_divergence, DirichletParams};
use dirdp::rng::RngSeed;
use dirdp::Bound;
use proptest::prelude::*;
use rand::Rng;

fn target(lambda: f64, eps: f64) -> RdpGuarantee {
    RdpGuarantee::new(lambda, eps).unwrap()
}

fn sens(d2: f64, dinf: f64) -> SensitivityBounds {
    SensitivityBounds::new(d2, dinf).unwrap()
}

fn floor(a: f64, r: f64) -> PriorFloor {
    PriorFloor::new(a, r).unwrap()
}

#[test]
fn worked_example_values() {
    let s = sens(2.0, 1.0);
    assert_eq!(g_of_lambda(2.0, 1.0, 1.0).unwrap(), 1.0);
    assert_eq!(g_of_lambda(3.0, 1.0, 0.5).unwrap(), 1.0);
    let a = alpha_min_for_target(&target(2.0, 1.0), &s, 1.0).unwrap();
    assert!((a - 3.46).abs() < 0.01);
    assert_eq!(alpha_min_closed_form(&target(2.0, 1.0), &s, 1.0).unwrap(), 4.0);
    let at_346 = rdp_epsilon(2.0, &s, floor(3.46, 1.0)).unwrap().value();
    assert!((at_346 - 1.0).abs() < 2e-2);
    assert!(rdp_epsilon(2.0, &s, floor(4.0, 1.0)).unwrap().value() <= 1.0);
}

#[test]
fn solvers_round_trip_and_closed_form_is_conservative() {
    let mut rng = RngSeed(5).rng();
    for _ in 0..100 {
        let lambda = 1.0 + log_uniform(rng.gen(), 0.01, 20.0);
        let eps = log_uniform(rng.gen(), 1e-4, 1e2);
        let dinf = rng.gen_range(0.1..3.0);
        let s = sens(dinf * dinf * rng.gen_range(1.0..10.0), dinf);
        let r = log_uniform(rng.gen(), 0.05, 5.0);
        let t = target(lambda, eps);
        let a = alpha_min_for_target(&t, &s, r).unwrap();
        let back = rdp_epsilon(lambda, &s, floor(a, r)).unwrap().value();
        assert!(rel(back, eps) < 1e-8, "α_m round trip: {back} vs {eps}");
        assert!(alpha_min_closed_form(&t, &s, r).unwrap() >= a);

        let alpha_m = log_uniform(rng.gen(), 0.5, 500.0);
        let rr = r_for_target(&t, &s, alpha_m).unwrap();
        let back = rdp_epsilon(lambda, &s, floor(alpha_m, rr)).unwrap().value();
        assert!(rel(back, eps) < 1e-8, "r round trip: {back} vs {eps}");
    }
}

#[test]
fn r_matches_bisection_oracle() {
    let s = sens(4.0, 1.0);
    for eps in [1e-5, 1e-3, 0.0333] {
        let oracle =
            bisect(|r| 0.5 * 2.0 * r * r * 4.0 * trigamma_series(10.0 - r) - eps, 1e-12, 10.0 - 1e-9, 200);
        let got = r_for_target(&target(2.0, eps), &s, 10.0).unwrap();
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
    }
}

#[test]
fn closed_form_limit() {
    let s = sens(2.0, 1.0);
    let v = alpha_min_closed_form(&target(3.0, 1e12), &s, 1.0).unwrap();
    assert!((v - 3.0).abs() < 1e-9);
}

#[test]
fn conversion_matches_zoomed_grid_scan() {
    let mut rng = RngSeed(9).rng();
    for _ in 0..30 {
        let a = log_uniform(rng.gen(), 0.5, 100.0);
        let r = log_uniform(rng.gen(), 0.1, 2.0);
        let dinf = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let s = sens(dinf * dinf * rng.gen_range(1.0..10.0), dinf);
        let eps = log_uniform(rng.gen(), 0.1, 10.0);
        let conv = rdp_to_approx_dp(floor(a, r), &s, eps).unwrap();
        let upper = a / (r * dinf) + 1.0;
        let (_, fmin) =
            zoomed_grid_min(|l| log_delta_oracle(l, a, r, &s, eps), 1.0 + 1e-12, upper - 1e-12, 10_000, 4);
        let oracle = fmin.exp().min(1.0);
        assert!(rel(conv.guarantee.delta, oracle) < 1e-8, "{} vs {oracle}", conv.guarantee.delta);
    }
}

#[test]
fn log_delta_is_convex_and_minimizer_matches_grid() {
    let s = sens(2.0, 1.0);
    for (a, eps) in [(3.46, 1.0), (20.0, 0.5), (100.0, 3.0)] {
        let upper = a + 1.0;
        let n = 2000;
        let step = (upper - 1.0) / n as f64;
        let grid: Vec<(f64, f64)> = (1..n)
            .map(|i| {
                let l = 1.0 + step * i as f64;
                (l, log_delta_at(l, floor(a, 1.0), &s, eps))
            })
            .collect();
        for w in grid.windows(3) {
            let second = w[0].1 - 2.0 * w[1].1 + w[2].1;
            assert!(second >= -1e-9 * w[1].1.abs().max(1.0), "not convex near λ = {}", w[1].0);
        }
        let argmin = grid.iter().min_by(|x, y| x.1.total_cmp(&y.1)).unwrap().0;
        let conv = rdp_to_approx_dp(floor(a, 1.0), &s, eps).unwrap();
        assert!((conv.lambda - argmin).abs() <= step, "{} vs {argmin}", conv.lambda);
    }
}

#[test]
fn degenerate_curve_matches_grid() {
    // with ε̂(λ) ≡ ε the objective reduces to h(λ) = (1 − 1/λ)^λ / (λ − 1)
    let h = |l: f64| ((1.0 - 1.0 / l).powf(l) / (l - 1.0)).ln();
    let (x, _) = zoomed_grid_min(h, 1.0 + 1e-9, 50.0, 10_000, 4);
    // d/dλ ln h = ln(1 − 1/λ) + 1/(λ−1) − 1/(λ−1) = ln(1 − 1/λ) < 0, so h
    // decreases on the whole interval and the scan ends at the right edge
    assert!(x > 49.9);
}

#[test]
fn delta_decreases_with_epsilon_and_floor() {
    let s = sens(2.0, 1.0);
    let mut prev = f64::INFINITY;
    for eps in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let d = rdp_to_approx_dp(floor(10.0, 1.0), &s, eps).unwrap().guarantee.delta;
        assert!(d < prev);
        prev = d;
    }
    let mut prev = f64::INFINITY;
    for a in [4.0, 8.0, 16.0, 32.0, 64.0] {
        let d = rdp_to_approx_dp(floor(a, 1.0), &s, 1.0).unwrap().guarantee.delta;
        assert!(d < prev);
        prev = d;
    }
}

#[test]
fn scaling_between_r_and_floor() {
    let slope = |eps: f64, r: f64| {
        let s = sens(2.0, 1.0);
        let t = target(2.0, eps);
        let a1 = alpha_min_for_target(&t, &s, r).unwrap();
        let a2 = alpha_min_for_target(&t, &s, 2.0 * r).unwrap();
        ((a2 / a1).ln() / 2f64.ln(), a1)
    };
    // small floor relative to g(λ) + 1 = r + 1
    let (lin, a) = slope(1e3, 0.5);
    assert!(a < 0.5 + 1.0);
    assert!((0.8..=1.2).contains(&lin), "{lin}");
    // floor far above g(λ) + 1
    let (quad, a) = slope(1e-3, 1.0);
    assert!(a > 100.0);
    assert!((1.7..=2.3).contains(&quad), "{quad}");
}

#[test]
fn guarantee_is_tightest_for_a_zero_to_one_change() {
    let s = sens(1.0, 1.0);
    let alpha = 3.46;
    let bound = rdp_epsilon(2.0, &s, floor(alpha, 1.0)).unwrap().value();
    let gap = |base: f64| {
        let x = vec![base; 6];
        let mut x2 = x.clone();
        x2[5] += 1.0;
        let p = DirichletParams::posterior(&x, &[alpha; 6], 1.0).unwrap();
        let q = DirichletParams::posterior(&x2, &[alpha; 6], 1.0).unwrap();
        let d = renyi_divergence(&p, &q, 2.0)
            .unwrap()
            .value()
            .max(renyi_divergence(&q, &p, 2.0).unwrap().value());
        bound - d
    };
    let (g0, g5, g500) = (gap(0.0), gap(5.0), gap(500.0));
    assert!(g0 >= 0.0 && g0 < g5 && g5 < g500, "{g0} {g5} {g500}");
}

#[test]
fn composition() {
    let c = compose(&target(2.0, 0.5), &target(2.0, 0.5));
    assert_eq!((c.lambda, c.epsilon), (2.0, 1.0));
    let c = compose(&target(2.0, 0.3), &RdpGuarantee::new(3.0, 0.0).unwrap());
    assert_eq!((c.lambda, c.epsilon), (2.0, 0.3));
    let per = target(2.0, 1.0 / 3000.0);
    let all = compose_all(std::iter::repeat_n(&per, 3000)).unwrap();
    assert_eq!(all.lambda, 2.0);
    assert!((all.epsilon - 1.0).abs() < 1e-12);
}

#[test]
fn prior_spec_caches() {
    let p = PriorSpec::new(vec![3.0, 1.5, 4.0]).unwrap().with_r(0.5).unwrap();
    assert_eq!(p.alpha_min(), 1.5);
    assert_eq!(p.alpha0(), 8.5);
    let f = PriorFloor::from(&p);
    assert_eq!((f.alpha_min, f.r), (1.5, 0.5));
    assert!(PriorSpec::new(vec![1.0, -1.0]).is_err());
    assert!(PriorSpec::uniform(1.0, 3).unwrap().with_r(0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn guarantee_monotonicity(
        a in 0.5f64..100.0,
        r in 0.1f64..3.0,
        dinf in 0.2f64..3.0,
        k in 1.0f64..8.0,
        u in 0.01f64..0.9,
        bump in 1.001f64..1.5,
    ) {
        let s = sens(dinf * dinf * k, dinf);
        let cap = a / (r * dinf) + 1.0;
        let lambda = 1.0 + (cap - 1.0) * u;
        prop_assume!(lambda > 1.0 + 1e-9);
        let base = rdp_epsilon(lambda, &s, floor(a, r)).unwrap().value();

        let lambda2 = 1.0 + (lambda - 1.0) * bump;
        match rdp_epsilon(lambda2, &s, floor(a, r)).unwrap() {
            Bound::Finite(v) => prop_assert!(v > base),
            Bound::Infinite => prop_assert!(lambda2 >= cap),
        }
        let more_sens = sens(s.delta2_sq * bump, dinf);
        prop_assert!(rdp_epsilon(lambda, &more_sens, floor(a, r)).unwrap().value() > base);
        let bigger_r = r * bump;
        if lambda < a / (bigger_r * dinf) + 1.0 {
            prop_assert!(rdp_epsilon(lambda, &s, floor(a, bigger_r)).unwrap().value() > base);
        }
        prop_assert!(rdp_epsilon(lambda, &s, floor(a * bump, r)).unwrap().value() < base);
    }

    #[test]
    fn infinite_outside_the_order_interval(a in 0.5f64..50.0, r in 0.1f64..3.0, over in 1.0f64..3.0) {
        let s = sens(2.0, 1.0);
        let cap = a / r + 1.0;
        prop_assert_eq!(rdp_epsilon(cap * over, &s, floor(a, r)).unwrap(), Bound::Infinite);
    }

    #[test]
    fn floor_grows_without_bound_as_budget_shrinks(eps in 1e-4f64..1.0) {
        let s = sens(2.0, 1.0);
        let a1 = alpha_min_for_target(&target(2.0, eps), &s, 1.0).unwrap();
        let a2 = alpha_min_for_target(&target(2.0, eps / 2.0), &s, 1.0).unwrap();
        prop_assert!(a2 > a1);
        // ε → 0 as α_m → ∞
        let e1 = rdp_epsilon(2.0, &s, floor(a1 * 10.0, 1.0)).unwrap().value();
        prop_assert!(e1 < eps);
    }
}
