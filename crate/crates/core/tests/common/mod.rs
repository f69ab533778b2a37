//! Reference implementations used only as test oracles. None of these share
//! code with the library.

#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;

use dirdp::accountant::{rdp_epsilon, PriorFloor, SensitivityBounds};
use dirdp::divergence::{renyi_divergence, DirichletParams};
use rand::Rng;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ψ'(x)` as `Σ_{k<M} 1/(x+k)²` plus an Euler-Maclaurin tail at `x + M`.
pub fn trigamma_series(x: f64) -> f64 {
    const M: usize = 200;
    let mut head = 0.0;
    for k in (0..M).rev() {
        let t = x + k as f64;
        head += 1.0 / (t * t);
    }
    let z = x + M as f64;
    let tail = 1.0 / z + 1.0 / (2.0 * z * z) + 1.0 / (6.0 * z.powi(3)) - 1.0 / (30.0 * z.powi(5));
    head + tail
}

/// `ψ(x)` as `−Σ_{k<M} 1/(x+k)` plus an Euler-Maclaurin tail at `x + M`.
pub fn digamma_series(x: f64) -> f64 {
    const M: usize = 200;
    let mut head = 0.0;
    for k in (0..M).rev() {
        head -= 1.0 / (x + k as f64);
    }
    let z = x + M as f64;
    let tail = z.ln() - 1.0 / (2.0 * z) - 1.0 / (12.0 * z * z) + 1.0 / (120.0 * z.powi(4));
    head + tail
}

/// Plain bisection for an increasing-or-decreasing `f` with a sign change.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let flo = f(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫₀¹ f(y) dy` by tanh-sinh quadrature; `f` receives `(y, 1 − y)` so
/// integrands can stay accurate near both endpoints.
pub fn tanh_sinh(f: impl Fn(f64, f64) -> f64) -> f64 {
    let eval = |h: f64| {
        let mut sum = 0.0;
        let n = (6.0 / h).ceil() as i64;
        for k in -n..=n {
            let t = k as f64 * h;
            let u = 0.5 * PI * t.sinh();
            let y = 1.0 / (1.0 + (-2.0 * u).exp());
            let one_minus_y = 1.0 / (1.0 + (2.0 * u).exp());
            if y <= 0.0 || one_minus_y <= 0.0 {
                continue;
            }
            let w = 0.5 * PI * t.cosh() / (2.0 * u.cosh().powi(2));
            let v = f(y, one_minus_y);
            if v.is_finite() {
                sum += w * v;
            }
        }
        sum * h
    };
    let mut h = 0.5;
    let mut prev = eval(h);
    for _ in 0..8 {
        h *= 0.5;
        let cur = eval(h);
        if (cur - prev).abs() <= 1e-14 * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Minimum of `f` on `(lo, hi)` by repeated uniform grid scans: each level
/// evaluates `points` equally spaced abscissae and narrows to the two grid
/// cells around the best one.
pub fn zoomed_grid_min(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    points: usize,
    levels: usize,
) -> (f64, f64) {
    let mut best = (f64::NAN, f64::INFINITY);
    for _ in 0..levels {
        let step = (hi - lo) / (points - 1) as f64;
        let mut best_i = 0;
        for i in 0..points {
            let x = lo + step * i as f64;
            let v = f(x);
            if v < best.1 {
                best = (x, v);
                best_i = i;
            }
        }
        let (nlo, nhi) =
            (lo + step * best_i.saturating_sub(1) as f64, lo + step * (best_i + 1).min(points - 1) as f64);
        lo = nlo;
        hi = nhi;
    }
    best
}

/// Log-uniform sample on `[lo, hi]` from a uniform `u ∈ [0, 1)`.
pub fn log_uniform(u: f64, lo: f64, hi: f64) -> f64 {
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// One randomized neighbor pair for the domination check: returns the exact
/// divergence (both directions, the larger) and the guarantee at the same
/// order, or `None` if the guarantee is infinite at the drawn order.
pub fn domination_trial<R: Rng>(rng: &mut R) -> Option<(f64, f64)> {
    let d = rng.gen_range(2..=20usize);
    let delta_inf = [0.5, 1.0, 2.0, 5.0][rng.gen_range(0..4)];
    let delta2_sq = delta_inf * delta_inf * rng.gen_range(1.0..=d as f64);
    let sens = SensitivityBounds::new(delta2_sq, delta_inf).unwrap();

    // x: a mix of zero, small and large counts
    let x: Vec<f64> = (0..d)
        .map(|_| match rng.gen_range(0..3) {
            0 => 0.0,
            1 => rng.gen_range(0.0..5.0),
            _ => rng.gen_range(0.0..500.0),
        })
        .collect();
    // perturbation with |vᵢ| <= Δ∞ and Σ vᵢ² <= Δ₂², pushing zeros up so
    // the tight (0, Δ∞) pair shows up often
    let mut v = vec![0.0; d];
    let mut budget = delta2_sq;
    let mut order: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for &i in &order {
        if budget <= 0.0 {
            break;
        }
        let cap = delta_inf.min(budget.sqrt());
        let mag = if rng.gen_bool(0.6) { cap } else { rng.gen_range(0.0..=cap) };
        let sign = if x[i] == 0.0 || rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let vi = (sign * mag).max(-x[i]);
        v[i] = vi;
        budget -= vi * vi;
    }
    let x2: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();

    let alpha_min = log_uniform(rng.gen::<f64>(), 0.2, 200.0);
    let alpha: Vec<f64> =
        (0..d).map(|i| if i == 0 { alpha_min } else { alpha_min * rng.gen_range(1.0..3.0) }).collect();
    let r = if rng.gen_bool(0.5) { 1.0 } else { log_uniform(rng.gen::<f64>(), 0.05, 3.0) };
    let floor = PriorFloor::new(alpha_min, r).unwrap();
    let lambda_cap = alpha_min / (r * delta_inf) + 1.0;
    let lambda = 1.0 + (lambda_cap - 1.0) * rng.gen_range(0.001..0.999f64);
    if lambda <= 1.0 {
        return None;
    }
    let bound = rdp_epsilon(lambda, &sens, floor).unwrap().finite()?;

    let p = DirichletParams::posterior(&x, &alpha, r).unwrap();
    let q = DirichletParams::posterior(&x2, &alpha, r).unwrap();
    let forward = renyi_divergence(&p, &q, lambda).unwrap().value();
    let backward = renyi_divergence(&q, &p, lambda).unwrap().value();
    Some((forward.max(backward), bound))
}

use dirdp::accountant::{alpha_min_for_target, PriorSpec, RdpGuarantee};
use dirdp::mechanisms::{
    dirichlet_mechanism, dirichlet_utility_bound, gaussian_mechanism, gaussian_utility_bound, l2_loss,
    sample_dirichlet, sample_multinomial, Histogram,
};
use dirdp::rng::RngSeed;

/// Fractions of trials in which the Dirichlet and Gaussian tail bounds
/// cover the realized `ℓ²`-loss, for `(2, ε)` targets at `β`.
pub fn tail_coverage(d: usize, n: u64, eps: f64, beta: f64, trials: usize, seed: RngSeed) -> (f64, f64) {
    let target = RdpGuarantee::new(2.0, eps).unwrap();
    let sens = SensitivityBounds::histogram();
    let alpha_m = alpha_min_for_target(&target, &sens, 1.0).unwrap();
    let prior = PriorSpec::uniform(alpha_m, d).unwrap();
    let flat = DirichletParams::new(vec![1.0; d]).unwrap();
    let dir_bound = dirichlet_utility_bound(n as f64, prior.alpha0(), d, beta).unwrap();
    let gau_bound = gaussian_utility_bound(n as f64, &target, &sens, d, beta).unwrap();
    let (mut dir_hits, mut gau_hits) = (0, 0);
    for k in 0..trials {
        let mut rng = seed.derive(&[k as u64]).rng();
        let p = sample_dirichlet(&flat, &mut rng);
        let x = sample_multinomial(n, p.as_slice(), &mut rng);
        let hist = Histogram::new(x).unwrap();
        let reference = hist.normalized().unwrap();
        let y = dirichlet_mechanism(&hist, &prior, &mut rng).unwrap();
        if l2_loss(y.as_slice(), &reference).unwrap() <= dir_bound {
            dir_hits += 1;
        }
        let g = gaussian_mechanism(&hist, &target, &sens, &mut rng).unwrap();
        if l2_loss(&g, &reference).unwrap() <= gau_bound {
            gau_hits += 1;
        }
    }
    (dir_hits as f64 / trials as f64, gau_hits as f64 / trials as f64)
}

/// `ln δ(λ)` from the series trigamma, sharing nothing with the library.
pub fn log_delta_oracle(lambda: f64, a: f64, r: f64, s: &SensitivityBounds, eps: f64) -> f64 {
    let arg = a - (lambda - 1.0) * r * s.delta_inf;
    if !(arg > 0.0) || !(lambda > 1.0) {
        return f64::INFINITY;
    }
    let eps_hat = 0.5 * lambda * r * r * s.delta2_sq * trigamma_series(arg);
    let t = lambda - 1.0;
    t * (eps_hat - eps) + t * t.ln() - lambda * lambda.ln()
}
