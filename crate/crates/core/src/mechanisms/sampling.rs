//! Gamma, Dirichlet and multinomial variates.

use rand::distributions::Open01;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use super::SimplexPoint;
use crate::divergence::DirichletParams;

/// `ln G` for `G ~ Gamma(shape, 1)`.
///
/// Marsaglia–Tsang squeeze/rejection for `shape >= 1`; smaller shapes use
/// `G(a) = G(a + 1) · U^{1/a}`, kept in log space so tiny shapes do not
/// underflow.
pub fn ln_gamma_variate<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.sample(Open01);
        return ln_gamma_variate(rng, shape + 1.0) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.sample(Open01);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d.ln() + v.ln();
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

/// `G ~ Gamma(shape, 1)`.
pub fn gamma_variate<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    ln_gamma_variate(rng, shape).exp()
}

/// One draw from `Dir(params)`: independent gamma variates normalized by
/// their sum.
pub fn sample_dirichlet<R: Rng + ?Sized>(params: &DirichletParams, rng: &mut R) -> SimplexPoint {
    let logs: Vec<f64> = params.as_slice().iter().map(|&a| ln_gamma_variate(rng, a)).collect();
    SimplexPoint::from_log_weights(&logs)
}

/// `Multinomial(n, p)` counts by sequential conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(n: u64, p: &[f64], rng: &mut R) -> Vec<f64> {
    let mut counts = vec![0.0; p.len()];
    let mut remaining_n = n;
    let mut remaining_mass: f64 = p.iter().sum();
    for (i, &pi) in p.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if i + 1 == p.len() {
            counts[i] = remaining_n as f64;
            break;
        }
        let q = if remaining_mass > 0.0 { (pi / remaining_mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining_n, q).expect("probability clamped to [0, 1]").sample(rng);
        counts[i] = k as f64;
        remaining_n -= k;
        remaining_mass -= pi;
    }
    counts
}

/// A Laplace(0, `scale`) variate by inversion.
pub fn laplace_variate<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    if u < 0.5 {
        scale * (2.0 * u).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    }
}
