//! Closed-form divergences between Dirichlet distributions.
//!
//! These are exact and serve as the reference against which every privacy
//! guarantee in [`crate::accountant`] is checked.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::raw;
use crate::Bound;

/// Concentration parameters of a Dirichlet distribution: `d >= 2` strictly
/// positive, finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    u: Vec<f64>,
}

impl DirichletParams {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.len() < 2 {
            return domain(format!("Dirichlet dimension must be >= 2, got {}", u.len()));
        }
        if let Some(bad) = u.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return domain(format!("Dirichlet parameters must be positive, got {bad}"));
        }
        Ok(Self { u })
    }

    /// `Dir(r·x + α)`.
    pub fn posterior(x: &[f64], alpha: &[f64], r: f64) -> Result<Self> {
        if x.len() != alpha.len() {
            return domain(format!("statistic has length {} but prior has length {}", x.len(), alpha.len()));
        }
        if let Some(bad) = x.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return domain(format!("statistic entries must be nonnegative, got {bad}"));
        }
        Self::new(x.iter().zip(alpha).map(|(xi, ai)| r * xi + ai).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `u₀ = Σ uᵢ`.
    pub fn total(&self) -> f64 {
        self.u.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> Vec<f64> {
        let total = self.total();
        self.u.iter().map(|v| v / total).collect()
    }

    pub fn log_beta(&self) -> f64 {
        raw::ln_beta(&self.u)
    }

    /// Log density at an interior simplex point.
    pub fn log_density(&self, y: &[f64]) -> Result<f64> {
        check_interior(y, self.dim())?;
        Ok(self.u.iter().zip(y).map(|(u, y)| (u - 1.0) * y.ln()).sum::<f64>() - self.log_beta())
    }
}

fn check_dims(p: &DirichletParams, q: &DirichletParams) -> Result<()> {
    if p.dim() != q.dim() {
        return domain(format!("dimension mismatch: {} vs {}", p.dim(), q.dim()));
    }
    Ok(())
}

fn check_interior(y: &[f64], d: usize) -> Result<()> {
    if y.len() != d {
        return domain(format!("point has dimension {} but expected {d}", y.len()));
    }
    if y.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return domain("point is not strictly inside the simplex");
    }
    let s: f64 = y.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return domain(format!("point sums to {s}, not 1"));
    }
    Ok(())
}

/// Order-`λ` Rényi divergence `D_λ(Dir(p) ‖ Dir(q))`.
///
/// With `w = p + (λ−1)(p − q)`,
/// `D_λ = ln B(q) − ln B(p) + (ln B(w) − ln B(p)) / (λ − 1)`.
/// Returns [`Bound::Infinite`] when some `wᵢ <= 0`, where the defining
/// integral diverges.
pub fn renyi_divergence(p: &DirichletParams, q: &DirichletParams, lambda: f64) -> Result<Bound> {
    check_dims(p, q)?;
    if !(lambda > 1.0) || !lambda.is_finite() {
        return domain(format!("Rényi order must be finite and > 1, got {lambda}"));
    }
    let t = lambda - 1.0;
    let shifted: Vec<f64> = p.u.iter().zip(&q.u).map(|(a, b)| a + t * (a - b)).collect();
    if shifted.iter().any(|v| !(*v > 0.0)) {
        return Ok(Bound::Infinite);
    }
    if p.u == q.u {
        return Ok(Bound::Finite(0.0));
    }
    let lb_p = p.log_beta();
    let d = q.log_beta() - lb_p + (raw::ln_beta(&shifted) - lb_p) / t;
    // Rounding can push an essentially-zero divergence slightly negative.
    Ok(Bound::Finite(d.max(0.0)))
}

/// `KL(Dir(p) ‖ Dir(q))`.
pub fn kl_divergence(p: &DirichletParams, q: &DirichletParams) -> Result<f64> {
    check_dims(p, q)?;
    if p.u == q.u {
        return Ok(0.0);
    }
    let p0 = p.total();
    let q0 = q.total();
    let psi_p0 = raw::digamma(p0);
    let mut kl = raw::ln_gamma(p0) - raw::ln_gamma(q0);
    for (&pi, &qi) in p.u.iter().zip(&q.u) {
        kl += raw::ln_gamma(qi) - raw::ln_gamma(pi) - (qi - pi) * (raw::digamma(pi) - psi_p0);
    }
    Ok(kl.max(0.0))
}

/// `ln[dens_p(y) / dens_q(y)] = ln B(q) − ln B(p) + Σ (pᵢ − qᵢ) ln yᵢ`.
pub fn density_log_ratio(p: &DirichletParams, q: &DirichletParams, y: &[f64]) -> Result<f64> {
    check_dims(p, q)?;
    check_interior(y, p.dim())?;
    let linear: f64 = p.u.iter().zip(&q.u).zip(y).map(|((a, b), y)| (a - b) * y.ln()).sum();
    Ok(q.log_beta() - p.log_beta() + linear)
}
