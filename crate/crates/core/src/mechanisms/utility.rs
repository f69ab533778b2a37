//! High-probability and expected-loss bounds for the histogram mechanisms.

use super::SimplexPoint;
use crate::accountant::{RdpGuarantee, SensitivityBounds};
use crate::error::{domain, Result};

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        domain(format!("β must lie in (0, 1), got {beta}"))
    }
}

/// With probability at least `1 − β`,
/// `‖Y − p‖₂ <= √((3 ln(1/β) + 2d) / (4(N + α₀ + 1))) + 2α₀/(N + α₀)`
/// for `Y ~ Dir(x + α)` and `p = x/N`.
///
/// The first term is a sub-Gaussian tail for the spread of `Y` around its
/// mean (variance proxy `1/(4(N + α₀ + 1))`), the second bounds the bias
/// introduced by the prior.
pub fn dirichlet_utility_bound(n: f64, alpha0: f64, d: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(n >= 0.0) || !(alpha0 > 0.0) {
        return domain("need N >= 0 and α₀ > 0");
    }
    let spread = ((3.0 * (1.0 / beta).ln() + 2.0 * d as f64) / (4.0 * (n + alpha0 + 1.0))).sqrt();
    Ok(spread + 2.0 * alpha0 / (n + alpha0))
}

/// With probability at least `1 − β`, the Gaussian mechanism calibrated to
/// `target` has `ℓ²`-loss at most `√((3 ln(1/β) + 2d) λΔ₂² / (2N²ε))`.
pub fn gaussian_utility_bound(
    n: f64,
    target: &RdpGuarantee,
    sens: &SensitivityBounds,
    d: usize,
    beta: f64,
) -> Result<f64> {
    check_beta(beta)?;
    let sigma_sq = super::gaussian_sigma_sq(n, target, sens)?;
    Ok(((3.0 * (1.0 / beta).ln() + 2.0 * d as f64) * sigma_sq).sqrt())
}

/// Upper bound `(1/(N+1)) Σ (α'ᵢ − αᵢ)² / pᵢ` on
/// `E_X[KL(Dir(X + α) ‖ Dir(X + α'))]` for `X ~ Multinomial(N, p)`.
///
/// Requires `α'ᵢ >= αᵢ >= 1`.
pub fn multinomial_dirichlet_kl_bound(
    p: &SimplexPoint,
    alpha: &[f64],
    alpha_prime: &[f64],
    n: u64,
) -> Result<f64> {
    let d = p.dim();
    if alpha.len() != d || alpha_prime.len() != d {
        return domain("dimension mismatch between p, α and α'");
    }
    if n < 1 {
        return domain("N must be >= 1");
    }
    for (a, ap) in alpha.iter().zip(alpha_prime) {
        if !(*a >= 1.0) {
            return domain(format!("bound requires αᵢ >= 1, got {a}"));
        }
        if !(*ap >= *a) {
            return domain(format!("bound requires α'ᵢ >= αᵢ, got {ap} < {a}"));
        }
    }
    let s: f64 =
        alpha.iter().zip(alpha_prime).zip(p.as_slice()).map(|((a, ap), pi)| (ap - a).powi(2) / pi).sum();
    Ok(s / (n as f64 + 1.0))
}
