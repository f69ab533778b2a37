//! Rényi-DP accounting for Dirichlet posterior sampling.
//!
//! A single draw from `Dir(r·x + α)` is `(λ, ε)`-RDP for every order
//! `λ ∈ (1, α_m/(rΔ∞) + 1)` with
//!
//! ```text
//! ε = ½ λ r² Δ₂² ψ'(α_m − g(λ)),   g(λ) = (λ − 1) r Δ∞,
//! ```
//!
//! where `α_m = min α` is the prior floor and `(Δ₂², Δ∞)` bound how far the
//! statistic `x` moves between neighboring datasets. This module evaluates
//! the guarantee, inverts it for `α_m` or `r`, converts it to `(ε, δ)`-DP and
//! composes guarantees.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::optim::{find_root, golden_section, Tolerance};
use crate::specfun::raw;
use crate::Bound;

/// Worst-case change of the statistic between neighboring datasets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityBounds {
    /// Squared ℓ² sensitivity `Δ₂²`.
    pub delta2_sq: f64,
    /// ℓ∞ sensitivity `Δ∞`.
    pub delta_inf: f64,
}

impl SensitivityBounds {
    /// Requires `Δ∞² <= Δ₂²`, and `Δ₂² = 0` whenever `Δ∞ = 0`.
    pub fn new(delta2_sq: f64, delta_inf: f64) -> Result<Self> {
        if !(delta2_sq.is_finite() && delta2_sq >= 0.0 && delta_inf.is_finite() && delta_inf >= 0.0) {
            return domain(format!(
                "sensitivities must be finite and nonnegative, got Δ₂²={delta2_sq}, Δ∞={delta_inf}"
            ));
        }
        if delta_inf * delta_inf > delta2_sq * (1.0 + 1e-12) {
            return domain(format!("Δ∞² = {} exceeds Δ₂² = {delta2_sq}", delta_inf * delta_inf));
        }
        if delta_inf == 0.0 && delta2_sq > 0.0 {
            return domain("Δ₂² > 0 requires Δ∞ > 0");
        }
        Ok(Self { delta2_sq, delta_inf })
    }

    /// Changing one observation of a histogram moves two counts by one.
    pub fn histogram() -> Self {
        Self { delta2_sq: 2.0, delta_inf: 1.0 }
    }

    /// Checks `Δ₂² <= d Δ∞²` for a `d`-dimensional statistic.
    pub fn check_dimension(&self, d: usize) -> Result<()> {
        let cap = d as f64 * self.delta_inf * self.delta_inf;
        if self.delta2_sq > cap * (1.0 + 1e-12) {
            return domain(format!(
                "Δ₂² = {} is not attainable in dimension {d} with Δ∞ = {}",
                self.delta2_sq, self.delta_inf
            ));
        }
        Ok(())
    }
}

/// A `(λ, ε)`-RDP guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdpGuarantee {
    pub lambda: f64,
    pub epsilon: f64,
}

impl RdpGuarantee {
    /// `λ > 1` and `ε` finite and nonnegative. A zero budget is accepted as
    /// the identity for composition; the solvers require `ε > 0`.
    pub fn new(lambda: f64, epsilon: f64) -> Result<Self> {
        if !(lambda > 1.0) || lambda.is_nan() {
            return domain(format!("Rényi order must be > 1, got {lambda}"));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return domain(format!("RDP budget must be finite and >= 0, got {epsilon}"));
        }
        Ok(Self { lambda, epsilon })
    }

    fn require_positive(&self) -> Result<()> {
        if self.epsilon > 0.0 {
            Ok(())
        } else {
            domain("target ε must be > 0")
        }
    }
}

/// An `(ε, δ)`-DP guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxDpGuarantee {
    pub epsilon: f64,
    pub delta: f64,
}

impl ApproxDpGuarantee {
    /// `δ` must lie in `[0, 1]`; `δ = 1` is vacuous and `δ = 0` only arises
    /// for a mechanism that ignores its data.
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return domain(format!("ε must be finite and > 0, got {epsilon}"));
        }
        if !(0.0..=1.0).contains(&delta) {
            return domain(format!("δ must lie in [0, 1], got {delta}"));
        }
        Ok(Self { epsilon, delta })
    }
}

/// Prior parameters `α` together with the concentration multiplier `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    alpha: Vec<f64>,
    alpha_min: f64,
    alpha0: f64,
    r: f64,
}

impl PriorSpec {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return domain("prior vector is empty");
        }
        if let Some(bad) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return domain(format!("prior entries must be positive, got {bad}"));
        }
        let alpha_min = alpha.iter().copied().fold(f64::INFINITY, f64::min);
        let alpha0 = alpha.iter().sum();
        Ok(Self { alpha, alpha_min, alpha0, r: 1.0 })
    }

    /// `α = (value, …, value)` in dimension `d`.
    pub fn uniform(value: f64, d: usize) -> Result<Self> {
        Self::new(vec![value; d])
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        check_r(r)?;
        self.r = r;
        Ok(self)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn floor(&self) -> PriorFloor {
        PriorFloor { alpha_min: self.alpha_min, r: self.r }
    }
}

/// The part of a prior the guarantee depends on: `α_m` and `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorFloor {
    pub alpha_min: f64,
    pub r: f64,
}

impl PriorFloor {
    pub fn new(alpha_min: f64, r: f64) -> Result<Self> {
        if !(alpha_min.is_finite() && alpha_min > 0.0) {
            return domain(format!("α_m must be finite and > 0, got {alpha_min}"));
        }
        check_r(r)?;
        Ok(Self { alpha_min, r })
    }
}

impl From<&PriorSpec> for PriorFloor {
    fn from(p: &PriorSpec) -> Self {
        p.floor()
    }
}

fn check_r(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        domain(format!("concentration multiplier r must be finite and > 0, got {r}"))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        domain(format!("Rényi order must be finite and > 1, got {lambda}"))
    }
}

/// `g(λ) = (λ − 1) r Δ∞`, the erosion of the prior floor at order `λ`.
pub fn g_of_lambda(lambda: f64, delta_inf: f64, r: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(delta_inf.is_finite() && delta_inf >= 0.0) {
        return domain(format!("Δ∞ must be finite and >= 0, got {delta_inf}"));
    }
    check_r(r)?;
    Ok((lambda - 1.0) * r * delta_inf)
}

/// Supremum `α_m/(rΔ∞) + 1` of the orders at which the guarantee holds
/// (`+inf` when `Δ∞ = 0`).
pub fn lambda_max(floor: PriorFloor, sens: &SensitivityBounds) -> f64 {
    if sens.delta_inf == 0.0 {
        f64::INFINITY
    } else {
        floor.alpha_min / (floor.r * sens.delta_inf) + 1.0
    }
}

/// `ε(λ) = ½ λ r² Δ₂² ψ'(α_m − g(λ))`, or [`Bound::Infinite`] outside the
/// open interval `(1, α_m/(rΔ∞) + 1)`.
pub fn rdp_epsilon(lambda: f64, sens: &SensitivityBounds, prior: impl Into<PriorFloor>) -> Result<Bound> {
    check_lambda(lambda)?;
    let floor = prior.into();
    PriorFloor::new(floor.alpha_min, floor.r)?;
    if sens.delta_inf == 0.0 {
        return Ok(Bound::Finite(0.0));
    }
    if lambda >= lambda_max(floor, sens) {
        return Ok(Bound::Infinite);
    }
    let arg = floor.alpha_min - (lambda - 1.0) * floor.r * sens.delta_inf;
    if !(arg > 0.0) {
        return Ok(Bound::Infinite);
    }
    Ok(Bound::Finite(0.5 * lambda * floor.r * floor.r * sens.delta2_sq * raw::trigamma(arg)))
}

/// Solves `ψ'(z) = c` for `z > 0`.
fn inverse_trigamma(c: f64) -> Result<f64> {
    // 1/z + 1/(2z²) < ψ'(z) < 1/z + 1/z² brackets the root between the
    // positive roots of c z² − z − ½ and c z² − z − 1.
    let lo = (1.0 + (1.0 + 2.0 * c).sqrt()) / (2.0 * c);
    let hi = (1.0 + (1.0 + 4.0 * c).sqrt()) / (2.0 * c);
    let target = c.ln();
    let root = find_root(|z| raw::trigamma(z).ln() - target, 0.5 * lo, 2.0 * hi, Tolerance::default())?;
    Ok(root.x)
}

/// The prior floor `α_m` at which `rdp_epsilon` equals `target.epsilon`
/// at order `target.lambda`.
pub fn alpha_min_for_target(target: &RdpGuarantee, sens: &SensitivityBounds, r: f64) -> Result<f64> {
    target.require_positive()?;
    check_r(r)?;
    if sens.delta2_sq <= 0.0 {
        return domain("Δ₂² must be > 0 to solve for α_m");
    }
    let lambda = target.lambda;
    let c = 2.0 * target.epsilon / (lambda * r * r * sens.delta2_sq);
    let z = inverse_trigamma(c)?;
    Ok(z + (lambda - 1.0) * r * sens.delta_inf)
}

/// Conservative analytic floor `λ r² Δ₂² / (2ε) + g(λ) + 1`, obtained by
/// bounding `ψ'(z) < 1/(z − 1)`. Never smaller than
/// [`alpha_min_for_target`].
pub fn alpha_min_closed_form(target: &RdpGuarantee, sens: &SensitivityBounds, r: f64) -> Result<f64> {
    target.require_positive()?;
    let g = g_of_lambda(target.lambda, sens.delta_inf, r)?;
    Ok(target.lambda * r * r * sens.delta2_sq / (2.0 * target.epsilon) + g + 1.0)
}

/// The concentration multiplier `r` at which `Dir(r·x + α)` meets `target`
/// for a fixed prior floor `alpha_min`.
///
/// The guarantee is strictly increasing in `r` on `(0, α_m/((λ−1)Δ∞))` and
/// spans `(0, ∞)`, so the root is unique.
pub fn r_for_target(target: &RdpGuarantee, sens: &SensitivityBounds, alpha_min: f64) -> Result<f64> {
    target.require_positive()?;
    PriorFloor::new(alpha_min, 1.0)?;
    if sens.delta2_sq <= 0.0 {
        return domain("Δ₂² must be > 0 to solve for r");
    }
    let lambda = target.lambda;
    let t = lambda - 1.0;
    let log_eps = target.epsilon.ln();
    let objective = |r: f64| {
        let arg = alpha_min - t * r * sens.delta_inf;
        if !(arg > 0.0) {
            return f64::INFINITY;
        }
        (0.5 * lambda * r * r * sens.delta2_sq * raw::trigamma(arg)).ln() - log_eps
    };

    // ψ'(α_m − g) >= ψ'(α_m), so the g-free solution is an upper bracket.
    let r_free = (2.0 * target.epsilon / (lambda * sens.delta2_sq * raw::trigamma(alpha_min))).sqrt();
    let r_cap = alpha_min / (t * sens.delta_inf);
    let mut hi = r_free;
    if hi >= r_cap {
        let mut gap = 0.5;
        hi = r_cap * (1.0 - gap);
        while objective(hi) <= 0.0 {
            gap *= 0.5;
            let next = r_cap * (1.0 - gap);
            if next >= r_cap || gap < 1e-300 {
                break;
            }
            hi = next;
        }
    }
    let mut lo = 0.5 * hi;
    while objective(lo) >= 0.0 {
        lo *= 0.5;
        if lo == 0.0 {
            return domain("could not bracket r from below");
        }
    }
    Ok(find_root(objective, lo, hi, Tolerance::default())?.x)
}

/// `f(λ) = ln h(λ) = (λ−1)(ε̂(λ) − ε) + (λ−1) ln(λ−1) − λ ln λ`, the log of
/// the `δ` obtained from the order-`λ` guarantee at privacy level `epsilon`.
/// `+inf` outside the feasible order interval.
pub fn log_delta_at(lambda: f64, floor: PriorFloor, sens: &SensitivityBounds, epsilon: f64) -> f64 {
    if !(lambda > 1.0) {
        return f64::INFINITY;
    }
    let eps_hat = match rdp_epsilon(lambda, sens, floor) {
        Ok(Bound::Finite(e)) => e,
        _ => return f64::INFINITY,
    };
    let t = lambda - 1.0;
    t * (eps_hat - epsilon) + t * t.ln() - lambda * lambda.ln()
}

/// Result of converting the RDP curve to a single `(ε, δ)` guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpConversion {
    pub guarantee: ApproxDpGuarantee,
    /// Order at which `δ` is attained.
    pub lambda: f64,
    /// `δ` was clamped to 1.
    pub vacuous: bool,
}

/// The smallest `δ` for which the mechanism is `(epsilon, δ)`-DP, minimized
/// over all feasible orders.
///
/// `ln δ(λ)` is strictly convex on the feasible interval and tends to `+inf`
/// at its right end, so golden-section search finds the unique minimizer.
pub fn rdp_to_approx_dp(
    prior: impl Into<PriorFloor>,
    sens: &SensitivityBounds,
    epsilon: f64,
) -> Result<DpConversion> {
    let floor = prior.into();
    PriorFloor::new(floor.alpha_min, floor.r)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return domain(format!("ε must be finite and > 0, got {epsilon}"));
    }
    let upper = lambda_max(floor, sens);
    if upper.is_infinite() {
        // The output does not depend on the data.
        return Ok(DpConversion {
            guarantee: ApproxDpGuarantee::new(epsilon, 0.0)?,
            lambda: f64::INFINITY,
            vacuous: false,
        });
    }
    const EDGE: f64 = 1e-9;
    let (lo, hi) = (1.0 + EDGE, upper - EDGE);
    if hi <= lo {
        return Ok(DpConversion {
            guarantee: ApproxDpGuarantee::new(epsilon, 1.0)?,
            lambda: 0.5 * (1.0 + upper),
            vacuous: true,
        });
    }
    let tol = Tolerance { abs: 1e-9, rel: 1e-12, max_iter: 500 };
    let best = golden_section(|l| log_delta_at(l, floor, sens, epsilon), lo, hi, tol)?;
    let delta = best.fx.exp();
    let vacuous = delta >= 1.0;
    Ok(DpConversion { guarantee: ApproxDpGuarantee::new(epsilon, delta.min(1.0))?, lambda: best.x, vacuous })
}

/// Running two RDP mechanisms on the same data is
/// `(min(λ₁, λ₂), ε₁ + ε₂)`-RDP.
pub fn compose(g1: &RdpGuarantee, g2: &RdpGuarantee) -> RdpGuarantee {
    RdpGuarantee { lambda: g1.lambda.min(g2.lambda), epsilon: g1.epsilon + g2.epsilon }
}

/// Folds [`compose`] over a sequence; `None` for an empty sequence.
pub fn compose_all<'a, I>(guarantees: I) -> Option<RdpGuarantee>
where
    I: IntoIterator<Item = &'a RdpGuarantee>,
{
    guarantees.into_iter().fold(None, |acc, g| match acc {
        None => Some(*g),
        Some(a) => Some(compose(&a, g)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn floor(a: f64) -> PriorFloor {
        PriorFloor::new(a, 1.0).unwrap()
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_of_lambda(2.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(g_of_lambda(3.0, 1.0, 0.5).unwrap(), 1.0);
        assert!(g_of_lambda(1.0 + 1e-12, 1.0, 1.0).unwrap() < 1e-11);
        assert!(g_of_lambda(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn worked_example_forward() {
        let sens = SensitivityBounds::histogram();
        let e = rdp_epsilon(2.0, &sens, floor(3.46)).unwrap().value();
        assert!((e - 1.0).abs() < 2e-2, "{e}");
        let e4 = rdp_epsilon(2.0, &sens, floor(4.0)).unwrap().value();
        assert!(e4 <= 1.0);
    }

    #[test]
    fn infinite_outside_order_interval() {
        let sens = SensitivityBounds::histogram();
        assert_eq!(rdp_epsilon(100.0, &sens, floor(3.0)).unwrap(), Bound::Infinite);
        // endpoint α_m/Δ∞ + 1 = 4 is excluded
        assert_eq!(rdp_epsilon(4.0, &sens, floor(3.0)).unwrap(), Bound::Infinite);
        assert!(rdp_epsilon(3.999, &sens, floor(3.0)).unwrap().is_finite());
    }

    #[test]
    fn zero_sensitivity_is_free() {
        let sens = SensitivityBounds::new(0.0, 0.0).unwrap();
        assert_eq!(rdp_epsilon(2.0, &sens, floor(1.0)).unwrap(), Bound::Finite(0.0));
        assert_eq!(rdp_epsilon(1e6, &sens, floor(1.0)).unwrap(), Bound::Finite(0.0));
        let c = rdp_to_approx_dp(floor(1.0), &sens, 0.5).unwrap();
        assert_eq!(c.guarantee.delta, 0.0);
    }

    #[test]
    fn sensitivity_validation() {
        assert!(SensitivityBounds::new(1.0, 2.0).is_err());
        assert!(SensitivityBounds::new(1.0, 0.0).is_err());
        assert!(SensitivityBounds::new(-1.0, 0.0).is_err());
        let s = SensitivityBounds::new(4.0, 1.0).unwrap();
        assert!(s.check_dimension(3).is_err());
        assert!(s.check_dimension(4).is_ok());
    }

    #[test]
    fn epsilon_vanishes_for_large_floor() {
        let sens = SensitivityBounds::histogram();
        let mut prev = f64::INFINITY;
        for a in [2.0, 10.0, 1e2, 1e4, 1e6] {
            let e = rdp_epsilon(2.0, &sens, floor(a)).unwrap().value();
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn worked_example_inverse() {
        let target = RdpGuarantee::new(2.0, 1.0).unwrap();
        let sens = SensitivityBounds::histogram();
        let a = alpha_min_for_target(&target, &sens, 1.0).unwrap();
        assert!((a - 3.46).abs() < 0.01, "{a}");
        assert!((a - 3.459_952_948_352_307).abs() < 1e-9, "{a}");
        assert_eq!(alpha_min_closed_form(&target, &sens, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn closed_form_limit() {
        let target = RdpGuarantee::new(2.0, 1e12).unwrap();
        let sens = SensitivityBounds::histogram();
        let a = alpha_min_closed_form(&target, &sens, 1.0).unwrap();
        assert!((a - 2.0).abs() < 1e-9);
    }

    #[test]
    fn solver_rejects_zero_budget() {
        let sens = SensitivityBounds::histogram();
        let zero = RdpGuarantee::new(2.0, 0.0).unwrap();
        assert!(alpha_min_for_target(&zero, &sens, 1.0).is_err());
        assert!(alpha_min_closed_form(&zero, &sens, 1.0).is_err());
        assert!(r_for_target(&zero, &sens, 10.0).is_err());
    }

    #[test]
    fn r_shrinks_with_budget() {
        let sens = SensitivityBounds::new(4.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [1.0, 1e-2, 1e-4, 1e-8] {
            let r = r_for_target(&RdpGuarantee::new(2.0, eps).unwrap(), &sens, 10.0).unwrap();
            assert!(r < prev && r > 0.0);
            prev = r;
        }
        // small r: ε ∝ r², so four decades of ε move r by two
        let r4 = r_for_target(&RdpGuarantee::new(2.0, 1e-4).unwrap(), &sens, 10.0).unwrap();
        assert!((r4 / prev / 100.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn r_near_order_cap() {
        // Huge budget pushes r toward α_m / ((λ−1)Δ∞) = 10.
        let sens = SensitivityBounds::new(4.0, 1.0).unwrap();
        let target = RdpGuarantee::new(2.0, 1e6).unwrap();
        let r = r_for_target(&target, &sens, 10.0).unwrap();
        assert!(r < 10.0 && r > 9.0, "{r}");
        let e = rdp_epsilon(2.0, &sens, PriorFloor::new(10.0, r).unwrap()).unwrap().value();
        assert!(((e - 1e6) / 1e6).abs() < 1e-8, "{e}");
    }

    #[test]
    fn conversion_returns_interior_order() {
        let c = rdp_to_approx_dp(floor(4.0), &SensitivityBounds::histogram(), 1.0).unwrap();
        assert!(c.lambda > 1.0 && c.lambda < 5.0);
        assert!(c.guarantee.delta > 0.0 && c.guarantee.delta < 1.0);
        assert!(!c.vacuous);
    }

    #[test]
    fn conversion_vacuous_when_floor_tiny() {
        let c = rdp_to_approx_dp(floor(1e-3), &SensitivityBounds::histogram(), 1e-3).unwrap();
        assert!(c.vacuous);
        assert_eq!(c.guarantee.delta, 1.0);
    }

    #[test]
    fn composition() {
        let a = RdpGuarantee::new(2.0, 0.5).unwrap();
        assert_eq!(compose(&a, &a), RdpGuarantee::new(2.0, 1.0).unwrap());
        let z = RdpGuarantee::new(3.0, 0.0).unwrap();
        let e = RdpGuarantee::new(2.0, 0.7).unwrap();
        assert_eq!(compose(&e, &z), e);
        let parts = vec![RdpGuarantee::new(2.0, 0.25).unwrap(); 4];
        let total = compose_all(&parts).unwrap();
        assert_eq!(total.lambda, 2.0);
        assert!((total.epsilon - 1.0).abs() < 1e-15);
        assert!(compose_all(&[]).is_none());
    }

    #[test]
    fn prior_spec_caches() {
        let p = PriorSpec::new(vec![3.0, 1.5, 2.0]).unwrap().with_r(0.5).unwrap();
        assert_eq!(p.alpha_min(), 1.5);
        assert_eq!(p.alpha0(), 6.5);
        assert_eq!(p.floor(), PriorFloor { alpha_min: 1.5, r: 0.5 });
        assert!(PriorSpec::new(vec![1.0, 0.0]).is_err());
        assert!(PriorSpec::uniform(1.0, 3).unwrap().with_r(0.0).is_err());
    }
}
