//! Private release of normalized histograms.
//!
//! Three mechanisms, each calibrated to the same `(λ, ε)`-RDP target:
//!
//! * the Dirichlet mechanism `Y ~ Dir(r·x + α)` with `α_m` solved from the
//!   accountant,
//! * the Gaussian mechanism `x/N + N(0, σ² I)` with `σ² = λΔ₂²/(2N²ε)`,
//! * the Laplace mechanism `x/N + Laplace(Δ₁/(Nε))^d`, which is `ε`-DP and
//!   therefore `(λ, ε)`-RDP at every order.
//!
//! Gaussian and Laplace outputs are raw noisy vectors; they are not projected
//! back onto the simplex unless the caller asks for it.

mod bench;
mod sampling;
mod utility;

pub use bench::{
    crossover_summary, histogram_benchmark, kl_utility_benchmark, BenchmarkConfig, BenchmarkRow, Crossover,
    KlUtilityConfig, KlUtilityRow,
};
pub use sampling::{gamma_variate, laplace_variate, ln_gamma_variate, sample_dirichlet, sample_multinomial};
pub use utility::{dirichlet_utility_bound, gaussian_utility_bound, multinomial_dirichlet_kl_bound};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::accountant::{alpha_min_for_target, PriorSpec, RdpGuarantee, SensitivityBounds};
use crate::divergence::DirichletParams;
use crate::error::{domain, Result};

/// A histogram of `n` observations over `d` bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    counts: Vec<f64>,
    n: f64,
}

impl Histogram {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        if counts.is_empty() {
            return domain("histogram has no bins");
        }
        if let Some(bad) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return domain(format!("histogram counts must be nonnegative, got {bad}"));
        }
        let n = counts.iter().sum();
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Total mass `N = Σ counts`.
    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// `p = x / N`. Requires `N > 0`.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        self.require_mass()?;
        Ok(self.counts.iter().map(|c| c / self.n).collect())
    }

    fn require_mass(&self) -> Result<()> {
        if self.n > 0.0 {
            Ok(())
        } else {
            domain("histogram is empty (N = 0)")
        }
    }
}

/// A point strictly inside the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    probs: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return domain("simplex point needs at least two coordinates");
        }
        if probs.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return domain("simplex coordinates must be positive");
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return domain(format!("simplex coordinates sum to {s}"));
        }
        Ok(Self { probs })
    }

    /// Normalizes `exp(logs)`, flooring underflowed coordinates at the
    /// smallest positive normal.
    pub(crate) fn from_log_weights(logs: &[f64]) -> Self {
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = w.iter().sum();
        let probs = w.iter().map(|v| (v / s).max(f64::MIN_POSITIVE)).collect();
        Self { probs }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }
}

/// `Y ~ Dir(r·x + α)`.
pub fn dirichlet_mechanism<R: Rng + ?Sized>(
    hist: &Histogram,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<SimplexPoint> {
    let params = DirichletParams::posterior(hist.counts(), prior.alpha(), prior.r())?;
    Ok(sample_dirichlet(&params, rng))
}

/// Noise variance `λΔ₂²/(2N²ε)` of the Gaussian mechanism on `x/N`.
pub fn gaussian_sigma_sq(n: f64, target: &RdpGuarantee, sens: &SensitivityBounds) -> Result<f64> {
    if !(n > 0.0) {
        return domain("Gaussian mechanism needs N > 0");
    }
    if !(target.epsilon > 0.0) {
        return domain("Gaussian mechanism needs ε > 0");
    }
    Ok(target.lambda * sens.delta2_sq / (2.0 * n * n * target.epsilon))
}

/// `x/N + Z`, `Z ~ N(0, σ² I)`.
pub fn gaussian_mechanism<R: Rng + ?Sized>(
    hist: &Histogram,
    target: &RdpGuarantee,
    sens: &SensitivityBounds,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let p = hist.normalized()?;
    let sigma = gaussian_sigma_sq(hist.n(), target, sens)?.sqrt();
    Ok(p.into_iter().map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal)).collect())
}

/// Per-coordinate scale `Δ₁/(N ε)` of the Laplace mechanism on `x/N`.
pub fn laplace_scale(n: f64, epsilon_pure: f64, l1_sensitivity: f64) -> Result<f64> {
    if !(n > 0.0) {
        return domain("Laplace mechanism needs N > 0");
    }
    if !(epsilon_pure > 0.0) {
        return domain("Laplace mechanism needs ε > 0");
    }
    if !(l1_sensitivity >= 0.0) {
        return domain("ℓ¹ sensitivity must be >= 0");
    }
    Ok(l1_sensitivity / (n * epsilon_pure))
}

/// `x/N + L`, `L` i.i.d. Laplace with scale `Δ₁/(N ε)`.
pub fn laplace_mechanism<R: Rng + ?Sized>(
    hist: &Histogram,
    epsilon_pure: f64,
    l1_sensitivity: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let p = hist.normalized()?;
    let scale = laplace_scale(hist.n(), epsilon_pure, l1_sensitivity)?;
    Ok(p.into_iter().map(|v| v + laplace_variate(rng, scale)).collect())
}

/// `‖released − reference‖₂`.
pub fn l2_loss(released: &[f64], reference: &[f64]) -> Result<f64> {
    if released.len() != reference.len() {
        return domain(format!("length mismatch: {} vs {}", released.len(), reference.len()));
    }
    Ok(released.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Euclidean projection onto the closed probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Which mechanism produced a release.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Dirichlet,
    Gaussian,
    Laplace,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 3] =
        [MechanismKind::Dirichlet, MechanismKind::Gaussian, MechanismKind::Laplace];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Dirichlet => "dirichlet",
            MechanismKind::Gaussian => "gaussian",
            MechanismKind::Laplace => "laplace",
        }
    }
}

/// A mechanism bound to the guarantee it was calibrated for.
#[derive(Debug, Clone, PartialEq)]
pub enum CalibratedMechanism {
    Dirichlet { prior: PriorSpec, guarantee: RdpGuarantee },
    Gaussian { sens: SensitivityBounds, guarantee: RdpGuarantee },
    Laplace { l1_sensitivity: f64, guarantee: RdpGuarantee },
}

impl CalibratedMechanism {
    /// Dirichlet mechanism with a uniform prior at the solved floor.
    pub fn dirichlet(target: RdpGuarantee, sens: &SensitivityBounds, d: usize) -> Result<Self> {
        let alpha = alpha_min_for_target(&target, sens, 1.0)?;
        Ok(CalibratedMechanism::Dirichlet { prior: PriorSpec::uniform(alpha, d)?, guarantee: target })
    }

    pub fn gaussian(target: RdpGuarantee, sens: SensitivityBounds) -> Self {
        CalibratedMechanism::Gaussian { sens, guarantee: target }
    }

    /// Pure `ε`-DP with `ε` equal to the RDP target's budget, which implies
    /// `(λ, ε)`-RDP for every `λ`.
    pub fn laplace(target: RdpGuarantee, l1_sensitivity: f64) -> Self {
        CalibratedMechanism::Laplace { l1_sensitivity, guarantee: target }
    }

    pub fn kind(&self) -> MechanismKind {
        match self {
            CalibratedMechanism::Dirichlet { .. } => MechanismKind::Dirichlet,
            CalibratedMechanism::Gaussian { .. } => MechanismKind::Gaussian,
            CalibratedMechanism::Laplace { .. } => MechanismKind::Laplace,
        }
    }

    pub fn guarantee(&self) -> RdpGuarantee {
        match self {
            CalibratedMechanism::Dirichlet { guarantee, .. }
            | CalibratedMechanism::Gaussian { guarantee, .. }
            | CalibratedMechanism::Laplace { guarantee, .. } => *guarantee,
        }
    }

    pub fn release<R: Rng + ?Sized>(&self, hist: &Histogram, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            CalibratedMechanism::Dirichlet { prior, .. } => {
                Ok(dirichlet_mechanism(hist, prior, rng)?.into_vec())
            }
            CalibratedMechanism::Gaussian { sens, guarantee } => {
                gaussian_mechanism(hist, guarantee, sens, rng)
            }
            CalibratedMechanism::Laplace { l1_sensitivity, guarantee } => {
                laplace_mechanism(hist, guarantee.epsilon, *l1_sensitivity, rng)
            }
        }
    }
}
