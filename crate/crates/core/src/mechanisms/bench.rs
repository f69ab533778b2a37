//! Seeded Monte-Carlo benchmarks over grids of (dimension, budget, size).
//!
//! Every cell draws from streams derived from the root seed and the cell's
//! coordinates, so a cell's numbers do not depend on which other cells run
//! or in what order.

use serde::{Deserialize, Serialize};

use super::{
    l2_loss, multinomial_dirichlet_kl_bound, project_to_simplex, sample_dirichlet, sample_multinomial,
    CalibratedMechanism, Histogram, MechanismKind,
};
use crate::accountant::{alpha_min_for_target, RdpGuarantee, SensitivityBounds};
use crate::divergence::{kl_divergence, DirichletParams};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Grid and calibration for [`histogram_benchmark`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub dims: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub ns: Vec<u64>,
    pub trials: usize,
    pub lambda: f64,
    pub sens: SensitivityBounds,
    /// ℓ¹ sensitivity of the histogram for the Laplace baseline.
    pub l1_sensitivity: f64,
    /// Project Gaussian/Laplace releases onto the simplex before scoring.
    pub project: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            dims: vec![10, 1000],
            epsilons: vec![0.01, 0.1, 1.0],
            ns: vec![100, 1_000, 10_000, 100_000, 1_000_000],
            trials: 100,
            lambda: 2.0,
            sens: SensitivityBounds::histogram(),
            l1_sensitivity: 2.0,
            project: false,
        }
    }
}

impl BenchmarkConfig {
    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.epsilons.is_empty() || self.ns.is_empty() {
            return Err(Error::Config("benchmark grids must be non-empty".into()));
        }
        if self.trials < 2 {
            return Err(Error::Config("need at least two trials per cell".into()));
        }
        if self.dims.iter().any(|&d| d < 2) {
            return Err(Error::Config("dimensions must be >= 2".into()));
        }
        if self.ns.contains(&0) {
            return Err(Error::Config("sample sizes must be >= 1".into()));
        }
        for &eps in &self.epsilons {
            RdpGuarantee::new(self.lambda, eps)?;
            if eps <= 0.0 {
                return Err(Error::Config("budgets must be > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub mechanism: MechanismKind,
    pub d: usize,
    pub epsilon: f64,
    pub n: u64,
    pub trials: usize,
    pub mean_l2_loss: f64,
    pub stderr: f64,
    /// The guarantee the mechanism was calibrated to.
    pub guarantee: RdpGuarantee,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn cell_seed(root: RngSeed, d: usize, eps: f64, n: u64) -> RngSeed {
    root.derive(&[d as u64, eps.to_bits(), n])
}

/// Mean `ℓ²`-loss of the Dirichlet, Gaussian and Laplace mechanisms on
/// synthetic histograms.
///
/// Each trial draws `p ~ Dir(1, …, 1)` and `x ~ Multinomial(N, p)`; every
/// mechanism releases `x/N` and is scored against it. Rows come out in grid
/// order (d, then ε, then N) with the three mechanisms per cell.
pub fn histogram_benchmark(config: &BenchmarkConfig, seed: RngSeed) -> Result<Vec<BenchmarkRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(3 * config.dims.len() * config.epsilons.len() * config.ns.len());
    for &d in &config.dims {
        let uniform = DirichletParams::new(vec![1.0; d])?;
        for &eps in &config.epsilons {
            let target = RdpGuarantee::new(config.lambda, eps)?;
            let mechanisms = [
                CalibratedMechanism::dirichlet(target, &config.sens, d)?,
                CalibratedMechanism::gaussian(target, config.sens),
                CalibratedMechanism::laplace(target, config.l1_sensitivity),
            ];
            for &n in &config.ns {
                let cell = cell_seed(seed, d, eps, n);
                let mut data_rng = cell.derive(&[0]).rng();
                let mut mech_rngs: Vec<_> = (1..=3u64).map(|k| cell.derive(&[k]).rng()).collect();
                let mut losses: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(config.trials)).collect();
                for _ in 0..config.trials {
                    let p = sample_dirichlet(&uniform, &mut data_rng);
                    let hist = Histogram::new(sample_multinomial(n, p.as_slice(), &mut data_rng))?;
                    let reference = hist.normalized()?;
                    for (k, m) in mechanisms.iter().enumerate() {
                        let mut out = m.release(&hist, &mut mech_rngs[k])?;
                        if config.project && m.kind() != MechanismKind::Dirichlet {
                            out = project_to_simplex(&out);
                        }
                        losses[k].push(l2_loss(&out, &reference)?);
                    }
                }
                for (m, l) in mechanisms.iter().zip(&losses) {
                    let (mean, se) = mean_and_stderr(l);
                    rows.push(BenchmarkRow {
                        mechanism: m.kind(),
                        d,
                        epsilon: eps,
                        n,
                        trials: config.trials,
                        mean_l2_loss: mean,
                        stderr: se,
                        guarantee: m.guarantee(),
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Ordering of the Dirichlet and Gaussian mean-loss curves along `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossover {
    pub dirichlet_better_at_smallest_n: bool,
    pub gaussian_better_at_largest_n: bool,
    /// Number of sign changes of `dirichlet − gaussian` along increasing N.
    pub crossings: usize,
}

impl Crossover {
    /// Dirichlet wins for small N, Gaussian for large N, one crossing.
    pub fn holds(&self) -> bool {
        self.dirichlet_better_at_smallest_n && self.gaussian_better_at_largest_n && self.crossings == 1
    }
}

/// Compares the Dirichlet and Gaussian curves for one `(d, ε)` slice.
pub fn crossover_summary(rows: &[BenchmarkRow], d: usize, epsilon: f64) -> Option<Crossover> {
    let curve = |kind: MechanismKind| {
        let mut pts: Vec<(u64, f64)> = rows
            .iter()
            .filter(|r| r.mechanism == kind && r.d == d && r.epsilon == epsilon)
            .map(|r| (r.n, r.mean_l2_loss))
            .collect();
        pts.sort_by_key(|p| p.0);
        pts
    };
    let dir = curve(MechanismKind::Dirichlet);
    let gau = curve(MechanismKind::Gaussian);
    if dir.len() < 2 || dir.len() != gau.len() || dir.iter().zip(&gau).any(|(a, b)| a.0 != b.0) {
        return None;
    }
    let diffs: Vec<f64> = dir.iter().zip(&gau).map(|(a, b)| a.1 - b.1).collect();
    let crossings = diffs.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
    Some(Crossover {
        dirichlet_better_at_smallest_n: diffs[0] < 0.0,
        gaussian_better_at_largest_n: *diffs.last().unwrap() > 0.0,
        crossings,
    })
}

/// Grid for [`kl_utility_benchmark`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlUtilityConfig {
    /// Sparsity parameters: `p ~ Dir(η, …, η)`.
    pub etas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub ns: Vec<u64>,
    pub draws: usize,
    pub d: usize,
    /// Non-private prior value (uniform), at least 1.
    pub base_alpha: f64,
    pub lambda: f64,
    pub sens: SensitivityBounds,
}

impl Default for KlUtilityConfig {
    fn default() -> Self {
        Self {
            etas: vec![0.5, 1.0, 10.0],
            epsilons: vec![0.01, 0.1, 1.0],
            ns: vec![100, 1_000, 10_000],
            draws: 500,
            d: 10,
            base_alpha: 1.0,
            lambda: 2.0,
            sens: SensitivityBounds::histogram(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlUtilityRow {
    pub eta: f64,
    pub epsilon: f64,
    pub n: u64,
    pub draws: usize,
    /// Solved private prior value (uniform).
    pub alpha_prime: f64,
    pub mean_kl: f64,
    pub stderr_kl: f64,
    /// Mean over draws of the per-`p` expected-KL bound.
    pub mean_bound: f64,
}

/// Monte-Carlo cost of concentrated sampling: `KL(Dir(X + α) ‖ Dir(X + α'))`
/// with `α'` solved for the `(λ, ε)` target.
///
/// Draw `k` of a row uses `p ~ Dir(η, …, η)` from a stream keyed on `(η, k)`
/// and `X ~ Multinomial(N, p)` keyed on `(η, k, N)`, so rows that differ only
/// in `ε` or `N` share their random inputs.
pub fn kl_utility_benchmark(config: &KlUtilityConfig, seed: RngSeed) -> Result<Vec<KlUtilityRow>> {
    if config.etas.is_empty() || config.epsilons.is_empty() || config.ns.is_empty() {
        return Err(Error::Config("KL utility grids must be non-empty".into()));
    }
    if config.draws < 2 {
        return Err(Error::Config("need at least two draws per cell".into()));
    }
    if config.d < 2 {
        return Err(Error::Config("dimension must be >= 2".into()));
    }
    if !(config.base_alpha >= 1.0) {
        return Err(Error::Config("base prior must be >= 1".into()));
    }
    if config.etas.iter().any(|e| !(*e > 0.0)) || config.ns.contains(&0) {
        return Err(Error::Config("η must be > 0 and N >= 1".into()));
    }
    let alpha = vec![config.base_alpha; config.d];
    let mut rows = Vec::new();
    for &eta in &config.etas {
        let sparsity = DirichletParams::new(vec![eta; config.d])?;
        for &eps in &config.epsilons {
            let target = RdpGuarantee::new(config.lambda, eps)?;
            let alpha_prime = alpha_min_for_target(&target, &config.sens, 1.0)?;
            if alpha_prime < config.base_alpha {
                return Err(Error::Config(format!(
                    "ε = {eps} needs α' = {alpha_prime} below the base prior {}",
                    config.base_alpha
                )));
            }
            let alpha_p = vec![alpha_prime; config.d];
            for &n in &config.ns {
                let mut kls = Vec::with_capacity(config.draws);
                let mut bound_sum = 0.0;
                for k in 0..config.draws {
                    let p = sample_dirichlet(&sparsity, &mut seed.derive(&[eta.to_bits(), k as u64]).rng());
                    let x = sample_multinomial(
                        n,
                        p.as_slice(),
                        &mut seed.derive(&[eta.to_bits(), k as u64, n]).rng(),
                    );
                    let post = DirichletParams::posterior(&x, &alpha, 1.0)?;
                    let private = DirichletParams::posterior(&x, &alpha_p, 1.0)?;
                    kls.push(kl_divergence(&post, &private)?);
                    bound_sum += multinomial_dirichlet_kl_bound(&p, &alpha, &alpha_p, n)?;
                }
                let (mean_kl, stderr_kl) = mean_and_stderr(&kls);
                rows.push(KlUtilityRow {
                    eta,
                    epsilon: eps,
                    n,
                    draws: config.draws,
                    alpha_prime,
                    mean_kl,
                    stderr_kl,
                    mean_bound: bound_sum / config.draws as f64,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> BenchmarkConfig {
        BenchmarkConfig {
            dims: vec![5],
            epsilons: vec![1.0],
            ns: vec![50, 500],
            trials: 10,
            ..BenchmarkConfig::default()
        }
    }

    #[test]
    fn empty_grids_rejected() {
        let mut c = small_config();
        c.ns.clear();
        assert!(matches!(histogram_benchmark(&c, RngSeed(0)), Err(Error::Config(_))));
        let k = KlUtilityConfig { etas: vec![], ..KlUtilityConfig::default() };
        assert!(matches!(kl_utility_benchmark(&k, RngSeed(0)), Err(Error::Config(_))));
    }

    #[test]
    fn cell_results_independent_of_grid() {
        let full = histogram_benchmark(&small_config(), RngSeed(4)).unwrap();
        let mut only_large = small_config();
        only_large.ns = vec![500];
        let part = histogram_benchmark(&only_large, RngSeed(4)).unwrap();
        assert_eq!(&full[3..], &part[..]);
    }

    #[test]
    fn every_cell_shares_one_guarantee() {
        let rows = histogram_benchmark(&small_config(), RngSeed(2)).unwrap();
        for cell in rows.chunks(3) {
            assert!(cell.iter().all(|r| r.guarantee == cell[0].guarantee));
            assert_eq!(cell[0].guarantee.lambda, 2.0);
        }
    }

    #[test]
    fn crossover_counting() {
        let mk = |kind, n, loss| BenchmarkRow {
            mechanism: kind,
            d: 3,
            epsilon: 0.1,
            n,
            trials: 2,
            mean_l2_loss: loss,
            stderr: 0.0,
            guarantee: RdpGuarantee { lambda: 2.0, epsilon: 0.1 },
        };
        let rows = vec![
            mk(MechanismKind::Dirichlet, 10, 0.1),
            mk(MechanismKind::Gaussian, 10, 1.0),
            mk(MechanismKind::Dirichlet, 100, 0.05),
            mk(MechanismKind::Gaussian, 100, 0.01),
            mk(MechanismKind::Dirichlet, 1000, 0.02),
            mk(MechanismKind::Gaussian, 1000, 0.001),
        ];
        let c = crossover_summary(&rows, 3, 0.1).unwrap();
        assert!(c.holds());
        assert_eq!(c.crossings, 1);
        assert!(crossover_summary(&rows, 4, 0.1).is_none());
    }
}
