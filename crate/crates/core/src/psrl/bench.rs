use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::mdp::{RiverSwimParams, TabularMdp};
use super::{psrl_run, AgentConfig, PrivacyBudgetPlan, RewardPrivacy, Variant};
use crate::accountant::{RdpGuarantee, SensitivityBounds};
use crate::error::{Error, Result};
use crate::kvconf::{parse_list, parse_value};
use crate::rng::RngSeed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsrlConfig {
    pub env: RiverSwimParams,
    pub epsilons: Vec<f64>,
    pub episodes: usize,
    pub repetitions: usize,
    pub variants: Vec<Variant>,
    /// Rényi order of the transition budget.
    pub lambda: f64,
    pub agent: AgentConfig,
    /// `None` leaves the reward means unperturbed in the private variants.
    pub reward_privacy: Option<RewardPrivacy>,
}

impl Default for PsrlConfig {
    fn default() -> Self {
        Self {
            env: RiverSwimParams::default(),
            epsilons: vec![0.01, 0.1, 1.0, 10.0],
            episodes: 300,
            repetitions: 20,
            variants: Variant::ALL.to_vec(),
            lambda: 2.0,
            agent: AgentConfig::default(),
            reward_privacy: Some(RewardPrivacy::default()),
        }
    }
}

impl PsrlConfig {
    /// Overrides fields from `key = value` pairs. Keys not recognized here
    /// are passed to [`RiverSwimParams::apply`].
    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<()> {
        let mut env = BTreeMap::new();
        let mut reward = self.reward_privacy.unwrap_or_default();
        let mut privatize = self.reward_privacy.is_some();
        let (mut d2, mut dinf) = (self.agent.sens.delta2_sq, self.agent.sens.delta_inf);
        for (k, v) in kv {
            match k.as_str() {
                "epsilons" => self.epsilons = parse_list(k, v)?,
                "episodes" => self.episodes = parse_value(k, v)?,
                "repetitions" => self.repetitions = parse_value(k, v)?,
                "variants" => {
                    self.variants = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(Variant::parse)
                        .collect::<Result<_>>()?
                }
                "lambda" => self.lambda = parse_value(k, v)?,
                "prior_alpha" => self.agent.prior_alpha = parse_value(k, v)?,
                "delta2_sq" => d2 = parse_value(k, v)?,
                "delta_inf" => dinf = parse_value(k, v)?,
                "mu0" => self.agent.reward_prior.mu0 = parse_value(k, v)?,
                "kappa0" => self.agent.reward_prior.kappa0 = parse_value(k, v)?,
                "a0" => self.agent.reward_prior.a0 = parse_value(k, v)?,
                "b0" => self.agent.reward_prior.b0 = parse_value(k, v)?,
                "reward_epsilon" => reward.epsilon = parse_value(k, v)?,
                "reward_lambda_max" => reward.lambda_max = parse_value(k, v)?,
                "reward_sensitivity" => reward.sensitivity = parse_value(k, v)?,
                "privatize_rewards" => privatize = parse_value(k, v)?,
                _ => {
                    env.insert(k.clone(), v.clone());
                }
            }
        }
        self.env.apply(&env)?;
        self.agent.sens =
            SensitivityBounds::new(d2, dinf).map_err(|e| Error::Config(format!("sensitivities: {e}")))?;
        self.reward_privacy = privatize.then_some(reward);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.repetitions == 0 {
            return Err(Error::Config("episodes and repetitions must be >= 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no variants selected".into()));
        }
        let private = self.variants.iter().any(|v| *v != Variant::NonPrivate);
        if private && self.epsilons.is_empty() {
            return Err(Error::Config("private variants need at least one ε".into()));
        }
        if let Some(bad) = self.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::Config(format!("ε must be finite and > 0, got {bad}")));
        }
        if !(self.lambda > 1.0) {
            return Err(Error::Config(format!("λ must be > 1, got {}", self.lambda)));
        }
        if let Some(rp) = &self.reward_privacy {
            rp.validate()?;
        }
        self.agent.reward_prior.validate()
    }
}

/// One learning-curve point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsrlRow {
    pub variant: Variant,
    /// `inf` for the non-private baseline.
    pub epsilon: f64,
    pub repetition: usize,
    pub episode: usize,
    pub episodic_reward: f64,
    pub cumulative_reward: f64,
    /// `inf` for the non-private baseline.
    pub cumulative_rdp_epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunTotal {
    pub variant: Variant,
    pub epsilon: f64,
    pub repetition: usize,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsrlResult {
    pub rows: Vec<PsrlRow>,
    pub totals: Vec<RunTotal>,
}

/// Runs every configured variant, ε and repetition. The non-private
/// baseline does not depend on ε and runs once per repetition.
///
/// Each run has its own seed derived from `(variant, ε, repetition)`.
pub fn psrl_benchmark(config: &PsrlConfig, seed: RngSeed) -> Result<PsrlResult> {
    config.validate()?;
    let mdp = config.env.build()?;
    let mut cells: Vec<(Variant, f64)> = Vec::new();
    for &v in &config.variants {
        if v == Variant::NonPrivate {
            cells.push((v, f64::INFINITY));
        } else {
            cells.extend(config.epsilons.iter().map(|&e| (v, e)));
        }
    }
    // Build every plan first so an infeasible budget fails before any run.
    let mut plans = Vec::with_capacity(cells.len());
    for &(v, eps) in &cells {
        plans.push(match v {
            Variant::NonPrivate => None,
            _ => {
                let total = RdpGuarantee::new(config.lambda, eps)?;
                let p = PrivacyBudgetPlan::new(total, config.episodes, v, config.reward_privacy)?;
                super::TransitionSampler::calibrate(&p, config.agent.prior_alpha, &config.agent.sens)?;
                Some(p)
            }
        });
    }

    let mut rows = Vec::new();
    let mut totals = Vec::new();
    for (&(v, eps), plan) in cells.iter().zip(&plans) {
        for rep in 0..config.repetitions {
            let run_seed = seed.derive(&[v as u64, eps.to_bits(), rep as u64]);
            let ledger = psrl_run(&mdp, plan.as_ref(), &config.agent, config.episodes, run_seed)?;
            for rec in &ledger.records {
                rows.push(PsrlRow {
                    variant: v,
                    epsilon: eps,
                    repetition: rep,
                    episode: rec.episode,
                    episodic_reward: rec.episodic_reward,
                    cumulative_reward: rec.cumulative_reward,
                    cumulative_rdp_epsilon: rec.cumulative.map_or(f64::INFINITY, |g| g.epsilon),
                });
            }
            totals.push(RunTotal { variant: v, epsilon: eps, repetition: rep, total: ledger.total_reward() });
        }
    }
    Ok(PsrlResult { rows, totals })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsrlSummary {
    pub variant: Variant,
    pub epsilon: f64,
    pub runs: usize,
    pub mean_total: f64,
    pub stderr: f64,
}

/// Mean total reward per `(variant, ε)`, in order of first appearance.
pub fn summarize(totals: &[RunTotal]) -> Vec<PsrlSummary> {
    let mut keys: Vec<(Variant, u64)> = Vec::new();
    for t in totals {
        let k = (t.variant, t.epsilon.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(v, bits)| {
            let xs: Vec<f64> = totals
                .iter()
                .filter(|t| t.variant == v && t.epsilon.to_bits() == bits)
                .map(|t| t.total)
                .collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = if xs.len() > 1 {
                xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            PsrlSummary {
                variant: v,
                epsilon: f64::from_bits(bits),
                runs: xs.len(),
                mean_total: mean,
                stderr: (var / n).sqrt(),
            }
        })
        .collect()
}

/// One-sided Mann-Whitney test of "`a` tends to exceed `b`". Returns the
/// p-value from the normal approximation with tie and continuity
/// corrections.
pub fn rank_test_greater(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let mut pooled: Vec<(f64, bool)> =
        a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += pooled[i..=j].iter().filter(|p| p.1).count() as f64 * avg;
        i = j + 1;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let nt = n1 + n2;
    let var = n1 * n2 / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)));
    if var <= 0.0 {
        return if u > n1 * n2 / 2.0 { 0.0 } else { 1.0 };
    }
    let z = (u - n1 * n2 / 2.0 - 0.5) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("valid");
    1.0 - std_normal.cdf(z)
}

/// Mean episodic reward of the uniformly random policy, by simulation.
pub fn random_policy_baseline(mdp: &TabularMdp, episodes: usize, seed: RngSeed) -> f64 {
    use rand::Rng;
    let mut rng = seed.rng();
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut s = mdp.sample_initial(&mut rng);
        for _ in 0..mdp.horizon() {
            let a = rng.gen_range(0..mdp.n_actions());
            let (s2, r) = mdp.step(s, a, &mut rng);
            total += r;
            s = s2;
        }
    }
    total / episodes.max(1) as f64
}
