//! Private posterior sampling for reinforcement learning.
//!
//! Each episode the agent draws a transition model from a Dirichlet
//! posterior per state-action pair and reward means from a Normal-Gamma
//! posterior, plans optimally in the sampled model and acts greedily for one
//! episode in the true environment. Privacy comes from the transition draw:
//! diffuse sampling scales the counts down (`Dir(r·x + α)`), concentrated
//! sampling raises the prior (`Dir(x + α')`). Both are calibrated so every
//! episode's draw meets an equal share of the total RDP budget.

mod bench;
mod mdp;
mod planner;

pub use bench::{
    psrl_benchmark, random_policy_baseline, rank_test_greater, summarize, PsrlConfig, PsrlResult, PsrlRow,
    PsrlSummary, RunTotal,
};
pub use mdp::{riverswim, RewardDist, RiverSwimParams, TabularMdp, LEFT, RIGHT};
pub use planner::{evaluate_policy, value_iteration_finite_horizon, Policy};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::accountant::{
    alpha_min_for_target, compose, r_for_target, rdp_epsilon, PriorFloor, RdpGuarantee, SensitivityBounds,
};
use crate::divergence::DirichletParams;
use crate::error::{domain, Error, Result};
use crate::mechanisms::{gamma_variate, sample_dirichlet};
use crate::rng::RngSeed;
use crate::Bound;

/// Observed transitions `x[a][s][s']`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionCounts {
    n_states: usize,
    counts: Vec<f64>,
}

impl TransitionCounts {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self { n_states, counts: vec![0.0; n_actions * n_states * n_states] }
    }

    pub fn record(&mut self, s: usize, a: usize, s2: usize) {
        self.counts[(a * self.n_states + s) * self.n_states + s2] += 1.0;
    }

    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (a * self.n_states + s) * self.n_states;
        &self.counts[start..start + self.n_states]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// Sufficient statistics of the rewards observed for one state-action pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardStats {
    pub n: f64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl RewardStats {
    pub fn push(&mut self, r: f64) {
        self.n += 1.0;
        self.sum += r;
        self.sum_sq += r * r;
    }
}

/// `μ | τ ~ N(μ₀, 1/(κ₀τ))`, `τ ~ Gamma(a₀, rate b₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGammaPrior {
    pub mu0: f64,
    pub kappa0: f64,
    pub a0: f64,
    pub b0: f64,
}

impl Default for NormalGammaPrior {
    fn default() -> Self {
        Self { mu0: 0.0, kappa0: 1.0, a0: 1.0, b0: 1.0 }
    }
}

impl NormalGammaPrior {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa0 > 0.0 && self.a0 > 0.0 && self.b0 > 0.0 && self.mu0.is_finite()) {
            return Err(Error::Config("Normal-Gamma prior needs κ₀, a₀, b₀ > 0".into()));
        }
        Ok(())
    }

    /// Posterior hyperparameters `(μₙ, κₙ, aₙ, bₙ)`.
    pub fn update(&self, stats: &RewardStats) -> (f64, f64, f64, f64) {
        if stats.n == 0.0 {
            return (self.mu0, self.kappa0, self.a0, self.b0);
        }
        let mean = stats.sum / stats.n;
        let ss = (stats.sum_sq - stats.n * mean * mean).max(0.0);
        let kappa = self.kappa0 + stats.n;
        let mu = (self.kappa0 * self.mu0 + stats.sum) / kappa;
        let a = self.a0 + 0.5 * stats.n;
        let b = self.b0 + 0.5 * ss + 0.5 * self.kappa0 * stats.n * (mean - self.mu0).powi(2) / kappa;
        (mu, kappa, a, b)
    }
}

/// The Gaussian mechanism applied to every sampled reward mean.
///
/// The released statistic for a state-action pair is the posterior mean
/// `μₙ = (κ₀μ₀ + Σ rᵢ)/κₙ`, which moves by at most `Δ/κₙ` when one reward
/// in a range of width `Δ` changes. Noise with variance
/// `σ² = λ_max (Δ/κₙ)² / (2ε)` makes each release `(λ, ε)`-RDP for every
/// order `λ <= lambda_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardPrivacy {
    pub epsilon: f64,
    pub lambda_max: f64,
    pub sensitivity: f64,
}

impl Default for RewardPrivacy {
    fn default() -> Self {
        Self { epsilon: 0.5, lambda_max: 2.0, sensitivity: 1.0 }
    }
}

impl RewardPrivacy {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.lambda_max > 1.0 && self.sensitivity >= 0.0) {
            return Err(Error::Config("reward privacy needs ε > 0, λ_max > 1 and Δ >= 0".into()));
        }
        Ok(())
    }

    /// Noise variance for a posterior mean backed by `kappa_n = κ₀ + n`.
    pub fn noise_variance(&self, kappa_n: f64) -> f64 {
        let sens = self.sensitivity / kappa_n;
        self.lambda_max * sens * sens / (2.0 * self.epsilon)
    }

    /// The RDP budget of one release at order `lambda`, or `None` beyond
    /// `lambda_max`.
    pub fn guarantee_at(&self, lambda: f64) -> Option<RdpGuarantee> {
        if lambda > self.lambda_max {
            return None;
        }
        RdpGuarantee::new(lambda, lambda / self.lambda_max * self.epsilon).ok()
    }
}

/// One posterior draw of the reward mean for every state-action pair,
/// optionally privatized by [`RewardPrivacy`].
pub fn private_reward_posterior(
    stats: &[RewardStats],
    prior: &NormalGammaPrior,
    budget: Option<&RewardPrivacy>,
    seed: RngSeed,
) -> Vec<f64> {
    let mut rng = seed.rng();
    stats
        .iter()
        .map(|st| {
            let (mu, kappa, a, b) = prior.update(st);
            let tau = gamma_variate(&mut rng, a) / b;
            let z: f64 = rng.sample(StandardNormal);
            let mean = mu + z / (kappa * tau).sqrt();
            match budget {
                Some(b) if b.sensitivity > 0.0 => {
                    let noise: f64 = rng.sample(StandardNormal);
                    mean + b.noise_variance(kappa).sqrt() * noise
                }
                _ => mean,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    NonPrivate,
    Diffuse,
    Concentrated,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::NonPrivate, Variant::Diffuse, Variant::Concentrated];

    pub fn name(self) -> &'static str {
        match self {
            Variant::NonPrivate => "non-private",
            Variant::Diffuse => "diffuse",
            Variant::Concentrated => "concentrated",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

/// How a total RDP budget is split over the episodes of a private run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudgetPlan {
    pub total: RdpGuarantee,
    pub episodes: usize,
    pub per_episode: RdpGuarantee,
    pub variant: Variant,
    pub reward_budget: Option<RewardPrivacy>,
}

impl PrivacyBudgetPlan {
    pub fn new(
        total: RdpGuarantee,
        episodes: usize,
        variant: Variant,
        reward_budget: Option<RewardPrivacy>,
    ) -> Result<Self> {
        if variant == Variant::NonPrivate {
            return Err(Error::Config("a budget plan needs a private variant".into()));
        }
        if episodes == 0 {
            return Err(Error::Config("episodes must be >= 1".into()));
        }
        if let Some(rb) = &reward_budget {
            rb.validate()?;
        }
        let per_episode = RdpGuarantee::new(total.lambda, total.epsilon / episodes as f64)?;
        Ok(Self { total, episodes, per_episode, variant, reward_budget })
    }
}

/// The Dirichlet posterior used for every transition row: `Dir(r·x + α)`
/// with a uniform prior `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSampler {
    pub r: f64,
    pub alpha: f64,
}

impl TransitionSampler {
    /// Calibrates the sampler so one draw meets `plan.per_episode`.
    ///
    /// Fails with a configuration error when the accountant cannot certify
    /// the per-episode target.
    pub fn calibrate(plan: &PrivacyBudgetPlan, prior_alpha: f64, sens: &SensitivityBounds) -> Result<Self> {
        let infeasible = |e: Error| Error::Config(format!("per-episode budget is infeasible: {e}"));
        let sampler = match plan.variant {
            Variant::NonPrivate => Self { r: 1.0, alpha: prior_alpha },
            Variant::Diffuse => Self {
                r: r_for_target(&plan.per_episode, sens, prior_alpha).map_err(infeasible)?,
                alpha: prior_alpha,
            },
            Variant::Concentrated => {
                let a = alpha_min_for_target(&plan.per_episode, sens, 1.0).map_err(infeasible)?;
                Self { r: 1.0, alpha: a.max(prior_alpha) }
            }
        };
        let floor = PriorFloor::new(sampler.alpha, sampler.r).map_err(infeasible)?;
        match rdp_epsilon(plan.per_episode.lambda, sens, floor)? {
            Bound::Finite(e) if e <= plan.per_episode.epsilon * (1.0 + 1e-8) => Ok(sampler),
            other => Err(Error::Config(format!(
                "per-episode budget is infeasible: calibrated sampler gives ε = {other}"
            ))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        counts: &TransitionCounts,
        mdp: &TabularMdp,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let ns = mdp.n_states();
        let alpha = vec![self.alpha; ns];
        let mut table = Vec::with_capacity(mdp.n_actions() * ns * ns);
        for a in 0..mdp.n_actions() {
            for s in 0..ns {
                let post = DirichletParams::posterior(counts.row(s, a), &alpha, self.r)?;
                table.extend(sample_dirichlet(&post, rng).into_vec());
            }
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based.
    pub episode: usize,
    /// `None` for a non-private run.
    pub spent: Option<RdpGuarantee>,
    pub cumulative: Option<RdpGuarantee>,
    pub episodic_reward: f64,
    pub cumulative_reward: f64,
}

/// Per-episode rewards and transition-sampling privacy spend.
///
/// The reward mechanism is reported separately as the per-release guarantee
/// in `reward_budget`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLedger {
    pub records: Vec<EpisodeRecord>,
    pub sampler: Option<TransitionSampler>,
    pub reward_budget: Option<RewardPrivacy>,
}

impl EpisodeLedger {
    pub fn total_reward(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative_reward)
    }
}

/// Everything a run needs besides the environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub prior_alpha: f64,
    pub sens: SensitivityBounds,
    pub reward_prior: NormalGammaPrior,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            prior_alpha: 10.0,
            sens: SensitivityBounds::new(4.0, 1.0).expect("valid constants"),
            reward_prior: NormalGammaPrior::default(),
        }
    }
}

/// Runs PSRL for `episodes` episodes. `plan = None` is the non-private
/// baseline; otherwise `episodes` must equal `plan.episodes`.
pub fn psrl_run(
    mdp: &TabularMdp,
    plan: Option<&PrivacyBudgetPlan>,
    agent: &AgentConfig,
    episodes: usize,
    seed: RngSeed,
) -> Result<EpisodeLedger> {
    if !(agent.prior_alpha > 0.0 && agent.prior_alpha.is_finite()) {
        return Err(Error::Config("prior α must be > 0".into()));
    }
    agent.reward_prior.validate()?;
    let sampler = match plan {
        None => TransitionSampler { r: 1.0, alpha: agent.prior_alpha },
        Some(p) => {
            if p.episodes != episodes {
                return domain(format!("plan covers {} episodes but {episodes} were requested", p.episodes));
            }
            TransitionSampler::calibrate(p, agent.prior_alpha, &agent.sens)?
        }
    };
    let reward_budget = plan.and_then(|p| p.reward_budget);

    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut counts = TransitionCounts::zeros(ns, na);
    let mut reward_stats = vec![RewardStats::default(); ns * na];
    let mut env_rng = seed.derive(&[0]).rng();
    let mut model_rng = seed.derive(&[1]).rng();
    let reward_seed = seed.derive(&[2]);

    let mut records = Vec::with_capacity(episodes);
    let mut cumulative: Option<RdpGuarantee> = None;
    let mut cumulative_reward = 0.0;
    for t in 0..episodes {
        let transition = sampler.sample(&counts, mdp, &mut model_rng)?;
        let means = private_reward_posterior(
            &reward_stats,
            &agent.reward_prior,
            reward_budget.as_ref(),
            reward_seed.derive(&[t as u64]),
        );
        let model = mdp.with_model(transition, &means)?;
        let (policy, _) = value_iteration_finite_horizon(&model);

        let mut s = mdp.sample_initial(&mut env_rng);
        let mut episodic_reward = 0.0;
        for h in 0..mdp.horizon() {
            let a = policy.action(h, s);
            let (s2, r) = mdp.step(s, a, &mut env_rng);
            counts.record(s, a, s2);
            reward_stats[s * na + a].push(r);
            episodic_reward += r;
            s = s2;
        }
        cumulative_reward += episodic_reward;

        let spent = plan.map(|p| p.per_episode);
        if let Some(g) = &spent {
            cumulative = Some(match &cumulative {
                None => *g,
                Some(c) => compose(c, g),
            });
        }
        records.push(EpisodeRecord { episode: t + 1, spent, cumulative, episodic_reward, cumulative_reward });
    }
    Ok(EpisodeLedger { records, sampler: plan.map(|_| sampler), reward_budget })
}
