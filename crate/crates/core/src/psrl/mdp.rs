//! Episodic tabular MDPs and the RiverSwim chain.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Reward distribution of one state-action pair: `N(mean, std²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardDist {
    pub mean: f64,
    pub std: f64,
}

impl RewardDist {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std == 0.0 {
            self.mean
        } else {
            self.mean + self.std * rng.sample::<f64, _>(StandardNormal)
        }
    }
}

/// An episodic fixed-horizon MDP with finite state and action sets.
///
/// Transitions are stored as `[a][s][s']`, rewards as `[s][a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    transition: Vec<f64>,
    rewards: Vec<RewardDist>,
    initial: Vec<f64>,
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        horizon: usize,
        transition: Vec<f64>,
        rewards: Vec<RewardDist>,
        initial: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return domain("MDP needs at least one state and one action");
        }
        if horizon == 0 {
            return domain("horizon must be >= 1");
        }
        if transition.len() != n_actions * n_states * n_states {
            return domain("transition table has the wrong size");
        }
        if rewards.len() != n_states * n_actions {
            return domain("reward table has the wrong size");
        }
        if initial.len() != n_states {
            return domain("initial distribution has the wrong size");
        }
        for row in transition.chunks(n_states).chain(std::iter::once(&initial[..])) {
            if row.iter().any(|p| !(*p >= 0.0)) {
                return domain("probabilities must be nonnegative");
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return domain(format!("probability row sums to {s}"));
            }
        }
        Ok(Self { n_states, n_actions, horizon, transition, rewards, initial })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `P(· | s, a)`.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (a * self.n_states + s) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> RewardDist {
        self.rewards[s * self.n_actions + a]
    }

    pub fn mean_reward(&self, s: usize, a: usize) -> f64 {
        self.reward(s, a).mean
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Same dynamics with a different transition table and reward means,
    /// used to build the sampled model each episode.
    pub fn with_model(&self, transition: Vec<f64>, reward_means: &[f64]) -> Result<Self> {
        let rewards = reward_means.iter().map(|&mean| RewardDist { mean, std: 0.0 }).collect();
        Self::new(self.n_states, self.n_actions, self.horizon, transition, rewards, self.initial.clone())
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.initial, rng)
    }

    pub fn step<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> (usize, f64) {
        let r = self.reward(s, a).sample(rng);
        (sample_index(self.row(s, a), rng), r)
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the cumulative sum; return the last supported index.
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

/// RiverSwim constants. Action 0 swims left, action 1 swims right against
/// the current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiverSwimParams {
    pub n_states: usize,
    pub horizon: usize,
    /// Interior states, action right.
    pub advance: f64,
    pub stay: f64,
    pub regress: f64,
    /// Leftmost state, action right: advance with this probability, else stay.
    pub left_edge_advance: f64,
    /// Rightmost state, action right: stay with this probability, else regress.
    pub right_edge_stay: f64,
    /// Reward for swimming left in the leftmost state.
    pub reward_left: f64,
    /// Reward for swimming right in the rightmost state.
    pub reward_right: f64,
    /// Standard deviation of Gaussian reward noise.
    pub reward_noise: f64,
    pub initial_state: usize,
}

impl Default for RiverSwimParams {
    fn default() -> Self {
        Self {
            n_states: 6,
            horizon: 30,
            advance: 0.35,
            stay: 0.6,
            regress: 0.05,
            left_edge_advance: 0.6,
            right_edge_stay: 0.6,
            reward_left: 5.0 / 1000.0,
            reward_right: 1.0,
            reward_noise: 0.0,
            initial_state: 0,
        }
    }
}

impl RiverSwimParams {
    /// Overrides fields from `key = value` pairs; unknown keys are an error.
    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in kv {
            let f =
                || v.parse::<f64>().map_err(|_| Error::Config(format!("{k}: expected a number, got {v:?}")));
            let u = || {
                v.parse::<usize>().map_err(|_| Error::Config(format!("{k}: expected an integer, got {v:?}")))
            };
            match k.as_str() {
                "n_states" => self.n_states = u()?,
                "horizon" => self.horizon = u()?,
                "advance" => self.advance = f()?,
                "stay" => self.stay = f()?,
                "regress" => self.regress = f()?,
                "left_edge_advance" => self.left_edge_advance = f()?,
                "right_edge_stay" => self.right_edge_stay = f()?,
                "reward_left" => self.reward_left = f()?,
                "reward_right" => self.reward_right = f()?,
                "reward_noise" => self.reward_noise = f()?,
                "initial_state" => self.initial_state = u()?,
                _ => return Err(Error::Config(format!("unknown RiverSwim key {k:?}"))),
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<TabularMdp> {
        let n = self.n_states;
        if n < 2 {
            return domain("RiverSwim needs at least two states");
        }
        if self.initial_state >= n {
            return domain("initial state out of range");
        }
        let mut t = vec![0.0; 2 * n * n];
        let idx = |a: usize, s: usize, s2: usize| (a * n + s) * n + s2;
        for s in 0..n {
            t[idx(LEFT, s, s.saturating_sub(1))] = 1.0;
            if s == 0 {
                t[idx(RIGHT, s, 1)] += self.left_edge_advance;
                t[idx(RIGHT, s, 0)] += 1.0 - self.left_edge_advance;
            } else if s == n - 1 {
                t[idx(RIGHT, s, s)] += self.right_edge_stay;
                t[idx(RIGHT, s, s - 1)] += 1.0 - self.right_edge_stay;
            } else {
                t[idx(RIGHT, s, s + 1)] += self.advance;
                t[idx(RIGHT, s, s)] += self.stay;
                t[idx(RIGHT, s, s - 1)] += self.regress;
            }
        }
        let mut rewards = vec![RewardDist { mean: 0.0, std: self.reward_noise }; 2 * n];
        rewards[LEFT].mean = self.reward_left;
        rewards[(n - 1) * 2 + RIGHT].mean = self.reward_right;
        let mut initial = vec![0.0; n];
        initial[self.initial_state] = 1.0;
        TabularMdp::new(n, 2, self.horizon, t, rewards, initial)
    }
}

/// RiverSwim with the default constants.
pub fn riverswim(n_states: usize, horizon: usize) -> Result<TabularMdp> {
    RiverSwimParams { n_states, horizon, ..RiverSwimParams::default() }.build()
}
