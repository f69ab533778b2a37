use super::mdp::TabularMdp;

/// A nonstationary deterministic policy: `actions[h][s]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub actions: Vec<Vec<usize>>,
}

impl Policy {
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h][s]
    }
}

/// Optimal nonstationary policy by backward induction over the horizon,
/// together with the optimal values `V_0(s)`. Ties go to the lower action
/// index.
pub fn value_iteration_finite_horizon(mdp: &TabularMdp) -> (Policy, Vec<f64>) {
    let (ns, na, horizon) = (mdp.n_states(), mdp.n_actions(), mdp.horizon());
    let mut v = vec![0.0; ns];
    let mut actions = vec![vec![0; ns]; horizon];
    for h in (0..horizon).rev() {
        let mut next = vec![0.0; ns];
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let q = mdp.mean_reward(s, a) + mdp.row(s, a).iter().zip(&v).map(|(p, w)| p * w).sum::<f64>();
                if q > best {
                    best = q;
                    actions[h][s] = a;
                }
            }
            next[s] = best;
        }
        v = next;
    }
    (Policy { actions }, v)
}

/// Expected total reward of `policy` from the MDP's initial distribution.
pub fn evaluate_policy(mdp: &TabularMdp, policy: &Policy) -> f64 {
    let ns = mdp.n_states();
    let mut v = vec![0.0; ns];
    for h in (0..mdp.horizon()).rev() {
        v = (0..ns)
            .map(|s| {
                let a = policy.action(h, s);
                mdp.mean_reward(s, a) + mdp.row(s, a).iter().zip(&v).map(|(p, w)| p * w).sum::<f64>()
            })
            .collect();
    }
    mdp.initial().iter().zip(&v).map(|(p, w)| p * w).sum()
}
