use crate::qnet::{argmax, logsumexp, softmax, state_features, PolicyHead, QApproximator};
use cmdp_core::Transition;

/// V(s) = pi(s)' [Q(s) - alpha log pi(s)].
pub fn soft_value(qvals: &[f64], probs: &[f64], alpha: f64) -> f64 {
    probs
        .iter()
        .zip(qvals)
        .map(|(&p, &q)| p * (q - alpha * p.ln()))
        .sum()
}

fn bootstrap(t: &Transition, gamma: f64, next_value: f64) -> f64 {
    // done marks true terminals only; time-limit cutoffs keep the
    // bootstrap term
    if t.done {
        t.r
    } else {
        t.r + gamma * next_value
    }
}

/// Frozen-network bootstrap value max_a' Q_target(s'); constant between
/// target syncs, so the trainer caches it per dataset row.
pub fn target_next_value(q: &QApproximator, t: &Transition) -> f64 {
    q.forward_target(&t.s_next)
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn y_dqn(q: &QApproximator, t: &Transition, gamma: f64) -> f64 {
    bootstrap(t, gamma, target_next_value(q, t))
}

fn y_ddqn(q: &QApproximator, t: &Transition, gamma: f64) -> f64 {
    let best = argmax(&q.forward(&t.s_next));
    bootstrap(t, gamma, q.forward_target(&t.s_next)[best])
}

fn y_sac(q: &QApproximator, policy: &PolicyHead, t: &Transition, gamma: f64, alpha: f64) -> f64 {
    let tq = q.forward_target(&t.s_next);
    let probs = policy.probs(&t.s_next);
    bootstrap(t, gamma, soft_value(&tq, &probs, alpha))
}

/// Per-sample squared Bellman error against the frozen target maximum;
/// the state-action-only part h is zero.
pub fn loss_dqn(q: &QApproximator, batch: &[&Transition], gamma: f64) -> Vec<(f64, f64)> {
    batch
        .iter()
        .map(|t| {
            let diff = y_dqn(q, t, gamma) - q.forward(&t.s)[t.a];
            (diff * diff, 0.0)
        })
        .collect()
}

/// As DQN but the bootstrap action is chosen by the online network.
pub fn loss_ddqn(q: &QApproximator, batch: &[&Transition], gamma: f64) -> Vec<(f64, f64)> {
    batch
        .iter()
        .map(|t| {
            let diff = y_ddqn(q, t, gamma) - q.forward(&t.s)[t.a];
            (diff * diff, 0.0)
        })
        .collect()
}

/// Bellman term in f; the conservative penalty depends only on (s, a) and
/// therefore sits in h, untouched by deconfounding weights.
pub fn loss_cql(
    q: &QApproximator,
    batch: &[&Transition],
    gamma: f64,
    cql_weight: f64,
) -> Vec<(f64, f64)> {
    batch
        .iter()
        .map(|t| {
            let qs = q.forward(&t.s);
            let diff = y_dqn(q, t, gamma) - qs[t.a];
            let penalty = cql_weight * (logsumexp(&qs) - qs[t.a]);
            (diff * diff, penalty)
        })
        .collect()
}

/// Critic pairs then actor pairs. The critic target uses the frozen
/// network and the current policy; the actor part is pure h = -V(s) with
/// Q held constant.
pub fn loss_sac_discrete(
    q: &QApproximator,
    policy: &PolicyHead,
    batch: &[&Transition],
    gamma: f64,
    alpha_ent: f64,
) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let critic = batch
        .iter()
        .map(|t| {
            let diff = y_sac(q, policy, t, gamma, alpha_ent) - q.forward(&t.s)[t.a];
            (diff * diff, 0.0)
        })
        .collect();
    let actor = batch
        .iter()
        .map(|t| {
            let v = soft_value(&q.forward(&t.s), &policy.probs(&t.s), alpha_ent);
            (0.0, -v)
        })
        .collect();
    (critic, actor)
}

/// Negative log-likelihood of the dataset action.
pub fn loss_bc(policy: &PolicyHead, batch: &[&Transition]) -> Vec<(f64, f64)> {
    batch
        .iter()
        .map(|t| {
            let p = policy.probs(&t.s);
            (-p[t.a].ln(), 0.0)
        })
        .collect()
}

/// Which Q-family loss a gradient step uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QLoss {
    Dqn,
    Ddqn,
    Cql { cql_weight: f64 },
}

/// Mean loss and its gradient for the Q-family algorithms. `weights`
/// multiply the f part of each sample only.
pub fn grad_q(
    q: &QApproximator,
    batch: &[&Transition],
    gamma: f64,
    loss: QLoss,
    weights: Option<&[f64]>,
) -> (f64, Vec<f64>) {
    grad_q_with_targets(q, batch, gamma, loss, weights, None)
}

/// As [`grad_q`], optionally taking precomputed frozen-target values
/// (one [`target_next_value`] per batch element). DDQN ignores them: its
/// bootstrap depends on the online network too.
pub fn grad_q_with_targets(
    q: &QApproximator,
    batch: &[&Transition],
    gamma: f64,
    loss: QLoss,
    weights: Option<&[f64]>,
    next_values: Option<&[f64]>,
) -> (f64, Vec<f64>) {
    let n = batch.len() as f64;
    let mut grad = vec![0.0; q.net.params.len()];
    let mut total = 0.0;
    for (i, t) in batch.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let cache = q.net.forward_cached(&state_features(&t.s));
        let qs = cache.acts.last().unwrap().clone();
        let y = match (loss, next_values) {
            (QLoss::Ddqn, _) => y_ddqn(q, t, gamma),
            (_, Some(v)) => bootstrap(t, gamma, v[i]),
            (_, None) => y_dqn(q, t, gamma),
        };
        let diff = y - qs[t.a];
        let mut dout = vec![0.0; qs.len()];
        dout[t.a] = -2.0 * diff * w / n;
        total += w * diff * diff / n;
        if let QLoss::Cql { cql_weight } = loss {
            let p = softmax(&qs);
            for (j, dj) in dout.iter_mut().enumerate() {
                let onehot = if j == t.a { 1.0 } else { 0.0 };
                *dj += cql_weight * (p[j] - onehot) / n;
            }
            total += cql_weight * (logsumexp(&qs) - qs[t.a]) / n;
        }
        q.net.backward(&cache, &dout, &mut grad);
    }
    (total, grad)
}

/// Mean critic loss and gradient with respect to the online Q parameters.
pub fn grad_sac_critic(
    q: &QApproximator,
    policy: &PolicyHead,
    batch: &[&Transition],
    gamma: f64,
    alpha_ent: f64,
    weights: Option<&[f64]>,
) -> (f64, Vec<f64>) {
    let n = batch.len() as f64;
    let mut grad = vec![0.0; q.net.params.len()];
    let mut total = 0.0;
    for (i, t) in batch.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let cache = q.net.forward_cached(&state_features(&t.s));
        let qs = cache.acts.last().unwrap().clone();
        let diff = y_sac(q, policy, t, gamma, alpha_ent) - qs[t.a];
        let mut dout = vec![0.0; qs.len()];
        dout[t.a] = -2.0 * diff * w / n;
        total += w * diff * diff / n;
        q.net.backward(&cache, &dout, &mut grad);
    }
    (total, grad)
}

/// Mean actor loss -V(s) and gradient with respect to the policy logits;
/// Q-values are constants here, and the actor part carries no weight.
pub fn grad_sac_actor(
    q: &QApproximator,
    policy: &PolicyHead,
    batch: &[&Transition],
    alpha_ent: f64,
) -> (f64, Vec<f64>) {
    let n = batch.len() as f64;
    let mut grad = vec![0.0; policy.net.params.len()];
    let mut total = 0.0;
    for t in batch {
        let cache = policy.net.forward_cached(&state_features(&t.s));
        let probs = softmax(cache.acts.last().unwrap());
        let qs = q.forward(&t.s);
        let adv: Vec<f64> = probs
            .iter()
            .zip(&qs)
            .map(|(&p, &qv)| qv - alpha_ent * p.ln())
            .collect();
        let v: f64 = probs.iter().zip(&adv).map(|(p, a)| p * a).sum();
        // d(-V)/dz_k = -pi_k (A_k - V)
        let dout: Vec<f64> = probs
            .iter()
            .zip(&adv)
            .map(|(&p, &a)| -p * (a - v) / n)
            .collect();
        total += -v / n;
        policy.net.backward(&cache, &dout, &mut grad);
    }
    (total, grad)
}

/// Mean cross-entropy and gradient for behavior cloning.
pub fn grad_bc(policy: &PolicyHead, batch: &[&Transition]) -> (f64, Vec<f64>) {
    let n = batch.len() as f64;
    let mut grad = vec![0.0; policy.net.params.len()];
    let mut total = 0.0;
    for t in batch {
        let cache = policy.net.forward_cached(&state_features(&t.s));
        let probs = softmax(cache.acts.last().unwrap());
        total += -probs[t.a].ln() / n;
        let dout: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(j, &p)| (p - if j == t.a { 1.0 } else { 0.0 }) / n)
            .collect();
        policy.net.backward(&cache, &dout, &mut grad);
    }
    (total, grad)
}
