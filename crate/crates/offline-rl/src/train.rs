use crate::losses::{
    grad_bc, grad_q_with_targets, grad_sac_actor, grad_sac_critic, target_next_value, QLoss,
};
use crate::qnet::{PolicyHead, QApproximator};
use crate::RlError;
use cmdp_core::{
    rng_from_seed, Algo, BatchSampler, DeconfMode, OfflineDataset, RlParams, Sampler, Transition,
};
use deconf_weights::{resample_distribution, WeightVector};

/// Full specification of one training run.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub rl: RlParams,
    pub total_steps: usize,
    pub mode: DeconfMode,
}

/// Trained networks; `q` for the Q-family, `policy` for SAC and BC.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub q: Option<QApproximator>,
    pub policy: Option<PolicyHead>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t as i32);
        let bc2 = 1.0 - B2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / bc1) / ((self.v[i] / bc2).sqrt() + EPS);
        }
    }
}

enum Optimizer {
    Sgd,
    Adam(Adam),
}

impl Optimizer {
    fn new(adam: bool, n: usize) -> Self {
        if adam {
            Optimizer::Adam(Adam::new(n))
        } else {
            Optimizer::Sgd
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        match self {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            Optimizer::Adam(a) => a.step(params, grad, lr),
        }
    }
}

fn sampling_distribution(
    n: usize,
    mode: DeconfMode,
    weights: Option<&WeightVector>,
) -> Result<Vec<f64>, RlError> {
    match mode {
        DeconfMode::Resample => {
            let w = weights.expect("checked by caller");
            Ok(resample_distribution(w)?)
        }
        _ => Ok(vec![1.0 / n as f64; n]),
    }
}

/// Runs offline training for any of the five algorithms; the callback is
/// invoked after every optimizer step with the 1-based step index.
pub fn train_with_callback(
    ds: &OfflineDataset,
    weights: Option<&WeightVector>,
    algo: Algo,
    cfg: &TrainConfig,
    seed: u64,
    mut cb: impl FnMut(usize, Option<&QApproximator>, Option<&PolicyHead>),
) -> Result<TrainOutput, RlError> {
    ds.validate()?;
    match (cfg.mode, weights) {
        (DeconfMode::None, Some(_)) => {
            return Err(RlError::WeightsUnexpected);
        }
        (DeconfMode::Reweight | DeconfMode::Resample, None) => {
            return Err(RlError::WeightsMissing);
        }
        _ => {}
    }
    if let Some(w) = weights {
        if w.len() != ds.len() {
            return Err(RlError::WeightMisalignment {
                weights: w.len(),
                dataset: ds.len(),
            });
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut q = match algo {
        Algo::Bc => None,
        _ => Some(QApproximator::with_default_arch(&mut rng)),
    };
    let mut policy = match algo {
        Algo::Sac | Algo::Bc => Some(PolicyHead::with_default_arch(&mut rng)),
        _ => None,
    };

    // the sampler always takes the categorical path so that equal
    // weights reproduce uniform sampling exactly
    let p = sampling_distribution(ds.len(), cfg.mode, weights)?;
    let mut sampler = BatchSampler::new(
        ds.len(),
        cfg.rl.batch_size,
        Sampler::Categorical(p),
        seed.wrapping_add(1),
    )?;

    let mut q_opt = q
        .as_ref()
        .map(|q| Optimizer::new(cfg.rl.adam, q.net.params.len()));
    let mut p_opt = policy
        .as_ref()
        .map(|p| Optimizer::new(cfg.rl.adam, p.net.params.len()));

    let use_batch_weights = cfg.mode == DeconfMode::Reweight;
    // DQN and CQL bootstrap from the frozen network alone, so the target
    // value of every dataset row is constant between syncs
    let cache_targets = matches!(algo, Algo::Dqn | Algo::Cql);
    let mut target_values: Vec<f64> = if cache_targets {
        let qref = q.as_ref().expect("q-family");
        ds.transitions
            .iter()
            .map(|t| target_next_value(qref, t))
            .collect()
    } else {
        Vec::new()
    };
    for step in 0..cfg.total_steps {
        let idx = sampler.next_batch();
        let batch: Vec<&Transition> = idx.iter().map(|&i| &ds.transitions[i]).collect();
        let bw: Option<Vec<f64>> = if use_batch_weights {
            let w = weights.expect("checked above");
            Some(idx.iter().map(|&i| w.clipped[i]).collect())
        } else {
            None
        };
        let bw = bw.as_deref();

        let loss = match algo {
            Algo::Dqn | Algo::Ddqn | Algo::Cql => {
                let qref = q.as_mut().expect("q-family");
                let kind = match algo {
                    Algo::Dqn => QLoss::Dqn,
                    Algo::Ddqn => QLoss::Ddqn,
                    _ => QLoss::Cql {
                        cql_weight: cfg.rl.cql_weight,
                    },
                };
                let nv: Option<Vec<f64>> = if cache_targets {
                    Some(idx.iter().map(|&i| target_values[i]).collect())
                } else {
                    None
                };
                let (loss, grad) =
                    grad_q_with_targets(qref, &batch, cfg.rl.gamma, kind, bw, nv.as_deref());
                q_opt
                    .as_mut()
                    .unwrap()
                    .step(&mut qref.net.params, &grad, cfg.rl.learning_rate);
                loss
            }
            Algo::Sac => {
                let qref = q.as_mut().expect("sac critic");
                let pref = policy.as_mut().expect("sac actor");
                let (closs, cgrad) =
                    grad_sac_critic(qref, pref, &batch, cfg.rl.gamma, cfg.rl.alpha_ent, bw);
                q_opt
                    .as_mut()
                    .unwrap()
                    .step(&mut qref.net.params, &cgrad, cfg.rl.learning_rate);
                let (aloss, agrad) = grad_sac_actor(qref, pref, &batch, cfg.rl.alpha_ent);
                p_opt
                    .as_mut()
                    .unwrap()
                    .step(&mut pref.net.params, &agrad, cfg.rl.learning_rate);
                closs + aloss
            }
            Algo::Bc => {
                let pref = policy.as_mut().expect("bc policy");
                let (loss, grad) = grad_bc(pref, &batch);
                p_opt
                    .as_mut()
                    .unwrap()
                    .step(&mut pref.net.params, &grad, cfg.rl.learning_rate);
                loss
            }
        };
        if !loss.is_finite() {
            return Err(RlError::NanLoss { step, loss });
        }
        if let Some(qref) = q.as_mut() {
            if (step + 1) % cfg.rl.target_sync_interval == 0 {
                qref.sync_target();
                if cache_targets {
                    for (v, t) in target_values.iter_mut().zip(&ds.transitions) {
                        *v = target_next_value(qref, t);
                    }
                }
            }
        }
        cb(step + 1, q.as_ref(), policy.as_ref());
    }
    Ok(TrainOutput { q, policy })
}

pub fn train(
    ds: &OfflineDataset,
    weights: Option<&WeightVector>,
    algo: Algo,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainOutput, RlError> {
    train_with_callback(ds, weights, algo, cfg, seed, |_, _, _| {})
}

/// Supervised imitation of the dataset actions.
pub fn behavior_cloning(
    ds: &OfflineDataset,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<PolicyHead, RlError> {
    let out = train(ds, None, Algo::Bc, cfg, seed)?;
    Ok(out.policy.expect("bc always trains a policy"))
}
