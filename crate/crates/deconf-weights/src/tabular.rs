use crate::WeightError;
use cmdp_core::{rng_from_seed, OfflineDataset, RatioKind, Scenario, StateVec, Transition};
use rand::Rng as _;

/// A fully enumerable confounded process: explicit tables for the
/// transition/reward mechanism P1, the confounder distribution P2, the
/// execution noise P3 and the behavior policy. States, actions, executed
/// actions, confounders and rewards are all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularCmdp {
    pub n_s: usize,
    pub n_a: usize,
    pub n_w: usize,
    pub n_m: usize,
    /// Distinct reward values, indexed by the last axis of `p1`.
    pub rewards: Vec<f64>,
    /// Initial state distribution [s].
    pub init: Vec<f64>,
    /// P1(s', r | s, w, m), laid out [s][w][m][s'][r].
    pub p1: Vec<f64>,
    /// P2(w | s), laid out [s][w].
    pub p2: Vec<f64>,
    /// P3(m | s, a), laid out [s][a][m].
    pub p3: Vec<f64>,
    /// pi_b(a | s, w), laid out [s][w][a].
    pub pi_b: Vec<f64>,
}

fn check_rows(name: &str, table: &[f64], row_len: usize) -> Result<(), WeightError> {
    for (i, row) in table.chunks(row_len).enumerate() {
        if row.iter().any(|&p| p < 0.0) {
            return Err(WeightError::UnnormalizedTable(format!(
                "{name} row {i} has a negative entry"
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(WeightError::UnnormalizedTable(format!(
                "{name} row {i} sums to {s}"
            )));
        }
    }
    Ok(())
}

impl TabularCmdp {
    pub fn n_r(&self) -> usize {
        self.rewards.len()
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        let nr = self.n_r();
        check_rows("init", &self.init, self.n_s)?;
        check_rows("p1", &self.p1, self.n_s * nr)?;
        check_rows("p2", &self.p2, self.n_w)?;
        check_rows("p3", &self.p3, self.n_m)?;
        check_rows("pi_b", &self.pi_b, self.n_a)?;
        Ok(())
    }

    pub fn p1_at(&self, s: usize, w: usize, m: usize, s2: usize, r: usize) -> f64 {
        let nr = self.n_r();
        self.p1[(((s * self.n_w + w) * self.n_m + m) * self.n_s + s2) * nr + r]
    }

    pub fn p2_at(&self, s: usize, w: usize) -> f64 {
        self.p2[s * self.n_w + w]
    }

    pub fn p3_at(&self, s: usize, a: usize, m: usize) -> f64 {
        self.p3[(s * self.n_a + a) * self.n_m + m]
    }

    pub fn pi_b_at(&self, s: usize, w: usize, a: usize) -> f64 {
        self.pi_b[(s * self.n_w + w) * self.n_a + a]
    }

    /// Posterior P(w | s, a) proportional to P2(w|s) pi_b(a|s,w).
    pub fn posterior_w(&self, s: usize, a: usize) -> Vec<f64> {
        let mut p: Vec<f64> = (0..self.n_w)
            .map(|w| self.p2_at(s, w) * self.pi_b_at(s, w, a))
            .collect();
        let total: f64 = p.iter().sum();
        for v in p.iter_mut() {
            *v /= total;
        }
        p
    }

    /// Observational outcome conditional P(s', r | m, a, s), laid out
    /// [s'][r]; the action enters only through the w-posterior.
    pub fn obs_outcome(&self, s: usize, a: usize, m: usize) -> Vec<f64> {
        let post = self.posterior_w(s, a);
        let nr = self.n_r();
        let mut out = vec![0.0; self.n_s * nr];
        for (w, pw) in post.iter().enumerate() {
            for s2 in 0..self.n_s {
                for r in 0..nr {
                    out[s2 * nr + r] += pw * self.p1_at(s, w, m, s2, r);
                }
            }
        }
        out
    }

    /// Observational policy P(a | s) = sum_w P2(w|s) pi_b(a|s,w).
    pub fn policy_obs(&self, s: usize) -> Vec<f64> {
        (0..self.n_a)
            .map(|a| {
                (0..self.n_w)
                    .map(|w| self.p2_at(s, w) * self.pi_b_at(s, w, a))
                    .sum()
            })
            .collect()
    }

    /// Exact deconfounding ratio for a fully decoded transition.
    pub fn ratio(
        &self,
        kind: RatioKind,
        s: usize,
        a: usize,
        m: usize,
        s2: usize,
        r: usize,
        w: usize,
    ) -> f64 {
        let nr = self.n_r();
        match kind {
            RatioKind::Backdoor => {
                self.p2_at(s, w) / self.posterior_w(s, a)[w]
            }
            _ => {
                let pol = self.policy_obs(s);
                let value = |out: &[f64]| match kind {
                    RatioKind::Full => out[s2 * nr + r],
                    RatioKind::RewardOnly => (0..self.n_s).map(|q| out[q * nr + r]).sum(),
                    RatioKind::NextStateOnly => (0..nr).map(|q| out[s2 * nr + q]).sum(),
                    RatioKind::Backdoor => unreachable!(),
                };
                let num: f64 = (0..self.n_a)
                    .map(|ap| pol[ap] * value(&self.obs_outcome(s, ap, m)))
                    .sum();
                num / value(&self.obs_outcome(s, a, m))
            }
        }
    }

    /// Nearest reward index; reward values must be well separated.
    pub fn reward_index(&self, r: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &v) in self.rewards.iter().enumerate() {
            let d = (v - r).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// The 2-state/2-action/binary-w instance used throughout the tests:
    /// the behavior policy prefers a=1 under w=1 and a=0 under w=0, and w
    /// shifts both the next-state and the reward distributions.
    pub fn two_state_example() -> Self {
        let mut c = TabularCmdp {
            n_s: 2,
            n_a: 2,
            n_w: 2,
            n_m: 2,
            rewards: vec![0.0, 1.0],
            init: vec![0.5, 0.5],
            p1: vec![0.0; 2 * 2 * 2 * 2 * 2],
            p2: vec![0.3, 0.7, 0.7, 0.3],
            p3: Vec::new(),
            pi_b: Vec::new(),
        };
        // executed action follows the intended one with probability 0.8
        for _s in 0..2 {
            for a in 0..2 {
                for m in 0..2 {
                    c.p3.push(if m == a { 0.8 } else { 0.2 });
                }
            }
        }
        for _s in 0..2 {
            for w in 0..2 {
                let p1a = if w == 1 { 0.9 } else { 0.1 };
                c.pi_b.push(1.0 - p1a);
                c.pi_b.push(p1a);
            }
        }
        for s in 0..2 {
            for w in 0..2 {
                for m in 0..2 {
                    let ps2 = 0.15 + 0.45 * m as f64 + 0.2 * w as f64 + 0.05 * s as f64;
                    let pr1 = 0.25 + 0.25 * m as f64 + 0.35 * w as f64 + 0.05 * s as f64;
                    for s2 in 0..2 {
                        let p_s2 = if s2 == 1 { ps2 } else { 1.0 - ps2 };
                        for r in 0..2 {
                            let p_r = if r == 1 { pr1 } else { 1.0 - pr1 };
                            let nr = 2;
                            c.p1[(((s * 2 + w) * 2 + m) * 2 + s2) * nr + r] = p_s2 * p_r;
                        }
                    }
                }
            }
        }
        c.validate().expect("construction is normalized");
        c
    }

    /// An instance where confounding reverses the action ranking: the
    /// executed action slightly lowers the reward (so do(a=0) is
    /// optimal), while the confounder both favors a=1 and raises the
    /// reward, making a=1 look better in the offline conditionals.
    pub fn two_state_reversal() -> Self {
        let mut c = Self::two_state_example();
        c.p2 = vec![0.5, 0.5, 0.5, 0.5];
        for s in 0..2 {
            for w in 0..2 {
                for m in 0..2 {
                    let ps2 = 0.3 + 0.4 * m as f64;
                    let pr1 = 0.55 - 0.15 * m as f64 + 0.35 * w as f64;
                    for s2 in 0..2 {
                        let p_s2 = if s2 == 1 { ps2 } else { 1.0 - ps2 };
                        for r in 0..2 {
                            let p_r = if r == 1 { pr1 } else { 1.0 - pr1 };
                            c.p1[(((s * 2 + w) * 2 + m) * 2 + s2) * 2 + r] = p_s2 * p_r;
                        }
                    }
                }
            }
        }
        c.validate().expect("construction is normalized");
        c
    }

    /// Same mechanism with a w-blind behavior policy; every ratio is 1.
    pub fn two_state_unconfounded() -> Self {
        let mut c = Self::two_state_example();
        for s in 0..2 {
            for w in 0..2 {
                for a in 0..2 {
                    c.pi_b[(s * 2 + w) * 2 + a] = if a == 1 { 0.6 } else { 0.4 };
                }
            }
        }
        c
    }
}

fn decode(t: &Transition, c: &TabularCmdp) -> (usize, usize, usize, usize, usize, usize) {
    let s = t.s.x as usize;
    let s2 = t.s_next.x as usize;
    let m = t.m.unwrap_or(0);
    let w = t.u.unwrap_or(0) as usize;
    (s, t.a, m, s2, c.reward_index(t.r), w)
}

/// Exact per-transition ratio function by direct enumeration.
pub fn exact_ratio_oracle(
    cmdp: &TabularCmdp,
    kind: RatioKind,
) -> Result<impl Fn(&Transition) -> f64 + '_, WeightError> {
    cmdp.validate()?;
    Ok(move |t: &Transition| {
        let (s, a, m, s2, r, w) = decode(t, cmdp);
        cmdp.ratio(kind, s, a, m, s2, r, w)
    })
}

/// Samples n independent steps of the confounded generative process;
/// both the executed action m and the confounder w (as u) are recorded so
/// every ratio kind can be tested on the same data.
pub fn generate_tabular_dataset(
    cmdp: &TabularCmdp,
    n: usize,
    seed: u64,
) -> Result<OfflineDataset, WeightError> {
    cmdp.validate()?;
    let mut rng = rng_from_seed(seed);
    let draw = |p: &[f64], rng: &mut cmdp_core::Rng| -> usize {
        let mut t: f64 = rng.gen();
        for (i, &q) in p.iter().enumerate() {
            t -= q;
            if t <= 0.0 {
                return i;
            }
        }
        p.len() - 1
    };
    let nr = cmdp.n_r();
    let mut transitions = Vec::with_capacity(n);
    for _ in 0..n {
        let s = draw(&cmdp.init, &mut rng);
        let w = draw(
            &(0..cmdp.n_w).map(|w| cmdp.p2_at(s, w)).collect::<Vec<_>>(),
            &mut rng,
        );
        let a = draw(
            &(0..cmdp.n_a).map(|a| cmdp.pi_b_at(s, w, a)).collect::<Vec<_>>(),
            &mut rng,
        );
        let m = draw(
            &(0..cmdp.n_m).map(|m| cmdp.p3_at(s, a, m)).collect::<Vec<_>>(),
            &mut rng,
        );
        let joint: Vec<f64> = (0..cmdp.n_s * nr)
            .map(|i| cmdp.p1_at(s, w, m, i / nr, i % nr))
            .collect();
        let out = draw(&joint, &mut rng);
        transitions.push(Transition {
            s: StateVec::new(s as f64, 0.0, 0.0),
            a,
            m: Some(m),
            u: Some(w as i64),
            s_next: StateVec::new((out / nr) as f64, 0.0, 0.0),
            r: cmdp.rewards[out % nr],
            done: false,
        });
    }
    Ok(OfflineDataset::new(
        transitions,
        Scenario::Tabular,
        "tabular".into(),
        seed,
    )?)
}

/// Interventional outcome distribution P(s', r | s, do(a)), laid out
/// [s'][r]: the confounder is marginalized from its prior, not from the
/// action-tilted posterior.
pub fn interventional_outcome(cmdp: &TabularCmdp, s: usize, a: usize) -> Vec<f64> {
    let nr = cmdp.n_r();
    let mut out = vec![0.0; cmdp.n_s * nr];
    for w in 0..cmdp.n_w {
        let pw = cmdp.p2_at(s, w);
        for m in 0..cmdp.n_m {
            let pm = cmdp.p3_at(s, a, m);
            for s2 in 0..cmdp.n_s {
                for r in 0..nr {
                    out[s2 * nr + r] += pw * pm * cmdp.p1_at(s, w, m, s2, r);
                }
            }
        }
    }
    out
}

/// Q-value iteration on the interventional MDP to 1e-12; returns the
/// optimal Q laid out [s][a].
pub fn value_iteration(cmdp: &TabularCmdp, gamma: f64) -> Vec<f64> {
    let nr = cmdp.n_r();
    let mut q = vec![0.0; cmdp.n_s * cmdp.n_a];
    loop {
        let mut next = vec![0.0; cmdp.n_s * cmdp.n_a];
        let mut delta = 0.0f64;
        for s in 0..cmdp.n_s {
            for a in 0..cmdp.n_a {
                let out = interventional_outcome(cmdp, s, a);
                let mut v = 0.0;
                for s2 in 0..cmdp.n_s {
                    let best = (0..cmdp.n_a)
                        .map(|b| q[s2 * cmdp.n_a + b])
                        .fold(f64::NEG_INFINITY, f64::max);
                    for r in 0..nr {
                        v += out[s2 * nr + r] * (cmdp.rewards[r] + gamma * best);
                    }
                }
                delta = delta.max((v - q[s * cmdp.n_a + a]).abs());
                next[s * cmdp.n_a + a] = v;
            }
        }
        q = next;
        if delta < 1e-12 {
            return q;
        }
    }
}

/// Exact discounted start-state value of a deterministic policy on the
/// interventional MDP.
pub fn policy_value(cmdp: &TabularCmdp, policy: &[usize], gamma: f64) -> f64 {
    assert_eq!(policy.len(), cmdp.n_s);
    let nr = cmdp.n_r();
    let mut v = vec![0.0; cmdp.n_s];
    loop {
        let mut next = vec![0.0; cmdp.n_s];
        let mut delta = 0.0f64;
        for s in 0..cmdp.n_s {
            let out = interventional_outcome(cmdp, s, policy[s]);
            let mut val = 0.0;
            for s2 in 0..cmdp.n_s {
                for r in 0..nr {
                    val += out[s2 * nr + r] * (cmdp.rewards[r] + gamma * v[s2]);
                }
            }
            delta = delta.max((val - v[s]).abs());
            next[s] = val;
        }
        v = next;
        if delta < 1e-12 {
            break;
        }
    }
    cmdp.init.iter().zip(&v).map(|(p, val)| p * val).sum()
}
