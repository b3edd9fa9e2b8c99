use crate::{
    behavior_action, intermediate_action, observe, physics::reset_state, reward,
    sample_confounders, step_physics, wind_force, BehaviorConfig, EnvError, PhysicsParams, Policy,
};
use cmdp_core::{torque_of, ExperimentConfig, OfflineDataset, Transition};

fn behavior_config(config: &ExperimentConfig) -> Result<BehaviorConfig, EnvError> {
    if config.scenario.is_star() && config.env.p_fail.is_some() {
        return Err(EnvError::ConfigMismatch(
            "p_fail set for a Star scenario".into(),
        ));
    }
    if !config.scenario.is_star() && config.env.p_fail.is_none() {
        return Err(EnvError::ConfigMismatch(
            "p_fail required for a non-Star scenario".into(),
        ));
    }
    Ok(BehaviorConfig {
        odds: config.env.odds,
        irrational_p: config.env.irrational_p,
        v_threshold: config.env.v_t.unwrap_or(f64::INFINITY),
        p_fail: config.env.p_fail.unwrap_or(0.0),
    })
}

/// Simulates the confounded offline process and records one transition
/// per step. Episodes reset every `episode_len` steps; the cutoff is a
/// time limit, not a terminal, so `done` stays false.
pub fn generate_offline_dataset<P: Policy>(
    config: &ExperimentConfig,
    rational: &P,
    seed: u64,
) -> Result<OfflineDataset, EnvError> {
    let scenario = config.scenario;
    let bc = behavior_config(config)?;
    let params = PhysicsParams::default();
    let mut rng = cmdp_core::rng_from_seed(seed);
    let mut transitions = Vec::with_capacity(config.dataset_size);

    let mut state = reset_state(&mut rng);
    for step in 0..config.dataset_size {
        if step > 0 && step % params.episode_len == 0 {
            state = reset_state(&mut rng);
        }
        let s_obs = observe(&state, &mut rng);
        let w = sample_confounders(scenario, &s_obs, &bc, &mut rng);
        let rational_action = rational.act(&s_obs, &mut rng);
        let a = behavior_action(scenario, &s_obs, &w, rational_action, &bc, &mut rng);
        let m = if scenario.is_star() {
            None
        } else {
            Some(intermediate_action(a, bc.p_fail, &mut rng))
        };
        let executed = m.unwrap_or(a);
        let torque = torque_of(executed);
        let r = reward(scenario, state.theta, state.v, torque, &w, &mut rng);
        let effective = if scenario.is_windy() {
            torque - wind_force(w.w2)? * state.theta.cos()
        } else {
            torque
        };
        let next = step_physics(state, effective, &params);
        let s_next_obs = observe(&next, &mut rng);
        transitions.push(Transition {
            s: s_obs,
            a,
            m,
            u: if scenario.is_star() { Some(w.w2) } else { None },
            s_next: s_next_obs,
            r,
            done: false,
        });
        state = next;
    }

    Ok(OfflineDataset::new(
        transitions,
        scenario,
        config.digest(),
        seed,
    )?)
}

/// Runs the online (interventional) environment: the same dynamics and
/// reward mechanism, but the action comes from the agent's policy on the
/// observed state alone. Returns the mean undiscounted episode return.
pub fn online_rollout<P: Policy>(
    config: &ExperimentConfig,
    policy: &P,
    seed: u64,
    n_episodes: usize,
) -> Result<f64, EnvError> {
    assert!(n_episodes >= 1);
    let scenario = config.scenario;
    let bc = behavior_config(config)?;
    let params = PhysicsParams::default();
    let mut rng = cmdp_core::rng_from_seed(seed);
    let mut total = 0.0;

    for _ in 0..n_episodes {
        let mut state = reset_state(&mut rng);
        for _ in 0..params.episode_len {
            let s_obs = observe(&state, &mut rng);
            let w = sample_confounders(scenario, &s_obs, &bc, &mut rng);
            let a = policy.act(&s_obs, &mut rng);
            let executed = if scenario.is_star() {
                a
            } else {
                intermediate_action(a, bc.p_fail, &mut rng)
            };
            let torque = torque_of(executed);
            total += reward(scenario, state.theta, state.v, torque, &w, &mut rng);
            let effective = if scenario.is_windy() {
                torque - wind_force(w.w2)? * state.theta.cos()
            } else {
                torque
            };
            state = step_physics(state, effective, &params);
        }
    }
    Ok(total / n_episodes as f64)
}

/// Rollout on the plain unconfounded pendulum (no wind, no bonus, no
/// controller failures, original reward only). Used to benchmark the
/// scripted controller on the original reward scale.
pub fn rollout_unconfounded<P: Policy>(policy: &P, seed: u64, n_episodes: usize) -> f64 {
    let params = PhysicsParams::default();
    let mut rng = cmdp_core::rng_from_seed(seed);
    let mut total = 0.0;
    for _ in 0..n_episodes {
        let mut state = reset_state(&mut rng);
        for _ in 0..params.episode_len {
            let s_obs = observe(&state, &mut rng);
            let a = policy.act(&s_obs, &mut rng);
            let torque = torque_of(a);
            total += crate::confounders::original_cost(state.theta, state.v, torque);
            state = step_physics(state, torque, &params);
        }
    }
    total / n_episodes as f64
}
