use crate::{wrap_angle, EnvError};
use cmdp_core::{action_of_torque, Rng, Scenario, StateVec};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

/// Behavior-policy hyperparameters of one environment setting.
#[derive(Debug, Clone, Copy)]
pub struct BehaviorConfig {
    /// odds1 = Pr(w1=False)/Pr(w1=True), or odds2 = Pr(no wind)/Pr(wind).
    pub odds: f64,
    /// I_{p,1} or I_{p,2}.
    pub irrational_p: f64,
    /// Speed threshold; EmotionalPendulum family only.
    pub v_threshold: f64,
    /// Controller failure probability; non-Star tasks only.
    pub p_fail: f64,
}

/// Per-step confounder draw.
///
/// EmotionalPendulum: w1 = negative emotion, w2 in {0,1} = negative
/// expression. WindyPendulum: w2 in {0,1,2} = wind direction (1 = calm),
/// w1 = afraid, true exactly when w2 != 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfounderDraw {
    pub w1: bool,
    pub w2: i64,
}

/// Draws the per-step confounders for a scenario.
pub fn sample_confounders(
    scenario: Scenario,
    _s: &StateVec,
    config: &BehaviorConfig,
    rng: &mut Rng,
) -> ConfounderDraw {
    match scenario {
        Scenario::EmotionalPendulum | Scenario::EmotionalPendulumStar => {
            let w1 = rng.gen::<f64>() < 1.0 / (1.0 + config.odds);
            let p_w2 = if w1 { 0.99 } else { 0.01 };
            let w2 = i64::from(rng.gen::<f64>() < p_w2);
            ConfounderDraw { w1, w2 }
        }
        Scenario::WindyPendulum | Scenario::WindyPendulumStar => {
            let p_calm = config.odds / (1.0 + config.odds);
            let x: f64 = rng.gen();
            let w2 = if x < p_calm {
                1
            } else if x < p_calm + (1.0 - p_calm) / 2.0 {
                0
            } else {
                2
            };
            ConfounderDraw { w1: w2 != 1, w2 }
        }
        Scenario::Tabular => panic!("tabular scenarios draw confounders from explicit tables"),
    }
}

/// Wind force for a wind-direction code.
pub fn wind_force(w2: i64) -> Result<f64, EnvError> {
    match w2 {
        0 => Ok(-5.0),
        1 => Ok(0.0),
        2 => Ok(5.0),
        other => Err(EnvError::InvalidWindCode(other)),
    }
}

/// The behavior policy: rational action unless the confounder pushes the
/// human into a named irrational action.
pub fn behavior_action(
    scenario: Scenario,
    s_obs: &StateVec,
    w: &ConfounderDraw,
    rational_action: usize,
    config: &BehaviorConfig,
    rng: &mut Rng,
) -> usize {
    let v = s_obs.v;
    let slow_down = || action_of_torque(-2 * sign_i(v));
    let speed_up = || action_of_torque(2 * sign_i(v));
    match scenario {
        Scenario::EmotionalPendulum | Scenario::EmotionalPendulumStar => {
            if !w.w1 || v == 0.0 {
                return rational_action;
            }
            let irrational = rng.gen::<f64>() < config.irrational_p;
            if !irrational {
                rational_action
            } else if v.abs() <= config.v_threshold {
                speed_up()
            } else {
                slow_down()
            }
        }
        Scenario::WindyPendulum | Scenario::WindyPendulumStar => {
            if !w.w1 {
                return rational_action;
            }
            let x: f64 = rng.gen();
            if x < config.irrational_p / 2.0 {
                // force opposing the tangential wind component
                let theta = s_obs.y.atan2(s_obs.x);
                let fw = wind_force(w.w2).expect("valid wind code");
                let s = sign_i(fw * theta.cos());
                if s == 0 {
                    rational_action
                } else {
                    action_of_torque(-2 * s)
                }
            } else if x < config.irrational_p {
                slow_down()
            } else {
                rational_action
            }
        }
        Scenario::Tabular => panic!("tabular scenarios use explicit policy tables"),
    }
}

fn sign_i(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// The intermittently failing controller: m = a with probability
/// 1 - p_fail + p_fail/5, otherwise uniform over the other actions.
pub fn intermediate_action(a: usize, p_fail: f64, rng: &mut Rng) -> usize {
    if rng.gen::<f64>() < p_fail {
        rng.gen_range(0..cmdp_core::N_ACTIONS)
    } else {
        a
    }
}

/// Reward r = r_o + r_a: the classic cost term plus the encouragement
/// bonus N(10,1) when the confounder condition holds, N(0,1) otherwise.
pub fn reward(
    scenario: Scenario,
    theta: f64,
    v: f64,
    executed_torque: f64,
    w: &ConfounderDraw,
    rng: &mut Rng,
) -> f64 {
    let r_o = original_cost(theta, v, executed_torque);
    let encouraged = match scenario {
        Scenario::EmotionalPendulum | Scenario::EmotionalPendulumStar => w.w2 == 1,
        Scenario::WindyPendulum | Scenario::WindyPendulumStar => w.w2 != 1,
        Scenario::Tabular => false,
    };
    let mean = if encouraged { 10.0 } else { 0.0 };
    let r_a = Normal::new(mean, 1.0).unwrap().sample(rng);
    r_o + r_a
}

/// The deterministic cost part of the reward.
pub fn original_cost(theta: f64, v: f64, torque: f64) -> f64 {
    let t = wrap_angle(theta);
    -(t * t + 0.1 * v * v + 0.001 * torque * torque)
}
