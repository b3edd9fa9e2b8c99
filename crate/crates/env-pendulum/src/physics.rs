use cmdp_core::{Rng, StateVec};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

/// Physical constants of the pendulum; defaults follow the classic
/// swing-up task with theta = 0 upright.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsParams {
    pub g: f64,
    pub l_rod: f64,
    pub mass: f64,
    pub dt: f64,
    pub max_speed: f64,
    pub episode_len: usize,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            g: 10.0,
            l_rod: 1.0,
            mass: 1.0,
            dt: 0.05,
            max_speed: 8.0,
            episode_len: 200,
        }
    }
}

/// True (unobserved) environment state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    /// Radians, wrapped to (-pi, pi]; 0 is upright.
    pub theta: f64,
    pub v: f64,
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut w = theta.rem_euclid(2.0 * std::f64::consts::PI);
    if w > std::f64::consts::PI {
        w -= 2.0 * std::f64::consts::PI;
    }
    w
}

/// One explicit-Euler step of the pendulum dynamics.
pub fn step_physics(state: EnvState, torque: f64, params: &PhysicsParams) -> EnvState {
    let accel = 3.0 * params.g / (2.0 * params.l_rod) * state.theta.sin()
        + 3.0 / (params.mass * params.l_rod * params.l_rod) * torque;
    let v = (state.v + accel * params.dt).clamp(-params.max_speed, params.max_speed);
    let theta = wrap_angle(state.theta + v * params.dt);
    EnvState { theta, v }
}

/// Observes the tip position through the vibrating sensor: the measured
/// length l follows a normal with mean 1 and variance 0.01, truncated
/// to (0.5, 1.5). The angular velocity passes through exactly.
pub fn observe(state: &EnvState, rng: &mut Rng) -> StateVec {
    let normal = Normal::new(1.0, 0.1).unwrap();
    let l = loop {
        let l = normal.sample(rng);
        if l > 0.5 && l < 1.5 {
            break l;
        }
    };
    StateVec::new(state.theta.cos() * l, state.theta.sin() * l, state.v)
}

/// Uniform reset distribution: theta in (-pi, pi], v in (-1, 1).
pub fn reset_state(rng: &mut Rng) -> EnvState {
    EnvState {
        theta: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        v: rng.gen_range(-1.0..1.0),
    }
}
