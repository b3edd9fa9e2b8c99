use cmdp_core::{action_of_torque, Rng, StateVec, N_ACTIONS};
use rand::Rng as _;

/// Anything that maps an observed state to a discrete action.
pub trait Policy {
    fn act(&self, s: &StateVec, rng: &mut Rng) -> usize;
}

/// Uniform-random baseline.
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn act(&self, _s: &StateVec, rng: &mut Rng) -> usize {
        rng.gen_range(0..N_ACTIONS)
    }
}

/// Deterministic energy-shaping swing-up plus proportional balance
/// controller, snapped to the discrete torque set.
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    /// Energy-pumping gain.
    pub k_energy: f64,
    /// Balance gains on angle and velocity.
    pub k_theta: f64,
    pub k_v: f64,
}

impl Default for ScriptedPolicy {
    fn default() -> Self {
        ScriptedPolicy {
            k_energy: 1.2,
            k_theta: 12.0,
            k_v: 2.5,
        }
    }
}

impl ScriptedPolicy {
    pub fn action(&self, s: &StateVec) -> usize {
        let theta = s.y.atan2(s.x);
        let v = s.v;
        // dynamics-consistent mechanical energy (inertia 1/3, CoM at l/2):
        // E = v^2/6 + 5 cos(theta); upright rest has E = 5
        let energy = v * v / 6.0 + 5.0 * theta.cos();
        let upright = theta.cos() > 0.85 && v.abs() < 6.0;
        let torque = if upright {
            -self.k_theta * theta - self.k_v * v
        } else if v != 0.0 {
            self.k_energy * (5.0 - energy) * v.signum()
        } else {
            2.0
        };
        snap_torque(torque)
    }
}

impl Policy for ScriptedPolicy {
    fn act(&self, s: &StateVec, _rng: &mut Rng) -> usize {
        self.action(s)
    }
}

/// The default scripted controller used as the rational stand-in.
pub fn scripted_rational_policy(s: &StateVec) -> usize {
    ScriptedPolicy::default().action(s)
}

/// Base policy with an epsilon-uniform exploration component.
///
/// Offline value learning needs intended-action coverage of the whole
/// torque set; the deterministic controller alone supports only the
/// torques it would pick, and bootstrapping through the unsupported
/// actions diverges. The stand-in therefore mixes in uniform actions,
/// playing the role of the stochastic policies that collected the
/// original benchmark data.
#[derive(Debug, Clone)]
pub struct ExploratoryPolicy<P> {
    pub base: P,
    pub epsilon: f64,
}

impl ExploratoryPolicy<ScriptedPolicy> {
    /// The scripted controller with the exploration rate used for
    /// dataset generation.
    pub fn data_collection() -> Self {
        ExploratoryPolicy {
            base: ScriptedPolicy::default(),
            epsilon: 0.3,
        }
    }
}

impl<P: Policy> Policy for ExploratoryPolicy<P> {
    fn act(&self, s: &StateVec, rng: &mut Rng) -> usize {
        if rng.gen::<f64>() < self.epsilon {
            rng.gen_range(0..N_ACTIONS)
        } else {
            self.base.act(s, rng)
        }
    }
}

fn snap_torque(torque: f64) -> usize {
    let t = torque.clamp(-2.0, 2.0).round() as i32;
    action_of_torque(t)
}
