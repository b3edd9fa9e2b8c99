//! Pendulum physics, the four confounded data-generating processes,
//! scripted behavior policies, offline dataset generation, and online
//! evaluation rollouts.

mod confounders;
mod generate;
mod physics;
mod policy;

pub use confounders::{
    behavior_action, intermediate_action, reward, sample_confounders, wind_force, BehaviorConfig,
    ConfounderDraw,
};
pub use generate::{generate_offline_dataset, online_rollout, rollout_unconfounded};
pub use physics::{observe, step_physics, wrap_angle, EnvState, PhysicsParams};
pub use policy::{scripted_rational_policy, ExploratoryPolicy, Policy, RandomPolicy, ScriptedPolicy};

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("invalid wind code {0}, expected 0, 1 or 2")]
    InvalidWindCode(i64),
    #[error("config/scenario mismatch: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Core(#[from] cmdp_core::CoreError),
}
