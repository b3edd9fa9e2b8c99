//! Differentiable Q-function and policy approximators plus the offline
//! RL algorithms (DQN, DDQN, discrete SAC, CQL, BC), each decomposed into
//! an outcome-dependent loss part f and a state-action-only part h so
//! that deconfounding weights can multiply f alone.

mod losses;
mod mlp;
mod qnet;
mod train;

pub use losses::{
    grad_bc, grad_q, grad_q_with_targets, grad_sac_actor, grad_sac_critic, loss_bc, loss_cql,
    loss_ddqn, loss_dqn, loss_sac_discrete, soft_value, target_next_value, QLoss,
};
pub use mlp::{n_params, ForwardCache, Mlp};
pub use qnet::{
    argmax, load_params, logsumexp, save_params, softmax, PolicyHead, QApproximator,
    DEFAULT_HIDDEN,
};
pub use train::{behavior_cloning, train, train_with_callback, TrainConfig, TrainOutput};

#[derive(Debug, thiserror::Error)]
pub enum RlError {
    #[error("loss became non-finite ({loss}) at step {step}; lower the learning rate")]
    NanLoss { step: usize, loss: f64 },
    #[error("weights required for reweight/resample modes")]
    WeightsMissing,
    #[error("weights supplied but mode is none")]
    WeightsUnexpected,
    #[error("weight vector length {weights} does not match dataset length {dataset}")]
    WeightMisalignment { weights: usize, dataset: usize },
    #[error("parameter file: {0}")]
    BadParamFile(String),
    #[error(transparent)]
    Weights(#[from] deconf_weights::WeightError),
    #[error(transparent)]
    Core(#[from] cmdp_core::CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
