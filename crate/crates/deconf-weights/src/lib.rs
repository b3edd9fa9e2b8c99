//! Deconfounding ratio estimation: fits the conditional density models a
//! ratio needs, evaluates the frontdoor-style and backdoor ratios per
//! transition, post-processes them into training weights, and provides
//! exact enumeration oracles on tabular instances for testing.

mod estimators;
mod ratios;
mod standardize;
mod tabular;
mod weight_io;

pub use estimators::{
    jitter_codes, state_features, FreqPolicy, LscdePolicy, PolicyEstimator, StateCells,
    UConditional,
};
pub use ratios::{
    estimate_d1, estimate_d1_nextstate_only, estimate_d1_reward_only, estimate_d2,
    estimate_weights, fit_bundle, postprocess_weights, resample_distribution, DensityBundle,
    FitBundleOptions, OutcomeModel, WeightVector,
};
pub use standardize::Standardizer;
pub use tabular::{
    exact_ratio_oracle, generate_tabular_dataset, interventional_outcome, policy_value,
    value_iteration, TabularCmdp,
};
pub use weight_io::{load_weights, save_weights};

#[derive(Debug, thiserror::Error)]
pub enum WeightError {
    #[error("transition {0} is missing the executed action m")]
    MissingIntermediate(usize),
    #[error("transition {0} is missing the observed confounder subset u")]
    MissingConfounder(usize),
    #[error("bundle holds ratio kind {found} but {expected} was requested")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("all weights are zero; no resampling distribution exists")]
    AllZeroWeights,
    #[error("clip bounds must satisfy 0 <= low <= high, got ({0}, {1})")]
    BadClipBounds(f64, f64),
    #[error("weight vector length {weights} does not match dataset length {dataset}")]
    LengthMismatch { weights: usize, dataset: usize },
    #[error("unnormalized probability table: {0}")]
    UnnormalizedTable(String),
    #[error("weight file: {0}")]
    BadWeightFile(String),
    #[error(transparent)]
    Density(#[from] density_lscde::DensityError),
    #[error(transparent)]
    Core(#[from] cmdp_core::CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
