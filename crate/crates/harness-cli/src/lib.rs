//! Config-driven experiment orchestration: dataset generation, density
//! fitting, weight estimation, offline training with periodic online
//! evaluation, and report emission, with per-stage artifact caching.

pub mod cache;
pub mod pipeline;
pub mod records;

pub use pipeline::{
    dataset_stage, eval_nets, load_config, run_pipeline, train_stage, weights_stage,
};
pub use records::{
    best_return, emit_csv, emit_report, final_return, parse_csv, seed_mean_curve, EvalRecord,
    ReportCell,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("stage {stage}: {message}")]
    Stage {
        stage: &'static str,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit status: 2 for config problems, 3 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 3,
        }
    }
}
