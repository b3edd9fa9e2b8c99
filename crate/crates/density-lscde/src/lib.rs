//! Conditional density estimation for mixed discrete/continuous data:
//! jittering of discrete variables, kernel-center selection, regularized
//! least-squares fitting and normalized conditional-density evaluation.

mod jitter;
mod kmeans;
mod lscde;
mod model_io;
mod select;

pub use jitter::{jitter, JitterConfig};
pub use kmeans::kmeans;
pub use lscde::{conditional_density, fit_lscde, log_y_normalizer, Bandwidths, FitOptions, LscdeModel};
pub use model_io::{load_model, save_model};
pub use select::{cross_validate, median_bandwidth, select_centers, CenterMethod, KernelCenters};

#[derive(Debug, thiserror::Error)]
pub enum DensityError {
    #[error("k={k} exceeds the number of samples n={n}")]
    TooManyCenters { k: usize, n: usize },
    #[error("linear system is singular; increase lambda or deduplicate centers")]
    SingularSystem,
    #[error("degenerate fit: all coefficients are zero after clipping")]
    DegenerateFit,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error("model file: {0}")]
    BadModelFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
