use cmdp_core::Rng;
use rand::Rng as _;
use rand_distr::{Beta, Distribution};

/// Noise parameters for jittering discrete variables: the noise is
/// eps + theta_jit * (B - 0.5) with eps ~ U(-0.5, 0.5), B ~ Beta(v, v).
#[derive(Debug, Clone, Copy)]
pub struct JitterConfig {
    pub theta_jit: f64,
    pub v_beta: f64,
}

impl Default for JitterConfig {
    fn default() -> Self {
        JitterConfig {
            theta_jit: 0.5,
            v_beta: 5.0,
        }
    }
}

impl JitterConfig {
    /// Half-width of the noise support: 0.5 + theta_jit/2.
    pub fn support_halfwidth(&self) -> f64 {
        0.5 + self.theta_jit / 2.0
    }
}

/// Adds continuous noise to a discrete code so kernel density methods
/// apply to mixed data.
pub fn jitter(value: i64, cfg: &JitterConfig, rng: &mut Rng) -> f64 {
    let eps: f64 = rng.gen_range(-0.5..0.5);
    let b = if cfg.theta_jit == 0.0 {
        0.5
    } else {
        Beta::new(cfg.v_beta, cfg.v_beta).unwrap().sample(rng)
    };
    value as f64 + eps + cfg.theta_jit * (b - 0.5)
}
