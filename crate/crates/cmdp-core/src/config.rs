use crate::{CoreError, Scenario};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// RL algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algo {
    Dqn,
    Ddqn,
    Sac,
    Cql,
    Bc,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Dqn => "DQN",
            Algo::Ddqn => "DDQN",
            Algo::Sac => "SAC",
            Algo::Cql => "CQL",
            Algo::Bc => "BC",
        }
    }
}

/// How deconfounding weights enter training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeconfMode {
    None,
    Reweight,
    Resample,
}

impl DeconfMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DeconfMode::None => "none",
            DeconfMode::Reweight => "reweight",
            DeconfMode::Resample => "resample",
        }
    }
}

/// Which deconfounding ratio is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioKind {
    Full,
    RewardOnly,
    NextStateOnly,
    Backdoor,
}

impl RatioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RatioKind::Full => "full",
            RatioKind::RewardOnly => "reward-only",
            RatioKind::NextStateOnly => "next-state-only",
            RatioKind::Backdoor => "backdoor",
        }
    }
}

/// Environment hyperparameters of one benchmark setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvParams {
    /// Probability that the controller fails; non-Star tasks only.
    #[serde(default)]
    pub p_fail: Option<f64>,
    /// odds1 (emotional) or odds2 (windy).
    pub odds: f64,
    /// Speed threshold; EmotionalPendulum family only.
    #[serde(default)]
    pub v_t: Option<f64>,
    /// I_{p,1} or I_{p,2}.
    pub irrational_p: f64,
}

/// Density-fit hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Explicit bandwidths override the median heuristic.
    #[serde(default)]
    pub bandwidth_x: Option<f64>,
    #[serde(default)]
    pub bandwidth_y: Option<f64>,
    /// Scale applied to the median-distance heuristic bandwidths.
    #[serde(default = "default_bw_scale")]
    pub bandwidth_scale: f64,
    #[serde(default = "default_centers")]
    pub center_method: CenterMethod,
    /// Number of k-means cells behind the discrete P(a|s) estimator.
    #[serde(default = "default_policy_cells")]
    pub policy_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenterMethod {
    Kmeans,
    Random,
}

fn default_k() -> usize {
    200
}
fn default_lambda() -> f64 {
    0.1
}
fn default_bw_scale() -> f64 {
    1.0
}
fn default_centers() -> CenterMethod {
    CenterMethod::Kmeans
}
fn default_policy_cells() -> usize {
    100
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            k: default_k(),
            lambda: default_lambda(),
            bandwidth_x: None,
            bandwidth_y: None,
            bandwidth_scale: default_bw_scale(),
            center_method: default_centers(),
            policy_cells: default_policy_cells(),
        }
    }
}

/// Training hyperparameters shared by every algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlParams {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_sync")]
    pub target_sync_interval: usize,
    #[serde(default = "default_alpha_ent")]
    pub alpha_ent: f64,
    #[serde(default = "default_cql_weight")]
    pub cql_weight: f64,
    #[serde(default = "default_adam")]
    pub adam: bool,
}

fn default_gamma() -> f64 {
    0.99
}
fn default_lr() -> f64 {
    3e-4
}
fn default_batch() -> usize {
    256
}
fn default_sync() -> usize {
    1000
}
fn default_alpha_ent() -> f64 {
    0.2
}
fn default_cql_weight() -> f64 {
    1.0
}
fn default_adam() -> bool {
    true
}

impl Default for RlParams {
    fn default() -> Self {
        RlParams {
            gamma: default_gamma(),
            learning_rate: default_lr(),
            batch_size: default_batch(),
            target_sync_interval: default_sync(),
            alpha_ent: default_alpha_ent(),
            cql_weight: default_cql_weight(),
            adam: default_adam(),
        }
    }
}

/// One full experiment: scenario, environment setting, budgets, and the
/// algorithm/mode grid entry to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub env: EnvParams,
    pub dataset_size: usize,
    #[serde(default)]
    pub density: DensityConfig,
    pub algo: Algo,
    pub mode: DeconfMode,
    pub ratio_kind: RatioKind,
    pub total_steps: usize,
    #[serde(default = "default_eval_interval")]
    pub eval_interval: usize,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default)]
    pub rl: RlParams,
    pub seeds: Vec<u64>,
    #[serde(default = "default_clip")]
    pub clip_bounds: (f64, f64),
}

fn default_eval_interval() -> usize {
    1000
}
fn default_eval_episodes() -> usize {
    20
}
fn default_clip() -> (f64, f64) {
    (0.1, 10.0)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        let prob = |name: &str, p: f64| -> Result<(), CoreError> {
            if !(0.0..=1.0).contains(&p) {
                return Err(CoreError::Config(format!("{name}={p} outside [0,1]")));
            }
            Ok(())
        };
        if let Some(p) = self.env.p_fail {
            prob("p_fail", p)?;
        }
        prob("irrational_p", self.env.irrational_p)?;
        if !(self.env.odds > 0.0) {
            return Err(CoreError::Config(format!("odds={} must be > 0", self.env.odds)));
        }
        if self.dataset_size < 1 {
            return Err(CoreError::Config("dataset_size must be >= 1".into()));
        }
        if self.scenario.is_star() && self.env.p_fail.is_some() {
            return Err(CoreError::Config(
                "p_fail is only meaningful for non-Star scenarios".into(),
            ));
        }
        if !self.scenario.is_star() && self.scenario != Scenario::Tabular && self.env.p_fail.is_none()
        {
            return Err(CoreError::Config("p_fail required for non-Star scenarios".into()));
        }
        if self.clip_bounds.0 < 0.0 || self.clip_bounds.0 > self.clip_bounds.1 {
            return Err(CoreError::Config("clip bounds must satisfy 0 <= low <= high".into()));
        }
        Ok(())
    }

    /// Stable digest of the generating configuration; used for dataset
    /// metadata and stage caching.
    pub fn digest(&self) -> String {
        let canon = format!("{self:?}");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        let out = h.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            scenario: Scenario::EmotionalPendulum,
            env: EnvParams {
                p_fail: Some(0.2),
                odds: 4.0,
                v_t: Some(1.0),
                irrational_p: 0.7,
            },
            dataset_size: 1000,
            density: DensityConfig::default(),
            algo: Algo::Dqn,
            mode: DeconfMode::None,
            ratio_kind: RatioKind::RewardOnly,
            total_steps: 100,
            eval_interval: 1000,
            eval_episodes: 20,
            rl: RlParams::default(),
            seeds: vec![0],
            clip_bounds: (0.1, 10.0),
        }
    }

    #[test]
    fn valid_config_passes() {
        base().validate().unwrap();
    }

    #[test]
    fn bad_probability_rejected() {
        let mut c = base();
        c.env.irrational_p = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn bad_odds_rejected() {
        let mut c = base();
        c.env.odds = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn digest_stable_and_sensitive() {
        let c = base();
        assert_eq!(c.digest(), c.digest());
        let mut c2 = base();
        c2.env.irrational_p = 0.9;
        assert_ne!(c.digest(), c2.digest());
    }
}
