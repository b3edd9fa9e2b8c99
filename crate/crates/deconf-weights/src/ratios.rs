use crate::estimators::{state_features, FreqPolicy, LscdePolicy, PolicyEstimator, UConditional};
use crate::{Standardizer, WeightError};
use cmdp_core::{rng_from_seed, DensityConfig, OfflineDataset, RatioKind, Transition};
use density_lscde::{
    conditional_density, fit_lscde, jitter, Bandwidths, FitOptions, JitterConfig, LscdeModel,
};

/// Denominator floor for estimated ratios; positivity of the true
/// conditionals means a floored denominator signals estimation failure.
const DENOM_FLOOR: f64 = 1e-12;

/// Outcome density P(outcome | m, a, s) with the standardizers used to
/// map raw rows into fitting space.
#[derive(Debug, Clone)]
pub struct OutcomeModel {
    pub model: LscdeModel,
    pub x_std: Standardizer,
    pub y_std: Standardizer,
}

/// Everything a ratio evaluation needs.
#[derive(Debug, Clone)]
pub struct DensityBundle {
    pub ratio_kind: RatioKind,
    pub n_actions: usize,
    pub outcome: Option<OutcomeModel>,
    pub policy: Option<PolicyEstimator>,
    pub u_cond: Option<UConditional>,
}

/// Hyperparameters for [`fit_bundle`].
#[derive(Debug, Clone)]
pub struct FitBundleOptions {
    pub density: DensityConfig,
    pub jitter: JitterConfig,
    pub n_actions: usize,
    /// Estimate P(a|s) by jittered kernel density instead of the default
    /// cell-frequency estimator.
    pub policy_lscde: bool,
    pub seed: u64,
}

impl Default for FitBundleOptions {
    fn default() -> Self {
        FitBundleOptions {
            density: DensityConfig::default(),
            jitter: JitterConfig::default(),
            n_actions: cmdp_core::N_ACTIONS,
            policy_lscde: false,
            seed: 0,
        }
    }
}

/// Raw outcome row of a transition for the given ratio kind.
fn outcome_row(t: &Transition, kind: RatioKind, tabular: bool) -> Vec<f64> {
    match kind {
        RatioKind::Full => {
            if tabular {
                vec![t.s_next.x, t.r]
            } else {
                vec![t.s_next.x, t.s_next.y, t.s_next.v, t.r]
            }
        }
        RatioKind::RewardOnly => vec![t.r],
        RatioKind::NextStateOnly => {
            if tabular {
                vec![t.s_next.x]
            } else {
                vec![t.s_next.x, t.s_next.y, t.s_next.v]
            }
        }
        RatioKind::Backdoor => unreachable!("backdoor has no outcome model"),
    }
}

/// Discrete coordinates of the outcome row, by index, for jittering.
fn outcome_discrete(kind: RatioKind, tabular: bool) -> Vec<usize> {
    match (kind, tabular) {
        (RatioKind::Full, true) | (RatioKind::NextStateOnly, true) => vec![0],
        _ => vec![],
    }
}

/// Conditioning row [m, a, state...] with m and a at the given codes.
fn conditioning_row(t: &Transition, m: usize, a: usize, tabular: bool) -> Vec<f64> {
    let mut row = vec![m as f64, a as f64];
    row.extend(state_features(
        &t.s,
        if tabular {
            cmdp_core::Scenario::Tabular
        } else {
            cmdp_core::Scenario::EmotionalPendulum
        },
    ));
    row
}

fn explicit_bandwidths(cfg: &DensityConfig) -> Option<Bandwidths> {
    match (cfg.bandwidth_x, cfg.bandwidth_y) {
        (Some(x), Some(y)) => Some(Bandwidths { x, y }),
        _ => None,
    }
}

/// Fits the models the requested ratio kind needs: the jittered outcome
/// density and a policy estimate for the frontdoor-style ratios, or the
/// discrete u-conditionals for the backdoor ratio.
pub fn fit_bundle(
    ds: &OfflineDataset,
    kind: RatioKind,
    opts: &FitBundleOptions,
) -> Result<DensityBundle, WeightError> {
    ds.validate()?;
    let tabular = ds.scenario == cmdp_core::Scenario::Tabular;
    if kind == RatioKind::Backdoor {
        for (row, t) in ds.transitions.iter().enumerate() {
            if t.u.is_none() {
                return Err(WeightError::MissingConfounder(row));
            }
        }
        let u_cond = UConditional::fit(ds, opts.n_actions, opts.density.policy_cells, opts.seed);
        return Ok(DensityBundle {
            ratio_kind: kind,
            n_actions: opts.n_actions,
            outcome: None,
            policy: None,
            u_cond: Some(u_cond),
        });
    }

    let mut rng = rng_from_seed(opts.seed);
    let disc_y = outcome_discrete(kind, tabular);
    let mut x_rows = Vec::with_capacity(ds.len());
    let mut y_rows = Vec::with_capacity(ds.len());
    for (row, t) in ds.transitions.iter().enumerate() {
        let m = t.m.ok_or(WeightError::MissingIntermediate(row))?;
        let mut x = conditioning_row(t, m, t.a, tabular);
        x[0] = jitter(m as i64, &opts.jitter, &mut rng);
        x[1] = jitter(t.a as i64, &opts.jitter, &mut rng);
        if tabular {
            x[2] = jitter(x[2] as i64, &opts.jitter, &mut rng);
        }
        let mut y = outcome_row(t, kind, tabular);
        for &j in &disc_y {
            y[j] = jitter(y[j] as i64, &opts.jitter, &mut rng);
        }
        x_rows.push(x);
        y_rows.push(y);
    }
    let x_std = Standardizer::fit(&x_rows);
    let y_std = Standardizer::fit(&y_rows);
    let x_fit: Vec<Vec<f64>> = x_rows.iter().map(|r| x_std.apply(r)).collect();
    let y_fit: Vec<Vec<f64>> = y_rows.iter().map(|r| y_std.apply(r)).collect();
    let model = fit_lscde(
        &x_fit,
        &y_fit,
        &FitOptions {
            k: opts.density.k,
            lambda: opts.density.lambda,
            bandwidths: explicit_bandwidths(&opts.density),
            bandwidth_scale: opts.density.bandwidth_scale,
            center_method: opts.density.center_method,
            seed: opts.seed.wrapping_add(1),
        },
    )?;
    let outcome = OutcomeModel { model, x_std, y_std };

    let policy = if opts.policy_lscde {
        let px: Vec<Vec<f64>> = ds
            .transitions
            .iter()
            .map(|t| state_features(&t.s, ds.scenario))
            .collect();
        let px_std = Standardizer::fit(&px);
        let px_fit: Vec<Vec<f64>> = px.iter().map(|r| px_std.apply(r)).collect();
        let py: Vec<Vec<f64>> = ds
            .transitions
            .iter()
            .map(|t| vec![jitter(t.a as i64, &opts.jitter, &mut rng)])
            .collect();
        let pmodel = fit_lscde(
            &px_fit,
            &py,
            &FitOptions {
                k: opts.density.k,
                lambda: opts.density.lambda,
                bandwidths: explicit_bandwidths(&opts.density),
                bandwidth_scale: opts.density.bandwidth_scale,
                center_method: opts.density.center_method,
                seed: opts.seed.wrapping_add(2),
            },
        )?;
        PolicyEstimator::Lscde(LscdePolicy {
            model: pmodel,
            x_std: px_std,
            n_actions: opts.n_actions,
            scenario: ds.scenario,
        })
    } else {
        PolicyEstimator::Frequency(FreqPolicy::fit(
            ds,
            opts.n_actions,
            opts.density.policy_cells,
            opts.seed.wrapping_add(3),
        ))
    };

    Ok(DensityBundle {
        ratio_kind: kind,
        n_actions: opts.n_actions,
        outcome: Some(outcome),
        policy: Some(policy),
        u_cond: None,
    })
}

/// Per-transition deconfounding weights with post-processing metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub raw: Vec<f64>,
    pub clipped: Vec<f64>,
    pub clip_bounds: (f64, f64),
    pub mean_raw: f64,
    /// Transitions whose ratio denominator hit the floor.
    pub flagged: usize,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn fraction_clipped(&self) -> f64 {
        let n = self
            .raw
            .iter()
            .zip(&self.clipped)
            .filter(|(r, c)| r != c)
            .count();
        n as f64 / self.raw.len().max(1) as f64
    }

    /// More than 5% floored denominators indicates the density fit is
    /// unreliable for this dataset.
    pub fn quality_warning(&self) -> bool {
        self.flagged * 20 > self.raw.len()
    }
}

/// Clamps raw ratios into the clip interval, recording the raw mean.
pub fn postprocess_weights(
    raw: Vec<f64>,
    clip_low: f64,
    clip_high: f64,
) -> Result<WeightVector, WeightError> {
    if !(0.0 <= clip_low && clip_low <= clip_high) {
        return Err(WeightError::BadClipBounds(clip_low, clip_high));
    }
    let mean_raw = raw.iter().sum::<f64>() / raw.len().max(1) as f64;
    let clipped = raw.iter().map(|&w| w.clamp(clip_low, clip_high)).collect();
    Ok(WeightVector {
        raw,
        clipped,
        clip_bounds: (clip_low, clip_high),
        mean_raw,
        flagged: 0,
    })
}

fn check_kind(bundle: &DensityBundle, expected: RatioKind) -> Result<(), WeightError> {
    if bundle.ratio_kind != expected {
        return Err(WeightError::KindMismatch {
            expected: expected.as_str(),
            found: bundle.ratio_kind.as_str(),
        });
    }
    Ok(())
}

fn estimate_frontdoor(
    ds: &OfflineDataset,
    bundle: &DensityBundle,
    kind: RatioKind,
    clip_bounds: (f64, f64),
) -> Result<WeightVector, WeightError> {
    check_kind(bundle, kind)?;
    let tabular = ds.scenario == cmdp_core::Scenario::Tabular;
    let outcome = bundle.outcome.as_ref().expect("bundle invariant");
    let policy = bundle.policy.as_ref().expect("bundle invariant");
    let mut raw = Vec::with_capacity(ds.len());
    let mut flagged = 0;
    for (row, t) in ds.transitions.iter().enumerate() {
        let m = t.m.ok_or(WeightError::MissingIntermediate(row))?;
        let y = outcome.y_std.apply(&outcome_row(t, kind, tabular));
        let probs = policy.probs(&t.s);
        let mut num = 0.0;
        let mut den = 0.0;
        for a in 0..bundle.n_actions {
            let x = outcome.x_std.apply(&conditioning_row(t, m, a, tabular));
            let p = conditional_density(&outcome.model, &x, &y)?;
            num += probs[a] * p;
            if a == t.a {
                den = p;
            }
        }
        if den < DENOM_FLOOR {
            den = DENOM_FLOOR;
            flagged += 1;
        }
        raw.push(num / den);
    }
    let mut w = postprocess_weights(raw, clip_bounds.0, clip_bounds.1)?;
    w.flagged = flagged;
    Ok(w)
}

/// Full frontdoor-style ratio with the joint (s', r) outcome.
pub fn estimate_d1(
    ds: &OfflineDataset,
    bundle: &DensityBundle,
    clip_bounds: (f64, f64),
) -> Result<WeightVector, WeightError> {
    estimate_frontdoor(ds, bundle, RatioKind::Full, clip_bounds)
}

/// Reward-only simplification for confounders that touch the reward but
/// not the next state.
pub fn estimate_d1_reward_only(
    ds: &OfflineDataset,
    bundle: &DensityBundle,
    clip_bounds: (f64, f64),
) -> Result<WeightVector, WeightError> {
    estimate_frontdoor(ds, bundle, RatioKind::RewardOnly, clip_bounds)
}

/// Next-state-only simplification for confounders that touch the
/// transition but not the reward.
pub fn estimate_d1_nextstate_only(
    ds: &OfflineDataset,
    bundle: &DensityBundle,
    clip_bounds: (f64, f64),
) -> Result<WeightVector, WeightError> {
    estimate_frontdoor(ds, bundle, RatioKind::NextStateOnly, clip_bounds)
}

/// Backdoor ratio P(u|s) / P(u|s,a) for a recorded confounder subset.
pub fn estimate_d2(
    ds: &OfflineDataset,
    bundle: &DensityBundle,
    clip_bounds: (f64, f64),
) -> Result<WeightVector, WeightError> {
    check_kind(bundle, RatioKind::Backdoor)?;
    let u_cond = bundle.u_cond.as_ref().expect("bundle invariant");
    let mut raw = Vec::with_capacity(ds.len());
    let mut flagged = 0;
    for (row, t) in ds.transitions.iter().enumerate() {
        let u = t.u.ok_or(WeightError::MissingConfounder(row))?;
        let num = u_cond.prob_u_given_s(&t.s, u);
        let mut den = u_cond.prob_u_given_sa(&t.s, t.a, u);
        if den < DENOM_FLOOR {
            den = DENOM_FLOOR;
            flagged += 1;
        }
        raw.push(num / den);
    }
    let mut w = postprocess_weights(raw, clip_bounds.0, clip_bounds.1)?;
    w.flagged = flagged;
    Ok(w)
}

/// Dispatch on the bundle's ratio kind.
pub fn estimate_weights(
    ds: &OfflineDataset,
    bundle: &DensityBundle,
    clip_bounds: (f64, f64),
) -> Result<WeightVector, WeightError> {
    match bundle.ratio_kind {
        RatioKind::Full => estimate_d1(ds, bundle, clip_bounds),
        RatioKind::RewardOnly => estimate_d1_reward_only(ds, bundle, clip_bounds),
        RatioKind::NextStateOnly => estimate_d1_nextstate_only(ds, bundle, clip_bounds),
        RatioKind::Backdoor => estimate_d2(ds, bundle, clip_bounds),
    }
}

/// Categorical sampling distribution p(i) proportional to the clipped
/// weight.
pub fn resample_distribution(weights: &WeightVector) -> Result<Vec<f64>, WeightError> {
    let total: f64 = weights.clipped.iter().sum();
    if total <= 0.0 {
        return Err(WeightError::AllZeroWeights);
    }
    Ok(weights.clipped.iter().map(|w| w / total).collect())
}
