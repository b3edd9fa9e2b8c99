use crate::Standardizer;
use cmdp_core::{rng_from_seed, OfflineDataset, Scenario, StateVec};
use density_lscde::{conditional_density, kmeans, JitterConfig, LscdeModel};

/// Feature vector of a state for density and cell estimators. Tabular
/// states are a single discrete code held in `x`.
pub fn state_features(s: &StateVec, scenario: Scenario) -> Vec<f64> {
    if scenario == Scenario::Tabular {
        vec![s.x]
    } else {
        vec![s.x, s.y, s.v]
    }
}

/// Hard partition of state space by nearest k-means centroid over
/// standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct StateCells {
    std: Standardizer,
    centers: Vec<Vec<f64>>,
}

impl StateCells {
    /// Fits cells on at most 10,000 stride-subsampled feature rows; the
    /// assignment step afterwards uses the full data.
    pub fn fit(features: &[Vec<f64>], n_cells: usize, seed: u64) -> Self {
        let std = Standardizer::fit(features);
        let mapped: Vec<Vec<f64>> = features.iter().map(|f| std.apply(f)).collect();
        let cap = 10_000;
        let stride = (mapped.len() / cap).max(1);
        let sub: Vec<Vec<f64>> = mapped.iter().step_by(stride).take(cap).cloned().collect();
        let k = n_cells.min(sub.len());
        let mut rng = rng_from_seed(seed);
        let centers = kmeans(&sub, k, &mut rng);
        StateCells { std, centers }
    }

    pub fn n_cells(&self) -> usize {
        self.centers.len()
    }

    pub fn assign(&self, features: &[f64]) -> usize {
        let f = self.std.apply(features);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, c) in self.centers.iter().enumerate() {
            let d: f64 = c.iter().zip(&f).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        best
    }
}

/// Frequency estimate of the observational policy P(a|s): per-cell action
/// counts with Laplace smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqPolicy {
    cells: StateCells,
    probs: Vec<Vec<f64>>,
    scenario: Scenario,
}

impl FreqPolicy {
    pub fn fit(ds: &OfflineDataset, n_actions: usize, n_cells: usize, seed: u64) -> Self {
        let features: Vec<Vec<f64>> = ds
            .transitions
            .iter()
            .map(|t| state_features(&t.s, ds.scenario))
            .collect();
        let cells = StateCells::fit(&features, n_cells, seed);
        let mut counts = vec![vec![1.0f64; n_actions]; cells.n_cells()];
        for (t, f) in ds.transitions.iter().zip(&features) {
            counts[cells.assign(f)][t.a] += 1.0;
        }
        for row in counts.iter_mut() {
            let total: f64 = row.iter().sum();
            for p in row.iter_mut() {
                *p /= total;
            }
        }
        FreqPolicy {
            cells,
            probs: counts,
            scenario: ds.scenario,
        }
    }

    pub fn probs(&self, s: &StateVec) -> Vec<f64> {
        self.probs[self.cells.assign(&state_features(s, self.scenario))].clone()
    }
}

/// P(a|s) through the same jittered kernel density machinery as the
/// outcome models: fit p(a_jittered | s), query at the integer codes and
/// renormalize over the action set.
#[derive(Debug, Clone)]
pub struct LscdePolicy {
    pub model: LscdeModel,
    pub x_std: Standardizer,
    pub n_actions: usize,
    pub scenario: Scenario,
}

impl LscdePolicy {
    pub fn probs(&self, s: &StateVec) -> Vec<f64> {
        let x = self.x_std.apply(&state_features(s, self.scenario));
        let mut p: Vec<f64> = (0..self.n_actions)
            .map(|a| conditional_density(&self.model, &x, &[a as f64]).unwrap_or(0.0))
            .collect();
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            for v in p.iter_mut() {
                *v /= total;
            }
        } else {
            p = vec![1.0 / self.n_actions as f64; self.n_actions];
        }
        p
    }
}

#[derive(Debug, Clone)]
pub enum PolicyEstimator {
    Frequency(FreqPolicy),
    Lscde(LscdePolicy),
}

impl PolicyEstimator {
    pub fn probs(&self, s: &StateVec) -> Vec<f64> {
        match self {
            PolicyEstimator::Frequency(f) => f.probs(s),
            PolicyEstimator::Lscde(l) => l.probs(s),
        }
    }
}

/// Discrete conditional estimates P(u|s) and P(u|s,a) over state cells,
/// Laplace-smoothed, for the backdoor ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct UConditional {
    cells: StateCells,
    values: Vec<i64>,
    /// [cell][u-index]
    p_u_s: Vec<Vec<f64>>,
    /// [cell][action][u-index]
    p_u_sa: Vec<Vec<Vec<f64>>>,
    scenario: Scenario,
}

impl UConditional {
    pub fn fit(ds: &OfflineDataset, n_actions: usize, n_cells: usize, seed: u64) -> Self {
        let features: Vec<Vec<f64>> = ds
            .transitions
            .iter()
            .map(|t| state_features(&t.s, ds.scenario))
            .collect();
        let cells = StateCells::fit(&features, n_cells, seed);
        let mut values: Vec<i64> = ds
            .transitions
            .iter()
            .filter_map(|t| t.u)
            .collect();
        values.sort_unstable();
        values.dedup();
        let nv = values.len();
        let nc = cells.n_cells();
        let mut c_s = vec![vec![1.0f64; nv]; nc];
        let mut c_sa = vec![vec![vec![1.0f64; nv]; n_actions]; nc];
        for (t, f) in ds.transitions.iter().zip(&features) {
            if let Some(u) = t.u {
                let ui = values.binary_search(&u).unwrap();
                let cell = cells.assign(f);
                c_s[cell][ui] += 1.0;
                c_sa[cell][t.a][ui] += 1.0;
            }
        }
        for row in c_s.iter_mut() {
            let total: f64 = row.iter().sum();
            for p in row.iter_mut() {
                *p /= total;
            }
        }
        for cell in c_sa.iter_mut() {
            for row in cell.iter_mut() {
                let total: f64 = row.iter().sum();
                for p in row.iter_mut() {
                    *p /= total;
                }
            }
        }
        UConditional {
            cells,
            values,
            p_u_s: c_s,
            p_u_sa: c_sa,
            scenario: ds.scenario,
        }
    }

    fn u_index(&self, u: i64) -> Option<usize> {
        self.values.binary_search(&u).ok()
    }

    pub fn prob_u_given_s(&self, s: &StateVec, u: i64) -> f64 {
        match self.u_index(u) {
            Some(ui) => self.p_u_s[self.cells.assign(&state_features(s, self.scenario))][ui],
            None => 0.0,
        }
    }

    pub fn prob_u_given_sa(&self, s: &StateVec, a: usize, u: i64) -> f64 {
        match self.u_index(u) {
            Some(ui) => self.p_u_sa[self.cells.assign(&state_features(s, self.scenario))][a][ui],
            None => 0.0,
        }
    }
}

/// Jitters the discrete coordinates of a conditioning row for training.
/// The query path uses the integer codes directly.
pub fn jitter_codes(
    codes: &[i64],
    cfg: &JitterConfig,
    rng: &mut cmdp_core::Rng,
) -> Vec<f64> {
    codes.iter().map(|&c| density_lscde::jitter(c, cfg, rng)).collect()
}
