use crate::lscde::{design_system, fit_lscde, Bandwidths, FitOptions};
use crate::{kmeans, DensityError};
use rand::seq::SliceRandom;

pub use cmdp_core::CenterMethod;

/// Kernel centers in the joint (x, y) space.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCenters {
    pub points: Vec<Vec<f64>>,
}

/// Picks k kernel centers from the joint samples, either as k-means
/// centroids or by uniform subsampling without replacement. Deterministic
/// for a fixed seed.
pub fn select_centers(
    samples: &[Vec<f64>],
    k: usize,
    method: CenterMethod,
    seed: u64,
) -> Result<Vec<Vec<f64>>, DensityError> {
    if k == 0 || k > samples.len() {
        return Err(DensityError::TooManyCenters {
            k,
            n: samples.len(),
        });
    }
    let mut rng = cmdp_core::rng_from_seed(seed);
    Ok(match method {
        CenterMethod::Kmeans => kmeans(samples, k, &mut rng),
        CenterMethod::Random => {
            let mut idx: Vec<usize> = (0..samples.len()).collect();
            idx.shuffle(&mut rng);
            idx[..k].iter().map(|&i| samples[i].clone()).collect()
        }
    })
}

/// Median pairwise Euclidean distance over at most 500 points, taken with
/// a deterministic stride. Falls back to 1.0 when the median is zero.
pub fn median_bandwidth(samples: &[Vec<f64>]) -> f64 {
    let cap = 500;
    let stride = (samples.len() / cap).max(1);
    let sub: Vec<&Vec<f64>> = samples.iter().step_by(stride).take(cap).collect();
    let mut dists = Vec::with_capacity(sub.len() * (sub.len() - 1) / 2);
    for i in 0..sub.len() {
        for j in (i + 1)..sub.len() {
            let d2: f64 = sub[i]
                .iter()
                .zip(sub[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = dists[dists.len() / 2];
    if med > 0.0 {
        med
    } else {
        1.0
    }
}

/// K-fold cross-validation over a bandwidth-scale grid. The score of a
/// candidate is the held-out least-squares objective
/// J = 0.5 alpha' H alpha - h' alpha summed over folds; smaller is better.
/// Returns the chosen scale.
pub fn cross_validate(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    base: &FitOptions,
    scale_grid: &[f64],
    folds: usize,
) -> Result<f64, DensityError> {
    if scale_grid.is_empty() {
        return Err(DensityError::EmptyGrid);
    }
    assert!(folds >= 2 && folds <= x.len());
    let n = x.len();
    let mut best_scale = scale_grid[0];
    let mut best_score = f64::INFINITY;
    for &scale in scale_grid {
        let mut score = 0.0;
        for f in 0..folds {
            let mut tr_x = Vec::new();
            let mut tr_y = Vec::new();
            let mut ho_x = Vec::new();
            let mut ho_y = Vec::new();
            for i in 0..n {
                if i % folds == f {
                    ho_x.push(x[i].clone());
                    ho_y.push(y[i].clone());
                } else {
                    tr_x.push(x[i].clone());
                    tr_y.push(y[i].clone());
                }
            }
            let opts = FitOptions {
                bandwidth_scale: base.bandwidth_scale * scale,
                bandwidths: base.bandwidths.map(|bw| Bandwidths {
                    x: bw.x * scale,
                    y: bw.y * scale,
                }),
                ..base.clone()
            };
            let model = fit_lscde(&tr_x, &tr_y, &opts)?;
            let (h_mat, h_vec) = design_system(&model, &ho_x, &ho_y);
            score += 0.5 * (model.alpha.transpose() * &h_mat * &model.alpha)[(0, 0)]
                - h_vec.dot(&model.alpha);
        }
        if score < best_score {
            best_score = score;
            best_scale = scale;
        }
    }
    Ok(best_scale)
}
