use crate::{select_centers, median_bandwidth, CenterMethod, DensityError};
use nalgebra::{DMatrix, DVector};

/// Per-block Gaussian kernel widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidths {
    pub x: f64,
    pub y: f64,
}

/// Hyperparameters for [`fit_lscde`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub k: usize,
    pub lambda: f64,
    /// Explicit bandwidths; `None` uses the per-block median-distance
    /// heuristic scaled by `bandwidth_scale`.
    pub bandwidths: Option<Bandwidths>,
    pub bandwidth_scale: f64,
    pub center_method: CenterMethod,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            k: 200,
            lambda: 0.1,
            bandwidths: None,
            bandwidth_scale: 1.0,
            center_method: CenterMethod::Kmeans,
            seed: 0,
        }
    }
}

/// A fitted least-squares conditional density model with product-Gaussian
/// basis functions and nonnegative coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LscdeModel {
    /// k x dim_x center block.
    pub centers_x: DMatrix<f64>,
    /// k x dim_y center block.
    pub centers_y: DMatrix<f64>,
    pub bandwidth_x: f64,
    pub bandwidth_y: f64,
    pub alpha: DVector<f64>,
    pub dim_x: usize,
    pub dim_y: usize,
}

fn row_dist2(m: &DMatrix<f64>, row: usize, p: &[f64]) -> f64 {
    let mut d = 0.0;
    for (j, &x) in p.iter().enumerate() {
        let diff = m[(row, j)] - x;
        d += diff * diff;
    }
    d
}

impl LscdeModel {
    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    /// x-part kernel values for one conditioning point.
    fn x_kernels(&self, x: &[f64]) -> DVector<f64> {
        let inv = 1.0 / (2.0 * self.bandwidth_x * self.bandwidth_x);
        DVector::from_fn(self.k(), |i, _| (-row_dist2(&self.centers_x, i, x) * inv).exp())
    }

    fn y_kernels(&self, y: &[f64]) -> DVector<f64> {
        let inv = 1.0 / (2.0 * self.bandwidth_y * self.bandwidth_y);
        DVector::from_fn(self.k(), |i, _| (-row_dist2(&self.centers_y, i, y) * inv).exp())
    }

    /// Unnormalized model value sum_i alpha_i phi_i(x, y).
    pub fn unnormalized(&self, x: &[f64], y: &[f64]) -> f64 {
        let ex = self.x_kernels(x);
        let ey = self.y_kernels(y);
        (0..self.k()).map(|i| self.alpha[i] * ex[i] * ey[i]).sum()
    }
}

/// Fits the regularized least-squares system alpha = (H + lambda I)^-1 h
/// with the closed-form Gaussian integral for H, then clips coefficients
/// to be nonnegative.
pub fn fit_lscde(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    opts: &FitOptions,
) -> Result<LscdeModel, DensityError> {
    assert_eq!(x.len(), y.len(), "conditioning/target sample count mismatch");
    let n = x.len();
    let k = opts.k.min(n);
    if k == 0 || n == 0 {
        return Err(DensityError::TooManyCenters { k, n });
    }
    assert!(opts.lambda > 0.0, "lambda_reg must be positive");
    let dim_x = x[0].len();
    let dim_y = y[0].len();

    // centers are selected in the joint (x, y) space
    let joint: Vec<Vec<f64>> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a.iter().chain(b.iter()).copied().collect())
        .collect();
    let centers = select_centers(&joint, k, opts.center_method, opts.seed)?;
    let centers_x = DMatrix::from_fn(k, dim_x, |i, j| centers[i][j]);
    let centers_y = DMatrix::from_fn(k, dim_y, |i, j| centers[i][dim_x + j]);

    let bw = match opts.bandwidths {
        Some(bw) => bw,
        None => Bandwidths {
            x: median_bandwidth(x) * opts.bandwidth_scale,
            y: median_bandwidth(y) * opts.bandwidth_scale,
        },
    };
    assert!(bw.x > 0.0 && bw.y > 0.0, "bandwidths must be positive");

    let mut model = LscdeModel {
        centers_x,
        centers_y,
        bandwidth_x: bw.x,
        bandwidth_y: bw.y,
        alpha: DVector::zeros(k),
        dim_x,
        dim_y,
    };

    let (h_mat, h_vec) = design_system(&model, x, y);
    let reg = &h_mat + DMatrix::identity(k, k) * opts.lambda;
    let chol = reg.cholesky().ok_or(DensityError::SingularSystem)?;
    let mut alpha = chol.solve(&h_vec);
    for a in alpha.iter_mut() {
        if *a < 0.0 {
            *a = 0.0;
        }
    }
    if alpha.iter().all(|&a| a == 0.0) {
        return Err(DensityError::DegenerateFit);
    }
    model.alpha = alpha;
    Ok(model)
}

/// Builds the least-squares system for a model geometry on a sample set:
/// H_ij = G_ij * (1/n) sum_l ex_i(x_l) ex_j(x_l) with the closed-form
/// Gaussian y-integral G, and h_i = (1/n) sum_l phi_i(x_l, y_l).
pub(crate) fn design_system(
    model: &LscdeModel,
    x: &[Vec<f64>],
    y: &[Vec<f64>],
) -> (DMatrix<f64>, DVector<f64>) {
    let n = x.len();
    let k = model.k();
    let mut e = DMatrix::zeros(n, k);
    let inv_x = 1.0 / (2.0 * model.bandwidth_x * model.bandwidth_x);
    for l in 0..n {
        for i in 0..k {
            e[(l, i)] = (-row_dist2(&model.centers_x, i, &x[l]) * inv_x).exp();
        }
    }

    // y-integral of phi_i * phi_j in closed form
    let sy2 = model.bandwidth_y * model.bandwidth_y;
    let norm = (std::f64::consts::PI * sy2).powf(model.dim_y as f64 / 2.0);
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let mut d2 = 0.0;
            for c in 0..model.dim_y {
                let diff = model.centers_y[(i, c)] - model.centers_y[(j, c)];
                d2 += diff * diff;
            }
            let val = norm * (-d2 / (4.0 * sy2)).exp();
            g[(i, j)] = val;
            g[(j, i)] = val;
        }
    }

    let mut h_mat = (e.transpose() * &e) / n as f64;
    h_mat.component_mul_assign(&g);

    let inv_y = 1.0 / (2.0 * sy2);
    let mut h_vec = DVector::zeros(k);
    for l in 0..n {
        for i in 0..k {
            h_vec[i] += e[(l, i)] * (-row_dist2(&model.centers_y, i, &y[l]) * inv_y).exp();
        }
    }
    h_vec /= n as f64;
    (h_mat, h_vec)
}

/// Log of the closed-form normalizer integral(sum_i alpha_i phi_i(x, y')) dy'
/// = (2 pi sy^2)^(dy/2) * sum_i alpha_i ex_i(x).
pub fn log_y_normalizer(model: &LscdeModel, x: &[f64]) -> f64 {
    let ex = model.x_kernels(x);
    let s: f64 = (0..model.k()).map(|i| model.alpha[i] * ex[i]).sum();
    let sy2 = model.bandwidth_y * model.bandwidth_y;
    (model.dim_y as f64 / 2.0) * (2.0 * std::f64::consts::PI * sy2).ln() + s.ln()
}

/// Normalized conditional density of y given x. The normalizer is floored
/// at 1e-300; queries far outside the training hull are unreliable.
pub fn conditional_density(model: &LscdeModel, x: &[f64], y: &[f64]) -> Result<f64, DensityError> {
    if x.len() != model.dim_x {
        return Err(DensityError::DimensionMismatch {
            expected: model.dim_x,
            found: x.len(),
        });
    }
    if y.len() != model.dim_y {
        return Err(DensityError::DimensionMismatch {
            expected: model.dim_y,
            found: y.len(),
        });
    }
    let ex = model.x_kernels(x);
    let ey = model.y_kernels(y);
    let mut num = 0.0;
    let mut sum_x = 0.0;
    for i in 0..model.k() {
        let axe = model.alpha[i] * ex[i];
        sum_x += axe;
        num += axe * ey[i];
    }
    let sy2 = model.bandwidth_y * model.bandwidth_y;
    let den = (2.0 * std::f64::consts::PI * sy2).powf(model.dim_y as f64 / 2.0) * sum_x;
    Ok(num / den.max(1e-300))
}
