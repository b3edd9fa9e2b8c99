/// Per-coordinate affine map to zero mean and unit variance. Ratios of
/// conditional densities are invariant to this change of variables (the
/// Jacobians cancel), while kernel bandwidths become comparable across
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(samples: &[Vec<f64>]) -> Self {
        assert!(!samples.is_empty());
        let dim = samples[0].len();
        let n = samples.len() as f64;
        let mut mean = vec![0.0; dim];
        for s in samples {
            for (m, x) in mean.iter_mut().zip(s) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for s in samples {
            for j in 0..dim {
                let d = s[j] - mean[j];
                var[j] += d * d;
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt().max(1e-9)).collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}
