use crate::{CoreError, Rng};
use rand::Rng as _;

/// How minibatch indices are drawn from a dataset.
#[derive(Debug, Clone)]
pub enum Sampler {
    /// Each index with probability 1/N.
    Uniform,
    /// Index i with the given probability; must sum to 1 within 1e-9.
    Categorical(Vec<f64>),
}

/// Deterministic stream of index batches over `0..n`.
#[derive(Debug)]
pub struct BatchSampler {
    n: usize,
    batch_size: usize,
    /// Cumulative distribution for the categorical case.
    cdf: Option<Vec<f64>>,
    rng: Rng,
}

impl BatchSampler {
    pub fn new(n: usize, batch_size: usize, sampler: Sampler, seed: u64) -> Result<Self, CoreError> {
        assert!(batch_size >= 1, "batch_size must be >= 1");
        assert!(n >= 1, "dataset must be nonempty");
        let cdf = match sampler {
            Sampler::Uniform => None,
            Sampler::Categorical(p) => {
                if p.len() != n {
                    return Err(CoreError::BadDistribution(format!(
                        "has {} entries for {} indices",
                        p.len(),
                        n
                    )));
                }
                if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(CoreError::BadDistribution(
                        "contains a negative or non-finite entry".into(),
                    ));
                }
                let total: f64 = p.iter().sum();
                if total <= 0.0 {
                    return Err(CoreError::BadDistribution("has zero mass".into()));
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(CoreError::BadDistribution(format!(
                        "sums to {total}, expected 1 within 1e-9"
                    )));
                }
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = p
                    .iter()
                    .map(|&x| {
                        acc += x;
                        acc
                    })
                    .collect();
                // guard the binary search against rounding in the tail
                if let Some(last) = cdf.last_mut() {
                    *last = f64::INFINITY;
                }
                Some(cdf)
            }
        };
        Ok(BatchSampler {
            n,
            batch_size,
            cdf,
            rng: crate::rng_from_seed(seed),
        })
    }

    pub fn draw_index(&mut self) -> usize {
        match &self.cdf {
            None => self.rng.gen_range(0..self.n),
            Some(cdf) => {
                let x: f64 = self.rng.gen::<f64>();
                cdf.partition_point(|&c| c <= x)
            }
        }
    }

    pub fn next_batch(&mut self) -> Vec<usize> {
        (0..self.batch_size).map(|_| self.draw_index()).collect()
    }
}

impl Iterator for BatchSampler {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        Some(self.next_batch())
    }
}
