use cmdp_core::Rng;
use rand::Rng as _;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding. Runs until the largest
/// center shift is below 1e-6 or for 100 iterations. Deterministic for a
/// fixed RNG state. Empty clusters keep their previous center.
pub fn kmeans(samples: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    assert!(k >= 1 && k <= samples.len());
    let mut centers = plus_plus_seed(samples, k, rng);
    let mut assignment = vec![0usize; samples.len()];

    for _ in 0..100 {
        for (i, p) in samples.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centers.iter().enumerate() {
                let d = dist2(p, c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            assignment[i] = best;
        }
        let dim = samples[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in samples.iter().enumerate() {
            let j = assignment[i];
            counts[j] += 1;
            for (s, x) in sums[j].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut max_shift = 0.0f64;
        for j in 0..k {
            if counts[j] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            max_shift = max_shift.max(dist2(&new, &centers[j]).sqrt());
            centers[j] = new;
        }
        if max_shift < 1e-6 {
            break;
        }
    }
    centers
}

fn plus_plus_seed(samples: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut centers = Vec::with_capacity(k);
    centers.push(samples[rng.gen_range(0..samples.len())].clone());
    let mut d2: Vec<f64> = samples.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // all remaining mass at the chosen centers; pick uniformly
            rng.gen_range(0..samples.len())
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut idx = 0;
            for (i, &d) in d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    idx = i;
                    break;
                }
            }
            idx
        };
        centers.push(samples[next].clone());
        for (i, p) in samples.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, centers.last().unwrap()));
        }
    }
    centers
}
