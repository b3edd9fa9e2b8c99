use cmdp_core::Rng;
use rand::Rng as _;

/// Fully connected network with tanh hidden layers and a linear output,
/// stored as one flat parameter vector (per layer: row-major weights,
/// then biases).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
}

/// Layer activations kept for backpropagation; `acts[0]` is the input,
/// `acts[l+1]` the output of layer l (post-tanh except the last).
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub acts: Vec<Vec<f64>>,
}

/// Four-lane dot product; the unrolled accumulators break the serial
/// float dependency chain that otherwise caps throughput.
fn dot(w: &[f64], x: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let mut wc = w.chunks_exact(4);
    let mut xc = x.chunks_exact(4);
    for (a, b) in (&mut wc).zip(&mut xc) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (a, b) in wc.remainder().iter().zip(xc.remainder()) {
        s += a * b;
    }
    s
}

pub fn n_params(sizes: &[usize]) -> usize {
    sizes
        .windows(2)
        .map(|w| w[0] * w[1] + w[1])
        .sum()
}

impl Mlp {
    /// Xavier-uniform initialization.
    pub fn new(sizes: Vec<usize>, rng: &mut Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output layers");
        let mut params = Vec::with_capacity(n_params(&sizes));
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.gen_range(-bound..bound));
            }
            params.extend(std::iter::repeat(0.0).take(fan_out));
        }
        Mlp { sizes, params }
    }

    pub fn zeros(sizes: Vec<usize>) -> Self {
        let params = vec![0.0; n_params(&sizes)];
        Mlp { sizes, params }
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    fn layer_forward(
        &self,
        params: &[f64],
        offset: usize,
        layer: usize,
        input: &[f64],
        last: bool,
    ) -> Vec<f64> {
        let (n_in, n_out) = (self.sizes[layer], self.sizes[layer + 1]);
        let w = &params[offset..offset + n_in * n_out];
        let b = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
        (0..n_out)
            .map(|o| {
                let z = b[o] + dot(&w[o * n_in..(o + 1) * n_in], input);
                if last {
                    z
                } else {
                    z.tanh()
                }
            })
            .collect()
    }

    /// Forward pass using an arbitrary parameter vector of the same
    /// architecture (used for the target copy).
    pub fn forward_with(&self, params: &[f64], x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(params.len(), self.params.len());
        let mut h = x.to_vec();
        let mut offset = 0;
        for l in 0..self.n_layers() {
            let last = l + 1 == self.n_layers();
            h = self.layer_forward(params, offset, l, &h, last);
            offset += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }
        h
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_with(&self.params, x)
    }

    pub fn forward_cached(&self, x: &[f64]) -> ForwardCache {
        let mut acts = vec![x.to_vec()];
        let mut offset = 0;
        for l in 0..self.n_layers() {
            let last = l + 1 == self.n_layers();
            let h = self.layer_forward(&self.params, offset, l, &acts[l], last);
            acts.push(h);
            offset += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }
        ForwardCache { acts }
    }

    /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
    pub fn backward(&self, cache: &ForwardCache, dout: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        let mut offsets = Vec::with_capacity(self.n_layers());
        let mut off = 0;
        for l in 0..self.n_layers() {
            offsets.push(off);
            off += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }
        let mut delta = dout.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input = &cache.acts[l];
            for o in 0..n_out {
                let d = delta[o];
                let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                for (g, &xi) in row.iter_mut().zip(input.iter()) {
                    *g += d * xi;
                }
                grad[off + n_in * n_out + o] += d;
            }
            if l > 0 {
                let w = &self.params[off..off + n_in * n_out];
                let mut prev = vec![0.0; n_in];
                for o in 0..n_out {
                    let d = delta[o];
                    let row = &w[o * n_in..(o + 1) * n_in];
                    for (p, &wi) in prev.iter_mut().zip(row) {
                        *p += wi * d;
                    }
                }
                // tanh'(z) from the stored activation
                for (p, a) in prev.iter_mut().zip(&cache.acts[l][..]) {
                    *p *= 1.0 - a * a;
                }
                delta = prev;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_diff(net: &Mlp, x: &[f64], dout: &[f64]) -> Vec<f64> {
        // scalar objective dout . f(x)
        let h = 1e-5;
        let mut grad = vec![0.0; net.params.len()];
        let mut pert = net.clone();
        for j in 0..net.params.len() {
            pert.params[j] = net.params[j] + h;
            let up: f64 = pert.forward(x).iter().zip(dout).map(|(a, b)| a * b).sum();
            pert.params[j] = net.params[j] - h;
            let dn: f64 = pert.forward(x).iter().zip(dout).map(|(a, b)| a * b).sum();
            pert.params[j] = net.params[j];
            grad[j] = (up - dn) / (2.0 * h);
        }
        grad
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(vec![3, 8, 5]);
        assert_eq!(net.forward(&[0.3, -0.7, 1.1]), vec![0.0; 5]);
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = cmdp_core::rng_from_seed(0);
        let net = Mlp::new(vec![3, 16, 5], &mut rng);
        let x = [0.1, 0.2, -0.5];
        assert_eq!(net.forward(&x), net.forward(&x));
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = cmdp_core::rng_from_seed(1);
        for trial in 0..3 {
            let net = Mlp::new(vec![3, 8, 6, 5], &mut rng);
            let x = [0.4 - trial as f64 * 0.3, -0.2, 0.9];
            let dout = [0.7, -1.3, 0.2, 0.5, -0.8];
            let cache = net.forward_cached(&x);
            let mut grad = vec![0.0; net.params.len()];
            net.backward(&cache, &dout, &mut grad);
            let fd = finite_diff(&net, &x, &dout);
            for (j, (&g, &f)) in grad.iter().zip(&fd).enumerate() {
                let denom = f.abs().max(1e-6);
                assert!(
                    (g - f).abs() / denom <= 1e-4,
                    "param {j}: analytic {g} vs fd {f}"
                );
            }
        }
    }

    #[test]
    fn backward_accumulates() {
        let mut rng = cmdp_core::rng_from_seed(2);
        let net = Mlp::new(vec![2, 4, 3], &mut rng);
        let cache = net.forward_cached(&[0.5, -0.5]);
        let dout = [1.0, 0.0, -1.0];
        let mut once = vec![0.0; net.params.len()];
        net.backward(&cache, &dout, &mut once);
        let mut twice = vec![0.0; net.params.len()];
        net.backward(&cache, &dout, &mut twice);
        net.backward(&cache, &dout, &mut twice);
        for (a, b) in once.iter().zip(&twice) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cached_forward_agrees_with_plain() {
        let mut rng = cmdp_core::rng_from_seed(3);
        let net = Mlp::new(vec![3, 10, 5], &mut rng);
        let x = [0.3, 0.1, -0.9];
        assert_eq!(net.forward(&x), *net.forward_cached(&x).acts.last().unwrap());
    }
}
