use crate::mlp::Mlp;
use crate::RlError;
use cmdp_core::{Rng, StateVec, N_ACTIONS};
use std::io::Write as _;
use std::path::Path;

pub const DEFAULT_HIDDEN: [usize; 2] = [64, 64];

/// Network input for a state. The angular velocity spans [-8, 8] while
/// the position pair lies on the unit circle; feeding v raw saturates
/// the first tanh layer, so it is scaled down to the same range.
pub fn state_features(s: &StateVec) -> [f64; 3] {
    [s.x, s.y, s.v / 8.0]
}

fn default_sizes() -> Vec<usize> {
    let mut s = vec![3];
    s.extend(DEFAULT_HIDDEN);
    s.push(N_ACTIONS);
    s
}

/// Q-network with a lagged target copy of its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct QApproximator {
    pub net: Mlp,
    pub target_params: Vec<f64>,
}

impl QApproximator {
    pub fn new(sizes: Vec<usize>, rng: &mut Rng) -> Self {
        let net = Mlp::new(sizes, rng);
        let target_params = net.params.clone();
        QApproximator { net, target_params }
    }

    pub fn with_default_arch(rng: &mut Rng) -> Self {
        Self::new(default_sizes(), rng)
    }

    pub fn n_actions(&self) -> usize {
        *self.net.sizes.last().unwrap()
    }

    pub fn forward(&self, s: &StateVec) -> Vec<f64> {
        self.net.forward(&state_features(s))
    }

    pub fn forward_target(&self, s: &StateVec) -> Vec<f64> {
        self.net.forward_with(&self.target_params, &state_features(s))
    }

    /// Copies the online parameters into the target slot; idempotent.
    pub fn sync_target(&mut self) {
        self.target_params.copy_from_slice(&self.net.params);
    }

    pub fn greedy_action(&self, s: &StateVec) -> usize {
        argmax(&self.forward(s))
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Softmax policy over the discrete action set.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyHead {
    pub net: Mlp,
}

impl PolicyHead {
    pub fn new(sizes: Vec<usize>, rng: &mut Rng) -> Self {
        PolicyHead {
            net: Mlp::new(sizes, rng),
        }
    }

    pub fn with_default_arch(rng: &mut Rng) -> Self {
        Self::new(default_sizes(), rng)
    }

    pub fn logits(&self, s: &StateVec) -> Vec<f64> {
        self.net.forward(&state_features(s))
    }

    /// Normalized exponential of the logits; strictly positive and sums
    /// to 1.
    pub fn probs(&self, s: &StateVec) -> Vec<f64> {
        softmax(&self.logits(s))
    }

    pub fn greedy_action(&self, s: &StateVec) -> usize {
        argmax(&self.logits(s))
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.iter().map(|e| e / total).collect()
}

pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Writes a flat parameter vector with its architecture header.
pub fn save_params(net: &Mlp, tag: &str, path: &Path) -> Result<(), RlError> {
    let mut out = String::new();
    out.push_str(&format!("# {tag} v1\n"));
    let sizes: Vec<String> = net.sizes.iter().map(|s| s.to_string()).collect();
    out.push_str(&format!("# sizes={}\n", sizes.join(",")));
    for p in &net.params {
        out.push_str(&format!("{:.16e}\n", p));
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load_params(tag: &str, path: &Path) -> Result<Mlp, RlError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or("");
    if magic != format!("# {tag} v1") {
        return Err(RlError::BadParamFile(format!("bad magic {magic:?}")));
    }
    let sizes_line = lines
        .next()
        .ok_or_else(|| RlError::BadParamFile("missing sizes".into()))?;
    let sizes: Vec<usize> = sizes_line
        .trim_start_matches("# sizes=")
        .split(',')
        .map(|t| {
            t.parse()
                .map_err(|e| RlError::BadParamFile(format!("sizes: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let params: Vec<f64> = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|e| RlError::BadParamFile(format!("line {}: {e}", i + 3)))
        })
        .collect::<Result<_, _>>()?;
    let expect = crate::mlp::n_params(&sizes);
    if params.len() != expect {
        return Err(RlError::BadParamFile(format!(
            "expected {expect} parameters, found {}",
            params.len()
        )));
    }
    Ok(Mlp { sizes, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sync_makes_target_equal_and_is_idempotent() {
        let mut rng = cmdp_core::rng_from_seed(0);
        let mut q = QApproximator::with_default_arch(&mut rng);
        let s = StateVec::new(0.2, -0.9, 1.0);
        // freshly initialized target is the initialization copy
        assert_eq!(q.forward(&s), q.forward_target(&s));
        q.net.params[0] += 1.0;
        assert_ne!(q.forward(&s), q.forward_target(&s));
        q.sync_target();
        assert_eq!(q.forward(&s), q.forward_target(&s));
        let snapshot = q.target_params.clone();
        q.sync_target();
        assert_eq!(snapshot, q.target_params);
    }

    #[test]
    fn policy_outputs_are_a_distribution() {
        let mut rng = cmdp_core::rng_from_seed(1);
        let pol = PolicyHead::with_default_arch(&mut rng);
        let p = pol.probs(&StateVec::new(0.5, 0.5, -3.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = softmax(&[1.0, 2.0, 3.0]);
        let b = softmax(&[101.0, 102.0, 103.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn logsumexp_handles_large_values() {
        let v = logsumexp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2.0f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn params_round_trip() {
        let mut rng = cmdp_core::rng_from_seed(2);
        let q = QApproximator::new(vec![3, 8, 5], &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.txt");
        save_params(&q.net, "q-approximator", &path).unwrap();
        let back = load_params("q-approximator", &path).unwrap();
        assert_eq!(q.net, back);
        assert!(load_params("policy-head", &path).is_err());
    }

    #[test]
    fn wrong_parameter_count_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.txt");
        std::fs::write(&path, "# q-approximator v1\n# sizes=2,3\n1.0\n2.0\n").unwrap();
        assert!(matches!(
            load_params("q-approximator", &path),
            Err(RlError::BadParamFile(_))
        ));
    }
}
