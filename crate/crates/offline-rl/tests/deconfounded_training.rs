//! Training-level consequences of the deconfounding weights on exactly
//! solvable tabular instances.

use cmdp_core::{Algo, DeconfMode, RlParams};
use deconf_weights::{
    exact_ratio_oracle, generate_tabular_dataset, policy_value, postprocess_weights,
    resample_distribution, TabularCmdp,
};
use offline_rl::{loss_cql, train, QApproximator, TrainConfig};
use cmdp_core::{BatchSampler, RatioKind, Sampler, Transition};

fn oracle_weights(c: &TabularCmdp, ds: &cmdp_core::OfflineDataset) -> deconf_weights::WeightVector {
    let oracle = exact_ratio_oracle(c, RatioKind::Full).unwrap();
    let raw: Vec<f64> = ds.transitions.iter().map(|t| oracle(t)).collect();
    postprocess_weights(raw, 0.0, f64::INFINITY).unwrap()
}

/// With frozen parameters, the mean unweighted loss over resampled
/// batches approaches the weighted uniform mean (the expectations the
/// two training modes minimize).
#[test]
fn resample_matches_reweight_in_expectation() {
    let c = TabularCmdp::two_state_example();
    let ds = generate_tabular_dataset(&c, 50_000, 0).unwrap();
    let w = oracle_weights(&c, &ds);

    let mut rng = cmdp_core::rng_from_seed(1);
    let q = QApproximator::with_default_arch(&mut rng);
    let gamma = 0.9;
    let per_sample = |t: &Transition| {
        let (f, h) = loss_cql(&q, &[t], gamma, 1.0)[0];
        (f, h)
    };

    // exact weighted uniform mean of d*f + h
    let mut reweight_mean = 0.0;
    for (t, &d) in ds.transitions.iter().zip(&w.raw) {
        let (f, h) = per_sample(t);
        reweight_mean += d * f + h;
    }
    reweight_mean /= ds.len() as f64;

    // 500 resampled batches of 256 of the unweighted f + h
    let p = resample_distribution(&w).unwrap();
    let mut sampler = BatchSampler::new(ds.len(), 256, Sampler::Categorical(p), 2).unwrap();
    let mut resample_mean = 0.0;
    let batches = 500;
    for _ in 0..batches {
        for i in sampler.next_batch() {
            let (f, h) = per_sample(&ds.transitions[i]);
            resample_mean += f + h;
        }
    }
    resample_mean /= (batches * 256) as f64;

    let gap = (resample_mean - reweight_mean).abs() / reweight_mean.abs();
    assert!(gap <= 0.05, "relative gap {gap:.4}");
}

/// On the reversal instance the offline conditionals prefer the wrong
/// action; oracle-reweighted training recovers the interventionally
/// better greedy policy while unweighted training does not.
#[test]
fn reweighted_training_improves_online_value() {
    let c = TabularCmdp::two_state_reversal();
    let gamma = 0.9;
    let ds = generate_tabular_dataset(&c, 20_000, 0).unwrap();
    let w = oracle_weights(&c, &ds);
    let cfg = |mode| TrainConfig {
        rl: RlParams {
            gamma,
            learning_rate: 1e-3,
            target_sync_interval: 200,
            ..RlParams::default()
        },
        total_steps: 2_000,
        mode,
    };
    let greedy = |q: &QApproximator| -> Vec<usize> {
        (0..c.n_s)
            .map(|s| {
                let qs = q.forward(&cmdp_core::StateVec::new(s as f64, 0.0, 0.0));
                if qs[1] > qs[0] {
                    1
                } else {
                    0
                }
            })
            .collect()
    };
    for seed in 0..5 {
        let plain = train(&ds, None, Algo::Dqn, &cfg(DeconfMode::None), seed).unwrap();
        let rw = train(&ds, Some(&w), Algo::Dqn, &cfg(DeconfMode::Reweight), seed).unwrap();
        let v_plain = policy_value(&c, &greedy(plain.q.as_ref().unwrap()), gamma);
        let v_rw = policy_value(&c, &greedy(rw.q.as_ref().unwrap()), gamma);
        assert!(
            v_rw > v_plain,
            "seed {seed}: reweighted {v_rw:.4} vs plain {v_plain:.4}"
        );
    }
}
