//! Acceptance gate: one test per release criterion, each printing a
//! single pass line (run with `--nocapture` to see them on success).
//! Numbered modules keep the report order stable.

use cmdp_core::{
    rng_from_seed, DensityConfig, OfflineDataset, RatioKind, Scenario, StateVec, Transition,
};
use deconf_weights::{
    estimate_weights, exact_ratio_oracle, fit_bundle, generate_tabular_dataset,
    interventional_outcome, postprocess_weights, resample_distribution, FitBundleOptions,
    TabularCmdp, WeightVector,
};
use rand::Rng as _;
use std::sync::OnceLock;
use std::time::Instant;

const N_TAB: usize = 50_000;

fn pass(criterion: usize, detail: &str) {
    println!("criterion {criterion}: PASS ({detail})");
}

/// Frozen bandwidth scales from the calibration scan.
fn tabular_scale(kind: RatioKind) -> f64 {
    match kind {
        RatioKind::Full | RatioKind::RewardOnly => 0.4,
        RatioKind::NextStateOnly => 0.6,
        RatioKind::Backdoor => 1.0,
    }
}

fn tabular_options(scale: f64) -> FitBundleOptions {
    FitBundleOptions {
        n_actions: 2,
        density: DensityConfig {
            k: 200,
            bandwidth_scale: scale,
            policy_cells: 20,
            ..DensityConfig::default()
        },
        ..FitBundleOptions::default()
    }
}

fn estimate_tabular(ds: &OfflineDataset, kind: RatioKind) -> WeightVector {
    let bundle = fit_bundle(ds, kind, &tabular_options(tabular_scale(kind))).unwrap();
    estimate_weights(ds, &bundle, (0.0, f64::INFINITY)).unwrap()
}

fn shared_tabular() -> &'static (TabularCmdp, OfflineDataset) {
    static TAB: OnceLock<(TabularCmdp, OfflineDataset)> = OnceLock::new();
    TAB.get_or_init(|| {
        let c = TabularCmdp::two_state_example();
        let ds = generate_tabular_dataset(&c, N_TAB, 0).unwrap();
        (c, ds)
    })
}

fn shared_estimated_full() -> &'static WeightVector {
    static EST: OnceLock<WeightVector> = OnceLock::new();
    EST.get_or_init(|| {
        let (_, ds) = shared_tabular();
        estimate_tabular(ds, RatioKind::Full)
    })
}

fn emotional_config(irrational_p: f64, n: usize) -> cmdp_core::ExperimentConfig {
    cmdp_core::ExperimentConfig {
        scenario: Scenario::EmotionalPendulum,
        env: cmdp_core::EnvParams {
            p_fail: Some(0.2),
            odds: 4.0,
            v_t: Some(1.0),
            irrational_p,
        },
        dataset_size: n,
        density: DensityConfig {
            bandwidth_scale: 0.3,
            ..DensityConfig::default()
        },
        algo: cmdp_core::Algo::Dqn,
        mode: cmdp_core::DeconfMode::Reweight,
        ratio_kind: RatioKind::RewardOnly,
        total_steps: 30_000,
        eval_interval: 1000,
        eval_episodes: 20,
        rl: cmdp_core::RlParams::default(),
        seeds: vec![0, 1, 2],
        clip_bounds: (0.1, 10.0),
    }
}

#[test]
fn criterion_01_weight_means() {
    let t0 = Instant::now();
    let (c, ds) = shared_tabular();
    let oracle = exact_ratio_oracle(c, RatioKind::Full).unwrap();
    let raw: Vec<f64> = ds.transitions.iter().map(|t| oracle(t)).collect();
    let w = postprocess_weights(raw, 0.0, f64::INFINITY).unwrap();
    assert!(
        (w.mean_raw - 1.0).abs() <= 1e-12,
        "oracle mean {:.15}",
        w.mean_raw
    );

    let est = shared_estimated_full();
    assert!(
        (est.mean_raw - 1.0).abs() <= 0.15,
        "estimated mean {:.4}",
        est.mean_raw
    );
    let tab_elapsed = t0.elapsed().as_secs_f64();
    assert!(tab_elapsed < 120.0, "tabular instance took {tab_elapsed:.0}s");

    let t1 = Instant::now();
    let cfg = emotional_config(0.7, 20_000);
    let pend = env_pendulum::generate_offline_dataset(
        &cfg,
        &env_pendulum::ScriptedPolicy::default(),
        0,
    )
    .unwrap();
    let opts = FitBundleOptions {
        density: cfg.density.clone(),
        seed: 17,
        ..FitBundleOptions::default()
    };
    let bundle = fit_bundle(&pend, RatioKind::RewardOnly, &opts).unwrap();
    let wp = estimate_weights(&pend, &bundle, cfg.clip_bounds).unwrap();
    assert!(
        (wp.mean_raw - 1.0).abs() <= 0.25,
        "pendulum mean {:.4}",
        wp.mean_raw
    );
    let pend_elapsed = t1.elapsed().as_secs_f64();
    assert!(pend_elapsed < 120.0, "pendulum instance took {pend_elapsed:.0}s");

    pass(
        1,
        &format!(
            "oracle mean 1 exactly, estimated {:.3}, pendulum {:.3}; {:.0}s + {:.0}s",
            est.mean_raw, wp.mean_raw, tab_elapsed, pend_elapsed
        ),
    );
}

#[test]
fn criterion_02_oracle_agreement() {
    let t0 = Instant::now();
    let (c, ds) = shared_tabular();
    let mut fracs = Vec::new();
    for kind in [
        RatioKind::Full,
        RatioKind::RewardOnly,
        RatioKind::NextStateOnly,
        RatioKind::Backdoor,
    ] {
        let w = if kind == RatioKind::Full {
            shared_estimated_full().clone()
        } else {
            estimate_tabular(ds, kind)
        };
        let oracle = exact_ratio_oracle(c, kind).unwrap();
        let ok = ds
            .transitions
            .iter()
            .zip(&w.raw)
            .filter(|(t, &est)| {
                let truth = oracle(t);
                (est - truth).abs() <= 0.10 * truth.abs()
            })
            .count();
        let frac = ok as f64 / ds.len() as f64;
        assert!(frac >= 0.90, "{kind:?}: only {frac:.3} within 10%");
        fracs.push(format!("{kind:?} {frac:.3}"));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.0}s");
    pass(2, &format!("{}; {elapsed:.0}s", fracs.join(", ")));
}

#[test]
fn criterion_03_reweighted_unbiasedness() {
    let t0 = Instant::now();
    let c = TabularCmdp::two_state_example();
    let ds = generate_tabular_dataset(&c, N_TAB, 11).unwrap();
    let oracle = exact_ratio_oracle(&c, RatioKind::Full).unwrap();
    let f = |s2: f64, r: f64| r + 0.5 * s2;
    let mut worst_z = 0.0f64;
    for s in 0..2usize {
        for a in 0..2usize {
            let intv = interventional_outcome(&c, s, a);
            let nr = c.n_r();
            let exact: f64 = (0..c.n_s * nr)
                .map(|i| intv[i] * f((i / nr) as f64, c.rewards[i % nr]))
                .sum();
            let vals: Vec<f64> = ds
                .transitions
                .iter()
                .filter(|t| t.s.x as usize == s && t.a == a)
                .map(|t| oracle(t) * f(t.s_next.x, t.r))
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            let se = (var / n).sqrt();
            let z = (mean - exact).abs() / se;
            assert!(z <= 3.0, "(s={s},a={a}): |z| = {z:.2}");
            worst_z = worst_z.max(z);
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "took {elapsed:.0}s");
    pass(3, &format!("worst |z| = {worst_z:.2} of 3.0; {elapsed:.0}s"));
}

#[test]
fn criterion_04_resample_matches_reweight() {
    use cmdp_core::{BatchSampler, Sampler};
    use offline_rl::{loss_cql, QApproximator};
    let t0 = Instant::now();
    let (c, ds) = shared_tabular();
    let oracle = exact_ratio_oracle(c, RatioKind::Full).unwrap();
    let raw: Vec<f64> = ds.transitions.iter().map(|t| oracle(t)).collect();
    let w = postprocess_weights(raw, 0.0, f64::INFINITY).unwrap();

    let mut rng = rng_from_seed(1);
    let q = QApproximator::with_default_arch(&mut rng);
    let per_sample = |t: &Transition| loss_cql(&q, &[t], 0.9, 1.0)[0];

    let mut reweight_mean = 0.0;
    for (t, &d) in ds.transitions.iter().zip(&w.raw) {
        let (f, h) = per_sample(t);
        reweight_mean += d * f + h;
    }
    reweight_mean /= ds.len() as f64;

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
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "took {elapsed:.0}s");
    pass(4, &format!("loss gap {:.2}% of 5%; {elapsed:.0}s", gap * 100.0));
}

/// Small pendulum-shaped dataset for exact trainer comparisons.
fn synthetic_dataset(n: usize) -> OfflineDataset {
    let mut rng = rng_from_seed(0);
    let transitions = (0..n)
        .map(|_| Transition {
            s: StateVec::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-8.0..8.0),
            ),
            a: rng.gen_range(0..5),
            m: Some(rng.gen_range(0..5)),
            u: None,
            s_next: StateVec::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-8.0..8.0),
            ),
            r: rng.gen_range(-10.0..10.0),
            done: false,
        })
        .collect();
    OfflineDataset::new(transitions, Scenario::EmotionalPendulum, "synthetic".into(), 0).unwrap()
}

#[test]
fn criterion_05_no_confounding_degeneracy() {
    use cmdp_core::{Algo, DeconfMode};
    use offline_rl::{train, TrainConfig};
    let t0 = Instant::now();

    let c = TabularCmdp::two_state_unconfounded();
    let mut medians = Vec::new();
    for kind in [
        RatioKind::Full,
        RatioKind::RewardOnly,
        RatioKind::NextStateOnly,
        RatioKind::Backdoor,
    ] {
        let ds = generate_tabular_dataset(&c, N_TAB, 3).unwrap();
        let w = estimate_tabular(&ds, kind);
        let mut sorted = w.raw.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        assert!(
            (0.8..=1.25).contains(&median),
            "{kind:?}: median {median:.4}"
        );
        medians.push(format!("{median:.3}"));
    }

    // d = 1 reweighting reproduces mode-none parameter trajectories
    let ds = synthetic_dataset(400);
    let ones = postprocess_weights(vec![1.0; ds.len()], 0.1, 10.0).unwrap();
    let cfg = |mode| TrainConfig {
        rl: cmdp_core::RlParams {
            target_sync_interval: 50,
            ..cmdp_core::RlParams::default()
        },
        total_steps: 150,
        mode,
    };
    let plain = train(&ds, None, Algo::Dqn, &cfg(DeconfMode::None), 9).unwrap();
    let rw = train(&ds, Some(&ones), Algo::Dqn, &cfg(DeconfMode::Reweight), 9).unwrap();
    assert_eq!(
        plain.q.as_ref().unwrap().net.params,
        rw.q.as_ref().unwrap().net.params,
        "unit-weight reweighting diverged from mode none"
    );
    let elapsed = t0.elapsed().as_secs_f64();
    pass(
        5,
        &format!(
            "medians [{}], unit-weight trajectories bitwise equal; {elapsed:.0}s",
            medians.join(", ")
        ),
    );
}

#[test]
fn criterion_06_gradient_checks() {
    use offline_rl::{
        grad_bc, grad_q, grad_sac_actor, grad_sac_critic, loss_bc, loss_cql, loss_ddqn, loss_dqn,
        loss_sac_discrete, Mlp, PolicyHead, QApproximator, QLoss,
    };
    let t0 = Instant::now();
    let batch_owned = synthetic_dataset(6).transitions;
    let batch: Vec<&Transition> = batch_owned.iter().collect();
    let weights = vec![0.5, 2.0, 1.0, 0.1, 1.3, 0.7];
    let mut worst = 0.0f64;
    let mut fd_check = |params: &mut Vec<f64>, analytic: &[f64], eval: &mut dyn FnMut(&[f64]) -> f64| {
        let h = 1e-5;
        for j in 0..params.len() {
            let orig = params[j];
            params[j] = orig + h;
            let up = eval(params);
            params[j] = orig - h;
            let dn = eval(params);
            params[j] = orig;
            let fd = (up - dn) / (2.0 * h);
            let rel = (analytic[j] - fd).abs() / fd.abs().max(1e-6);
            assert!(rel <= 1e-4, "param {j}: analytic {} vs fd {fd}", analytic[j]);
            worst = worst.max(rel);
        }
    };
    let mut rng = rng_from_seed(2);

    for loss in [QLoss::Dqn, QLoss::Ddqn, QLoss::Cql { cql_weight: 0.7 }] {
        let mut q = QApproximator::new(vec![3, 8, 5], &mut rng);
        q.target_params.iter_mut().for_each(|p| *p += 0.01);
        let (_, grad) = grad_q(&q, &batch, 0.9, loss, Some(&weights));
        let target = q.target_params.clone();
        let sizes = q.net.sizes.clone();
        let mut params = q.net.params.clone();
        fd_check(&mut params, &grad, &mut |p| {
            let q2 = QApproximator {
                net: Mlp {
                    sizes: sizes.clone(),
                    params: p.to_vec(),
                },
                target_params: target.clone(),
            };
            let pairs = match loss {
                QLoss::Dqn => loss_dqn(&q2, &batch, 0.9),
                QLoss::Ddqn => loss_ddqn(&q2, &batch, 0.9),
                QLoss::Cql { cql_weight } => loss_cql(&q2, &batch, 0.9, cql_weight),
            };
            pairs
                .iter()
                .zip(&weights)
                .map(|((f, h), w)| w * f + h)
                .sum::<f64>()
                / batch.len() as f64
        });
    }

    let mut q = QApproximator::new(vec![3, 8, 5], &mut rng);
    q.target_params.iter_mut().for_each(|p| *p += 0.01);
    let policy = PolicyHead::new(vec![3, 8, 5], &mut rng);
    let (_, cg) = grad_sac_critic(&q, &policy, &batch, 0.9, 0.2, Some(&weights));
    let target = q.target_params.clone();
    let sizes = q.net.sizes.clone();
    let mut qparams = q.net.params.clone();
    fd_check(&mut qparams, &cg, &mut |p| {
        let q2 = QApproximator {
            net: Mlp {
                sizes: sizes.clone(),
                params: p.to_vec(),
            },
            target_params: target.clone(),
        };
        let (critic, _) = loss_sac_discrete(&q2, &policy, &batch, 0.9, 0.2);
        critic
            .iter()
            .zip(&weights)
            .map(|((f, h), w)| w * f + h)
            .sum::<f64>()
            / batch.len() as f64
    });

    let (_, ag) = grad_sac_actor(&q, &policy, &batch, 0.2);
    let psizes = policy.net.sizes.clone();
    let mut pparams = policy.net.params.clone();
    fd_check(&mut pparams, &ag, &mut |p| {
        let pol2 = PolicyHead {
            net: Mlp {
                sizes: psizes.clone(),
                params: p.to_vec(),
            },
        };
        let (_, actor) = loss_sac_discrete(&q, &pol2, &batch, 0.9, 0.2);
        actor.iter().map(|(f, h)| f + h).sum::<f64>() / batch.len() as f64
    });

    let policy = PolicyHead::new(vec![3, 8, 5], &mut rng);
    let (_, bg) = grad_bc(&policy, &batch);
    let psizes = policy.net.sizes.clone();
    let mut pparams = policy.net.params.clone();
    fd_check(&mut pparams, &bg, &mut |p| {
        let pol2 = PolicyHead {
            net: Mlp {
                sizes: psizes.clone(),
                params: p.to_vec(),
            },
        };
        loss_bc(&pol2, &batch).iter().map(|(f, _)| f).sum::<f64>() / batch.len() as f64
    });

    pass(
        6,
        &format!(
            "six losses, worst relative error {worst:.1e} of 1e-4; {:.0}s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_10_lscde_consistency() {
    use density_lscde::{conditional_density, fit_lscde, Bandwidths, FitOptions, LscdeModel};
    use rand_distr::{Distribution, Normal};
    let t0 = Instant::now();

    let strip = |n: usize, seed: u64| {
        let mut rng = rng_from_seed(seed);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x: f64 = rng.gen_range(-1.0..1.0);
            xs.push(vec![x]);
            ys.push(vec![x + noise.sample(&mut rng)]);
        }
        (xs, ys)
    };
    let opts = FitOptions {
        k: 100,
        bandwidths: Some(Bandwidths { x: 0.2, y: 0.1 }),
        ..FitOptions::default()
    };
    let analytic = |x: f64, y: f64| {
        let s = 0.1;
        (-(y - x) * (y - x) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    let grid_mse = |m: &LscdeModel| {
        let mut err = 0.0;
        let mut count = 0;
        for i in -4..=4i32 {
            let q = f64::from(i) * 0.2;
            for j in -10..=10i32 {
                let p = q + f64::from(j) * 0.05;
                let d = conditional_density(m, &[q], &[p]).unwrap();
                err += (d - analytic(q, p)).powi(2);
                count += 1;
            }
        }
        err / f64::from(count)
    };

    let mut errors = Vec::new();
    for (n, seed) in [(500usize, 4u64), (2000, 5), (8000, 6)] {
        let (x, y) = strip(n, seed);
        let m = fit_lscde(&x, &y, &opts).unwrap();
        errors.push(grid_mse(&m));
    }
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "errors not decreasing: {errors:?}"
    );

    let (x, y) = strip(2000, 2);
    let m = fit_lscde(&x, &y, &opts).unwrap();
    for &q in &[-0.5, 0.0, 0.7] {
        let mut integral = 0.0;
        let step = 0.005;
        let mut yy = -4.0;
        while yy < 4.0 {
            integral += conditional_density(&m, &[q], &[yy]).unwrap() * step;
            yy += step;
        }
        assert!((integral - 1.0).abs() < 0.01, "x={q}: integral {integral}");
    }
    pass(
        10,
        &format!(
            "grid MSE {:.2e} > {:.2e} > {:.2e}, normalization within 1%; {:.0}s",
            errors[0],
            errors[1],
            errors[2],
            t0.elapsed().as_secs_f64()
        ),
    );
}

/// One cell of the evaluation grids: full experiment config for a single
/// seed, using the frozen per-scenario bandwidth scales.
fn grid_config(
    scenario: Scenario,
    irrational_p: f64,
    algo: cmdp_core::Algo,
    mode: cmdp_core::DeconfMode,
    seed: u64,
) -> cmdp_core::ExperimentConfig {
    use cmdp_core::{EnvParams, ExperimentConfig, RlParams};
    let (env, kind, scale) = match scenario {
        Scenario::EmotionalPendulum => (
            EnvParams { p_fail: Some(0.2), odds: 4.0, v_t: Some(1.0), irrational_p },
            RatioKind::RewardOnly,
            0.3,
        ),
        Scenario::WindyPendulum => (
            EnvParams { p_fail: Some(0.1), odds: 2.5, v_t: None, irrational_p },
            RatioKind::Full,
            0.25,
        ),
        Scenario::EmotionalPendulumStar => (
            EnvParams { p_fail: None, odds: 4.0, v_t: Some(1.0), irrational_p },
            RatioKind::Backdoor,
            1.0,
        ),
        other => panic!("no grid setting for {other:?}"),
    };
    ExperimentConfig {
        scenario,
        env,
        dataset_size: 50_000,
        density: DensityConfig { bandwidth_scale: scale, ..DensityConfig::default() },
        algo,
        mode,
        ratio_kind: kind,
        total_steps: 30_000,
        eval_interval: 1000,
        eval_episodes: 20,
        rl: RlParams::default(),
        seeds: vec![seed],
        clip_bounds: (0.1, 10.0),
    }
}

fn grid_cache() -> std::path::PathBuf {
    let p = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-cache");
    std::fs::create_dir_all(&p).unwrap();
    p
}

/// Per-seed best online returns for one grid cell, via the cached pipeline.
fn seed_bests(mk: impl Fn(u64) -> cmdp_core::ExperimentConfig) -> Vec<f64> {
    let cache = grid_cache();
    [0u64, 1, 2]
        .iter()
        .map(|&seed| {
            let cfg = mk(seed);
            let (_, cell, _) = harness_cli::run_pipeline(&cfg, Some(&cache))
                .unwrap_or_else(|e| panic!("{:?} {:?} seed {seed}: {e}", cfg.algo, cfg.mode));
            cell.best.expect("no eval records")
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn wins(variant: &[f64], baseline: &[f64]) -> usize {
    variant.iter().zip(baseline).filter(|(v, b)| v > b).count()
}

#[test]
fn criterion_07_deconfounding_beats_baselines() {
    use cmdp_core::{Algo, DeconfMode};
    let t0 = Instant::now();
    let mut summary = Vec::new();
    for scenario in [Scenario::EmotionalPendulum, Scenario::WindyPendulum] {
        let irr = if scenario == Scenario::EmotionalPendulum { 0.7 } else { 0.9 };
        let bc = seed_bests(|s| grid_config(scenario, irr, Algo::Bc, DeconfMode::None, s));
        for algo in [Algo::Dqn, Algo::Cql] {
            let plain = seed_bests(|s| grid_config(scenario, irr, algo, DeconfMode::None, s));
            assert!(
                mean(&plain) > mean(&bc),
                "{scenario:?} {algo:?}: {:.1} not above BC {:.1}",
                mean(&plain),
                mean(&bc)
            );
            for mode in [DeconfMode::Reweight, DeconfMode::Resample] {
                let dec = seed_bests(|s| grid_config(scenario, irr, algo, mode, s));
                let w = wins(&dec, &plain);
                assert!(
                    w >= 2,
                    "{scenario:?} {algo:?} {mode:?}: beats plain in only {w}/3 seeds \
                     ({dec:?} vs {plain:?})"
                );
                assert!(
                    mean(&dec) > mean(&bc),
                    "{scenario:?} {algo:?} {mode:?}: {:.1} not above BC {:.1}",
                    mean(&dec),
                    mean(&bc)
                );
                summary.push(format!(
                    "{scenario:?}/{algo:?}/{mode:?} {w}/3, mean {:.0} vs {:.0}",
                    mean(&dec),
                    mean(&plain)
                ));
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 7200.0, "grids took {elapsed:.0}s");
    pass(7, &format!("{}; {elapsed:.0}s", summary.join("; ")));
}

#[test]
fn criterion_08_gap_grows_with_confounding() {
    use cmdp_core::{Algo, DeconfMode};
    let t0 = Instant::now();
    let gap = |irr: f64| {
        let rw = seed_bests(|s| {
            grid_config(Scenario::EmotionalPendulum, irr, Algo::Cql, DeconfMode::Reweight, s)
        });
        let plain = seed_bests(|s| {
            grid_config(Scenario::EmotionalPendulum, irr, Algo::Cql, DeconfMode::None, s)
        });
        mean(&rw) - mean(&plain)
    };
    let low = gap(0.7);
    let high = gap(0.9);
    assert!(high > low, "gap at 0.9 ({high:.1}) not above gap at 0.7 ({low:.1})");
    pass(
        8,
        &format!("CQL gap {low:.1} at 0.7 -> {high:.1} at 0.9; {:.0}s", t0.elapsed().as_secs_f64()),
    );
}

#[test]
fn criterion_09_kmeans_centers_hold_up() {
    use cmdp_core::{Algo, CenterMethod, DeconfMode};
    let t0 = Instant::now();
    let kmeans = seed_bests(|s| {
        grid_config(Scenario::EmotionalPendulum, 0.7, Algo::Dqn, DeconfMode::Reweight, s)
    });
    let random = seed_bests(|s| {
        let mut c =
            grid_config(Scenario::EmotionalPendulum, 0.7, Algo::Dqn, DeconfMode::Reweight, s);
        c.density.center_method = CenterMethod::Random;
        c
    });
    assert!(
        mean(&kmeans) >= mean(&random),
        "k-means {:.1} below random {:.1}",
        mean(&kmeans),
        mean(&random)
    );
    pass(
        9,
        &format!(
            "k-means {:.1} >= random {:.1}; {:.0}s",
            mean(&kmeans),
            mean(&random),
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_11_backdoor_end_to_end() {
    use cmdp_core::{Algo, DeconfMode};
    let t0 = Instant::now();
    let plain = seed_bests(|s| {
        grid_config(Scenario::EmotionalPendulumStar, 0.7, Algo::Dqn, DeconfMode::None, s)
    });
    let rw = seed_bests(|s| {
        grid_config(Scenario::EmotionalPendulumStar, 0.7, Algo::Dqn, DeconfMode::Reweight, s)
    });
    let w = wins(&rw, &plain);
    assert!(w >= 2, "backdoor DQN beats plain in only {w}/3 seeds ({rw:?} vs {plain:?})");
    pass(
        11,
        &format!("backdoor DQN wins {w}/3 ({rw:?} vs {plain:?}); {:.0}s", t0.elapsed().as_secs_f64()),
    );
}
