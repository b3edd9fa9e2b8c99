use cmdp_core::*;
use deconf_weights::*;
use env_pendulum::{generate_offline_dataset, ScriptedPolicy};
use std::time::Instant;

fn cfg(scenario: Scenario, p_fail: Option<f64>, odds: f64, v_t: Option<f64>, irr: f64, kind: RatioKind, n: usize) -> ExperimentConfig {
    ExperimentConfig {
        scenario,
        env: EnvParams { p_fail, odds, v_t, irrational_p: irr },
        dataset_size: n,
        density: DensityConfig::default(),
        algo: Algo::Dqn,
        mode: DeconfMode::Reweight,
        ratio_kind: kind,
        total_steps: 0,
        eval_interval: 1000,
        eval_episodes: 20,
        rl: RlParams::default(),
        seeds: vec![0],
        clip_bounds: (0.1, 10.0),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

fn scan(label: &str, c: &ExperimentConfig, scales: &[f64]) {
    let ds = generate_offline_dataset(c, &ScriptedPolicy::default(), 0).unwrap();
    for &s in scales {
        let t0 = Instant::now();
        let mut opts = FitBundleOptions {
            density: c.density.clone(),
            seed: 17,
            ..Default::default()
        };
        opts.density.bandwidth_scale = s;
        let bundle = fit_bundle(&ds, c.ratio_kind, &opts).unwrap();
        let w = estimate_weights(&ds, &bundle, c.clip_bounds).unwrap();
        let var = w.raw.iter().map(|v| (v - w.mean_raw).powi(2)).sum::<f64>() / w.raw.len() as f64;
        // signal probe: mean weight on transitions whose reward carries the
        // bonus AND whose intended action is the speed-up irrational
        // signature (max torque along v at |v| <= v_T); these are the
        // spurious rows the ratio should downweight below average
        let mut sus_sum = 0.0;
        let mut sus_n = 0;
        let mut bonus_sum = 0.0;
        let mut bonus_n = 0;
        for (t, &d) in ds.transitions.iter().zip(&w.raw) {
            let theta = t.s.y.atan2(t.s.x);
            let m = t.m.unwrap_or(t.a);
            let tw = {
                // classic cost term recomputed from the observed state
                let t2 = {
                    let mut x = theta;
                    while x > std::f64::consts::PI { x -= 2.0 * std::f64::consts::PI; }
                    while x < -std::f64::consts::PI { x += 2.0 * std::f64::consts::PI; }
                    x
                };
                let tq = torque_of(m);
                -(t2 * t2 + 0.1 * t.s.v * t.s.v + 0.001 * tq * tq)
            };
            let r_o = tw;
            let bonus = t.r - r_o > 5.0;
            if bonus {
                bonus_sum += d;
                bonus_n += 1;
                let sig = torque_of(t.a) == 2.0 * t.s.v.signum();
                if sig && t.s.v.abs() <= 1.0 {
                    sus_sum += d;
                    sus_n += 1;
                }
            }
        }
        println!(
            "{label} scale={s:<4} mean={:.4} median={:.4} std={:.4} clip_frac={:.4} warn={} bonus_mean={:.4} sus_mean={:.4} (n={sus_n}) t={:.1}s",
            w.mean_raw,
            median(w.raw.clone()),
            var.sqrt(),
            w.fraction_clipped(),
            w.quality_warning(),
            bonus_sum / bonus_n.max(1) as f64,
            sus_sum / sus_n.max(1) as f64,
            t0.elapsed().as_secs_f64()
        );
    }
}

fn main() {
    let n = 20_000;
    let emo = cfg(Scenario::EmotionalPendulum, Some(0.2), 4.0, Some(1.0), 0.7, RatioKind::RewardOnly, n);
    scan("emo-reward", &emo, &[0.15, 0.2, 0.25, 0.3]);
    let windy = cfg(Scenario::WindyPendulum, Some(0.1), 2.5, None, 0.9, RatioKind::Full, n);
    scan("windy-full", &windy, &[0.15, 0.2, 0.25, 0.3]);
    let star = cfg(Scenario::EmotionalPendulumStar, None, 4.0, Some(1.0), 0.7, RatioKind::Backdoor, n);
    scan("star-backdoor", &star, &[1.0]);
}
