use cmdp_core::*;
use harness_cli::run_pipeline;
use std::path::Path;
use std::time::Instant;

fn cfg(algo: Algo, mode: DeconfMode) -> ExperimentConfig {
    ExperimentConfig {
        scenario: Scenario::EmotionalPendulum,
        env: EnvParams { p_fail: Some(0.2), odds: 4.0, v_t: Some(1.0), irrational_p: 0.7 },
        dataset_size: 50_000,
        density: DensityConfig { bandwidth_scale: 0.3, ..Default::default() },
        algo,
        mode,
        ratio_kind: RatioKind::RewardOnly,
        total_steps: 30_000,
        eval_interval: 1000,
        eval_episodes: 20,
        rl: RlParams::default(),
        seeds: vec![0],
        clip_bounds: (0.1, 10.0),
    }
}

fn main() {
    let cache = Path::new("/tmp/pilot-cache");
    let args: Vec<String> = std::env::args().collect();
    let cells: Vec<(Algo, DeconfMode)> = match args.get(1).map(|s| s.as_str()) {
        Some("dqn") => vec![
            (Algo::Dqn, DeconfMode::None),
            (Algo::Dqn, DeconfMode::Reweight),
        ],
        Some("cql") => vec![
            (Algo::Cql, DeconfMode::None),
            (Algo::Cql, DeconfMode::Reweight),
        ],
        Some("rest") => vec![
            (Algo::Bc, DeconfMode::None),
            (Algo::Dqn, DeconfMode::Resample),
            (Algo::Cql, DeconfMode::Resample),
        ],
        Some("cqlw") => vec![
            (Algo::Cql, DeconfMode::None),
            (Algo::Cql, DeconfMode::Reweight),
        ],
        _ => vec![(Algo::Dqn, DeconfMode::None)],
    };
    let clean = args.iter().any(|a| a == "clean");
    let cql_weight: Option<f64> = args.get(2).map(|s| s.parse().unwrap());
    let lr: Option<f64> = args.get(3).map(|s| s.parse().unwrap());
    let steps: Option<usize> = args.get(4).map(|s| s.parse().unwrap());
    let seeds: Vec<u64> = match args.get(5).map(|s| s.as_str()) {
        Some("s0") => vec![0],
        _ => vec![0, 1, 2],
    };
    for (algo, mode) in cells {
        for &seed in &seeds {
            let t0 = Instant::now();
            let mut c = cfg(algo, mode);
            if let Some(w) = cql_weight {
                c.rl.cql_weight = w;
            }
            if let Some(lr) = lr {
                c.rl.learning_rate = lr;
            }
            if let Some(steps) = steps {
                c.total_steps = steps;
            }
            if clean {
                c.env.odds = 1e6;
                c.env.irrational_p = 0.0;
            }
            c.seeds = vec![seed];
            match run_pipeline(&c, Some(cache)) {
                Ok((_, cell, _)) => println!(
                    "{} {} seed={seed}: best={:.1} final={:.1} t={:.0}s",
                    algo.as_str(),
                    mode.as_str(),
                    cell.best.unwrap_or(f64::NAN),
                    cell.last.unwrap_or(f64::NAN),
                    t0.elapsed().as_secs_f64()
                ),
                Err(e) => println!("{} {} seed={seed}: ERROR {e}", algo.as_str(), mode.as_str()),
            }
        }
    }
}
