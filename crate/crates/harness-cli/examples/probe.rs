use cmdp_core::*;
use env_pendulum::{online_rollout, ExploratoryPolicy};
use offline_rl::{train_with_callback, TrainConfig};

struct Greedy<'a>(&'a offline_rl::QApproximator);
impl env_pendulum::Policy for Greedy<'_> {
    fn act(&self, s: &StateVec, _rng: &mut Rng) -> usize {
        self.0.greedy_action(s)
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let gamma: f64 = args.get(1).map_or(0.99, |s| s.parse().unwrap());
    let lr: f64 = args.get(2).map_or(1e-3, |s| s.parse().unwrap());
    let sync: usize = args.get(3).map_or(1000, |s| s.parse().unwrap());
    let algo = match args.get(4).map(|s| s.as_str()) {
        Some("ddqn") => Algo::Ddqn,
        Some("cql") => Algo::Cql,
        _ => Algo::Dqn,
    };
    let cql_w: f64 = args.get(5).map_or(1.0, |s| s.parse().unwrap());
    let clean = args.iter().any(|a| a == "confounded") == false;

    let mut cfg = ExperimentConfig {
        scenario: Scenario::EmotionalPendulum,
        env: EnvParams { p_fail: Some(0.2), odds: 4.0, v_t: Some(1.0), irrational_p: 0.7 },
        dataset_size: 50_000,
        density: DensityConfig { bandwidth_scale: 0.3, ..Default::default() },
        algo,
        mode: DeconfMode::None,
        ratio_kind: RatioKind::RewardOnly,
        total_steps: 30_000,
        eval_interval: 2000,
        eval_episodes: 20,
        rl: RlParams { gamma, learning_rate: lr, target_sync_interval: sync, cql_weight: cql_w, ..Default::default() },
        seeds: vec![0],
        clip_bounds: (0.1, 10.0),
    };
    if clean {
        cfg.env.odds = 1e6;
        cfg.env.irrational_p = 0.0;
    }
    eprintln!("gamma={gamma} lr={lr} sync={sync} algo={algo:?} cql_w={cql_w} clean={clean}");
    let ds =
        env_pendulum::generate_offline_dataset(&cfg, &ExploratoryPolicy::data_collection(), 0)
            .unwrap();
    let tc = TrainConfig { rl: cfg.rl.clone(), total_steps: cfg.total_steps, mode: DeconfMode::None };
    let probe_states: Vec<StateVec> = ds.transitions.iter().step_by(500).map(|t| t.s).collect();
    train_with_callback(&ds, None, algo, &tc, 0, |step, q, _| {
        if step % cfg.eval_interval == 0 {
            let q = q.unwrap();
            let mq: f64 = probe_states
                .iter()
                .map(|s| q.forward(s).iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .sum::<f64>()
                / probe_states.len() as f64;
            let ret = online_rollout(&cfg, &Greedy(q), 12345, 10).unwrap();
            println!("step={step} mean_maxQ={mq:.1} online={ret:.1}");
        }
    })
    .unwrap();
}
