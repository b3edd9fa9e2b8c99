use cmdp_core::*;
use env_pendulum::{online_rollout, ExploratoryPolicy, RandomPolicy, ScriptedPolicy};

fn main() {
    let clean = std::env::args().any(|a| a == "clean");
    let mut cfg = ExperimentConfig {
        scenario: Scenario::EmotionalPendulum,
        env: EnvParams { p_fail: Some(0.2), odds: 4.0, v_t: Some(1.0), irrational_p: 0.7 },
        dataset_size: 0,
        density: DensityConfig::default(),
        algo: Algo::Dqn,
        mode: DeconfMode::None,
        ratio_kind: RatioKind::RewardOnly,
        total_steps: 0,
        eval_interval: 1,
        eval_episodes: 50,
        rl: RlParams::default(),
        seeds: vec![0],
        clip_bounds: (0.1, 10.0),
    };
    if clean {
        cfg.env.odds = 1e6;
        cfg.env.irrational_p = 0.0;
    }
    let scripted = online_rollout(&cfg, &ScriptedPolicy::default(), 7, 50).unwrap();
    let expl = online_rollout(&cfg, &ExploratoryPolicy::data_collection(), 7, 50).unwrap();
    let random = online_rollout(&cfg, &RandomPolicy, 7, 50).unwrap();
    println!("clean={clean} scripted={scripted:.1} exploratory={expl:.1} random={random:.1}");
}
