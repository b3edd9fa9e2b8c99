use crate::cache::stage_path;
use crate::records::{best_return, final_return, EvalRecord, ReportCell};
use crate::HarnessError;
use cmdp_core::{
    load_dataset, save_dataset, DeconfMode, ExperimentConfig, OfflineDataset, Rng, Scenario,
    StateVec,
};
use deconf_weights::{
    estimate_weights, fit_bundle, load_weights, save_weights, FitBundleOptions, WeightVector,
};
use env_pendulum::{generate_offline_dataset, online_rollout, ExploratoryPolicy, Policy};
use offline_rl::{train_with_callback, PolicyHead, QApproximator, TrainConfig, TrainOutput};
use std::path::Path;

/// Loads a TOML experiment config and validates it.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let cfg: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(cfg)
}

fn stage_err(stage: &'static str, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Generates (or loads from cache) the offline dataset of one seed.
/// Returns the dataset and whether it came from cache.
pub fn dataset_stage(
    cfg: &ExperimentConfig,
    seed: u64,
    cache: Option<&Path>,
) -> Result<(OfflineDataset, bool), HarnessError> {
    let digest = cfg.digest();
    if let Some(dir) = cache {
        let path = stage_path(dir, "dataset", &digest, seed, "txt");
        if path.exists() {
            let ds = load_dataset(&path).map_err(|e| stage_err("gen-data", e))?;
            // stale-cache guard: the stored generator digest must match
            if ds.generator_config_digest == digest && ds.seed == seed {
                return Ok((ds, true));
            }
        }
    }
    let rational = ExploratoryPolicy::data_collection();
    let ds = generate_offline_dataset(cfg, &rational, seed).map_err(|e| stage_err("gen-data", e))?;
    if let Some(dir) = cache {
        std::fs::create_dir_all(dir)?;
        let path = stage_path(dir, "dataset", &digest, seed, "txt");
        let tmp = dir.join(format!(".tmp-dataset-{digest}-s{seed}"));
        save_dataset(&ds, &tmp).map_err(|e| stage_err("gen-data", e))?;
        std::fs::rename(&tmp, &path)?;
    }
    Ok((ds, false))
}

fn bundle_options(cfg: &ExperimentConfig, seed: u64) -> FitBundleOptions {
    FitBundleOptions {
        density: cfg.density.clone(),
        seed: seed.wrapping_add(17),
        ..FitBundleOptions::default()
    }
}

/// Fits the density bundle and estimates the weight vector for one seed,
/// or loads the cached weight file. Mode `none` needs no weights.
pub fn weights_stage(
    cfg: &ExperimentConfig,
    ds: &OfflineDataset,
    seed: u64,
    cache: Option<&Path>,
) -> Result<(Option<WeightVector>, bool), HarnessError> {
    if cfg.mode == DeconfMode::None {
        return Ok((None, false));
    }
    let digest = cfg.digest();
    if let Some(dir) = cache {
        let path = stage_path(dir, "weights", &digest, seed, "txt");
        if path.exists() {
            let (w, kind) = load_weights(&path).map_err(|e| stage_err("weights", e))?;
            if kind == cfg.ratio_kind && w.len() == ds.len() {
                return Ok((Some(w), true));
            }
        }
    }
    let bundle = fit_bundle(ds, cfg.ratio_kind, &bundle_options(cfg, seed))
        .map_err(|e| stage_err("fit-density", e))?;
    let w = estimate_weights(ds, &bundle, cfg.clip_bounds).map_err(|e| stage_err("weights", e))?;
    if let Some(dir) = cache {
        std::fs::create_dir_all(dir)?;
        let path = stage_path(dir, "weights", &digest, seed, "txt");
        let tmp = dir.join(format!(".tmp-weights-{digest}-s{seed}"));
        save_weights(&w, cfg.ratio_kind, &tmp).map_err(|e| stage_err("weights", e))?;
        std::fs::rename(&tmp, &path)?;
    }
    Ok((Some(w), false))
}

struct QGreedy<'a>(&'a QApproximator);

impl Policy for QGreedy<'_> {
    fn act(&self, s: &StateVec, _rng: &mut Rng) -> usize {
        self.0.greedy_action(s)
    }
}

struct HeadSample<'a>(&'a PolicyHead);

impl Policy for HeadSample<'_> {
    fn act(&self, s: &StateVec, rng: &mut Rng) -> usize {
        use rand::Rng as _;
        let probs = self.0.probs(s);
        let mut x: f64 = rng.gen();
        for (a, &p) in probs.iter().enumerate() {
            x -= p;
            if x <= 0.0 {
                return a;
            }
        }
        probs.len() - 1
    }
}

/// Online evaluation of whichever network the algorithm trains. The
/// Q-family plays its argmax; SAC and BC sample the policy head, so an
/// imitated stochastic behavior keeps its irrational component instead
/// of being cleaned up by the mode.
pub fn eval_nets(
    cfg: &ExperimentConfig,
    q: Option<&QApproximator>,
    policy: Option<&PolicyHead>,
    eval_seed: u64,
) -> Result<f64, HarnessError> {
    let mean = match (policy, q) {
        (Some(p), _) => online_rollout(cfg, &HeadSample(p), eval_seed, cfg.eval_episodes),
        (None, Some(q)) => online_rollout(cfg, &QGreedy(q), eval_seed, cfg.eval_episodes),
        (None, None) => {
            return Err(stage_err("eval", "no trained network to evaluate"));
        }
    };
    mean.map_err(|e| stage_err("eval", e))
}

fn eval_seed_for(seed: u64, step: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(step as u64)
}

/// Trains one seed with periodic online evaluation, or loads the cached
/// evaluation records. Returns the records, the trained networks (absent
/// on a cache hit), and the cache flag.
pub fn train_stage(
    cfg: &ExperimentConfig,
    ds: &OfflineDataset,
    weights: Option<&WeightVector>,
    seed: u64,
    cache: Option<&Path>,
) -> Result<(Vec<EvalRecord>, Option<TrainOutput>, bool), HarnessError> {
    let digest = cfg.digest();
    if let Some(dir) = cache {
        let path = stage_path(dir, "evals", &digest, seed, "csv");
        if path.exists() {
            let records = crate::records::parse_csv(&path)?;
            return Ok((records, None, true));
        }
    }

    let tc = TrainConfig {
        rl: cfg.rl.clone(),
        total_steps: cfg.total_steps,
        mode: cfg.mode,
    };
    let mut records = Vec::new();
    let mut eval_error: Option<HarnessError> = None;
    let out = train_with_callback(ds, weights, cfg.algo, &tc, seed, |step, q, policy| {
        if step % cfg.eval_interval != 0 || eval_error.is_some() {
            return;
        }
        match eval_nets(cfg, q, policy, eval_seed_for(seed, step)) {
            Ok(mean_return) => records.push(EvalRecord {
                scenario: cfg.scenario,
                algo: cfg.algo,
                mode: cfg.mode,
                seed,
                step,
                mean_return,
            }),
            Err(e) => eval_error = Some(e),
        }
    })
    .map_err(|e| stage_err("train", e))?;
    if let Some(e) = eval_error {
        return Err(e);
    }
    // degenerate budgets below one evaluation interval still report the
    // (possibly untrained) networks once
    if records.is_empty() {
        let mean_return = eval_nets(
            cfg,
            out.q.as_ref(),
            out.policy.as_ref(),
            eval_seed_for(seed, cfg.total_steps),
        )?;
        records.push(EvalRecord {
            scenario: cfg.scenario,
            algo: cfg.algo,
            mode: cfg.mode,
            seed,
            step: cfg.total_steps,
            mean_return,
        });
    }

    if let Some(dir) = cache {
        let path = stage_path(dir, "evals", &digest, seed, "csv");
        crate::records::emit_csv(&records, &path)?;
    }
    Ok((records, Some(out), false))
}

/// Executes the full pipeline for every configured seed and summarizes
/// the run as one report cell. `all_cached` is true when every stage of
/// every seed came from cache.
pub fn run_pipeline(
    cfg: &ExperimentConfig,
    cache: Option<&Path>,
) -> Result<(Vec<EvalRecord>, ReportCell, bool), HarnessError> {
    if cfg.scenario == Scenario::Tabular {
        return Err(HarnessError::Config(
            "the pipeline runs pendulum scenarios; tabular instances are library-test fixtures"
                .into(),
        ));
    }
    if cfg.seeds.is_empty() {
        return Err(HarnessError::Config("seeds must be nonempty".into()));
    }
    let mut records = Vec::new();
    let mut all_cached = true;
    for &seed in &cfg.seeds {
        let (ds, c1) = dataset_stage(cfg, seed, cache)?;
        let (w, c2) = weights_stage(cfg, &ds, seed, cache)?;
        let (mut rs, _, c3) = train_stage(cfg, &ds, w.as_ref(), seed, cache)?;
        all_cached &= c1 && c3 && (cfg.mode == DeconfMode::None || c2);
        records.append(&mut rs);
    }
    let group: Vec<&EvalRecord> = records.iter().collect();
    let cell = ReportCell {
        scenario: cfg.scenario,
        algo: cfg.algo,
        mode: cfg.mode,
        best: best_return(&group, cfg.algo),
        last: final_return(&group),
    };
    Ok((records, cell, all_cached))
}
