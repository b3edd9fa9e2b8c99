use clap::{Parser, Subcommand};
use cmdp_core::{Algo, ExperimentConfig};
use harness_cli::cache::stage_path;
use harness_cli::{
    dataset_stage, emit_csv, emit_report, eval_nets, load_config, parse_csv, run_pipeline,
    train_stage, weights_stage, HarnessError, ReportCell,
};
use offline_rl::{load_params, save_params, PolicyHead, QApproximator};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "harness-cli", about = "Confounded offline RL experiment pipeline")]
struct Cli {
    /// Experiment config (TOML); required by every subcommand but report.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's seed list with a single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts and reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Stage-cache directory; omit to disable caching.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the offline dataset.
    GenData,
    /// Fit the conditional-density models and save the outcome model.
    FitDensity,
    /// Estimate and save the deconfounding weight vector.
    Weights,
    /// Train one seed with periodic online evaluation.
    Train,
    /// Re-evaluate saved network parameters online.
    Eval,
    /// Render the report table and curve file from saved records.
    Report,
    /// Full pipeline over all configured seeds.
    Run,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn require_config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| HarnessError::Config("--config is required".into()))?;
    let mut cfg = load_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if cfg.seeds.is_empty() {
        return Err(HarnessError::Config("seeds must be nonempty".into()));
    }
    Ok(cfg)
}

fn param_tag(algo: Algo) -> &'static str {
    match algo {
        Algo::Sac | Algo::Bc => "policy",
        _ => "qnet",
    }
}

fn dispatch(cli: &Cli) -> Result<(), HarnessError> {
    let cache = cli.cache.as_deref();
    match cli.cmd {
        Cmd::GenData => {
            let cfg = require_config(cli)?;
            let seed = cfg.seeds[0];
            let (ds, cached) = dataset_stage(&cfg, seed, cache)?;
            let path = stage_path(&cli.out, "dataset", &cfg.digest(), seed, "txt");
            std::fs::create_dir_all(&cli.out)?;
            cmdp_core::save_dataset(&ds, &path).map_err(|e| HarnessError::Stage {
                stage: "gen-data",
                message: e.to_string(),
            })?;
            println!(
                "dataset n={} seed={seed}{} -> {}",
                ds.len(),
                cached_tag(cached),
                path.display()
            );
            Ok(())
        }
        Cmd::FitDensity => {
            let cfg = require_config(cli)?;
            let seed = cfg.seeds[0];
            let (ds, _) = dataset_stage(&cfg, seed, cache)?;
            let opts = deconf_weights::FitBundleOptions {
                density: cfg.density.clone(),
                seed: seed.wrapping_add(17),
                ..Default::default()
            };
            let bundle = deconf_weights::fit_bundle(&ds, cfg.ratio_kind, &opts).map_err(|e| {
                HarnessError::Stage {
                    stage: "fit-density",
                    message: e.to_string(),
                }
            })?;
            std::fs::create_dir_all(&cli.out)?;
            match &bundle.outcome {
                Some(outcome) => {
                    let path = stage_path(&cli.out, "density", &cfg.digest(), seed, "txt");
                    density_lscde::save_model(&outcome.model, &path).map_err(|e| {
                        HarnessError::Stage {
                            stage: "fit-density",
                            message: e.to_string(),
                        }
                    })?;
                    println!("outcome model -> {}", path.display());
                }
                None => println!("backdoor ratio: discrete u-conditionals only, nothing to save"),
            }
            Ok(())
        }
        Cmd::Weights => {
            let cfg = require_config(cli)?;
            let seed = cfg.seeds[0];
            let (ds, _) = dataset_stage(&cfg, seed, cache)?;
            let (w, cached) = weights_stage(&cfg, &ds, seed, cache)?;
            let w = w.ok_or_else(|| {
                HarnessError::Config("mode none estimates no weights; set mode elsewhere".into())
            })?;
            let path = stage_path(&cli.out, "weights", &cfg.digest(), seed, "txt");
            std::fs::create_dir_all(&cli.out)?;
            deconf_weights::save_weights(&w, cfg.ratio_kind, &path).map_err(|e| {
                HarnessError::Stage {
                    stage: "weights",
                    message: e.to_string(),
                }
            })?;
            println!(
                "weights n={} mean_raw={:.4} clipped_frac={:.4}{}{} -> {}",
                w.len(),
                w.mean_raw,
                w.fraction_clipped(),
                if w.quality_warning() {
                    " QUALITY-WARNING"
                } else {
                    ""
                },
                cached_tag(cached),
                path.display()
            );
            Ok(())
        }
        Cmd::Train => {
            let cfg = require_config(cli)?;
            let seed = cfg.seeds[0];
            let (ds, _) = dataset_stage(&cfg, seed, cache)?;
            let (w, _) = weights_stage(&cfg, &ds, seed, cache)?;
            let (records, out, cached) = train_stage(&cfg, &ds, w.as_ref(), seed, cache)?;
            std::fs::create_dir_all(&cli.out)?;
            let rec_path = stage_path(&cli.out, "evals", &cfg.digest(), seed, "csv");
            emit_csv(&records, &rec_path)?;
            if let Some(out) = out {
                let net = match (out.policy.as_ref(), out.q.as_ref()) {
                    (Some(p), _) => &p.net,
                    (None, Some(q)) => &q.net,
                    (None, None) => unreachable!("training always produces a network"),
                };
                let p_path = stage_path(&cli.out, "params", &cfg.digest(), seed, "txt");
                save_params(net, param_tag(cfg.algo), &p_path).map_err(|e| {
                    HarnessError::Stage {
                        stage: "train",
                        message: e.to_string(),
                    }
                })?;
                println!("params -> {}", p_path.display());
            }
            println!(
                "{} evaluation points{} -> {}",
                records.len(),
                cached_tag(cached),
                rec_path.display()
            );
            Ok(())
        }
        Cmd::Eval => {
            let cfg = require_config(cli)?;
            let seed = cfg.seeds[0];
            let p_path = stage_path(&cli.out, "params", &cfg.digest(), seed, "txt");
            let net = load_params(param_tag(cfg.algo), &p_path).map_err(|e| {
                HarnessError::Stage {
                    stage: "eval",
                    message: format!("{}: {e}", p_path.display()),
                }
            })?;
            let mean = match param_tag(cfg.algo) {
                "policy" => {
                    let head = PolicyHead { net };
                    eval_nets(&cfg, None, Some(&head), seed)?
                }
                _ => {
                    let target_params = net.params.clone();
                    let q = QApproximator { net, target_params };
                    eval_nets(&cfg, Some(&q), None, seed)?
                }
            };
            println!("mean_return={mean:.4} over {} episodes", cfg.eval_episodes);
            Ok(())
        }
        Cmd::Report => {
            let rec_path = cli.out.join("records.csv");
            let records = parse_csv(&rec_path)?;
            let cells = cells_from_records(&records);
            let ok = emit_report(
                &cells,
                &records,
                &cli.out.join("report.txt"),
                &cli.out.join("curves.txt"),
            )?;
            println!("report -> {}", cli.out.join("report.txt").display());
            if !ok || cells.is_empty() {
                return Err(HarnessError::Stage {
                    stage: "report",
                    message: "one or more cells failed".into(),
                });
            }
            Ok(())
        }
        Cmd::Run => {
            let cfg = require_config(cli)?;
            let (records, cell, all_cached) = run_pipeline(&cfg, cache)?;
            std::fs::create_dir_all(&cli.out)?;
            emit_csv(&records, &cli.out.join("records.csv"))?;
            let ok = emit_report(
                &[cell.clone()],
                &records,
                &cli.out.join("report.txt"),
                &cli.out.join("curves.txt"),
            )?;
            println!(
                "{} {} {}: best={} final={}{}",
                cell.scenario.as_str(),
                cell.algo.as_str(),
                cell.mode.as_str(),
                cell.best.map_or("FAILED".into(), |v| format!("{v:.2}")),
                cell.last.map_or("FAILED".into(), |v| format!("{v:.2}")),
                cached_tag(all_cached),
            );
            if !ok {
                return Err(HarnessError::Stage {
                    stage: "report",
                    message: "run produced no evaluation records".into(),
                });
            }
            Ok(())
        }
    }
}

fn cached_tag(cached: bool) -> &'static str {
    if cached {
        " (cached)"
    } else {
        ""
    }
}

/// Groups loose records into report cells, one per (algo, mode) pair.
fn cells_from_records(records: &[harness_cli::EvalRecord]) -> Vec<ReportCell> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(&str, &str), Vec<&harness_cli::EvalRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.algo.as_str(), r.mode.as_str()))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|group| {
            let first = group[0];
            ReportCell {
                scenario: first.scenario,
                algo: first.algo,
                mode: first.mode,
                best: harness_cli::best_return(&group, first.algo),
                last: harness_cli::final_return(&group),
            }
        })
        .collect()
}
