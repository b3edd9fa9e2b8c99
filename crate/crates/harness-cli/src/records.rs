use crate::HarnessError;
use cmdp_core::{Algo, DeconfMode, Scenario};
use std::collections::BTreeMap;
use std::path::Path;

/// One online evaluation point of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub scenario: Scenario,
    pub algo: Algo,
    pub mode: DeconfMode,
    pub seed: u64,
    pub step: usize,
    pub mean_return: f64,
}

/// Serializes records in the stable column order, sorted by
/// (algo, seed, step).
pub fn emit_csv(records: &[EvalRecord], path: &Path) -> Result<(), HarnessError> {
    let mut sorted: Vec<&EvalRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.algo.as_str(), r.mode.as_str(), r.seed, r.step));
    let mut out = String::from("scenario,algo,mode,seed,step,mean_return\n");
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{:.16e}\n",
            r.scenario.as_str(),
            r.algo.as_str(),
            r.mode.as_str(),
            r.seed,
            r.step,
            r.mean_return
        ));
    }
    crate::cache::write_atomic(path, out.as_bytes())?;
    Ok(())
}

pub fn parse_csv(path: &Path) -> Result<Vec<EvalRecord>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != "scenario,algo,mode,seed,step,mean_return" {
        return Err(HarnessError::Stage {
            stage: "report",
            message: format!("unexpected CSV header {header:?} in {}", path.display()),
        });
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| HarnessError::Stage {
            stage: "report",
            message: format!("line {}: bad {what} in {}", i + 2, path.display()),
        };
        if fields.len() != 6 {
            return Err(bad("column count"));
        }
        let algo = [Algo::Dqn, Algo::Ddqn, Algo::Sac, Algo::Cql, Algo::Bc]
            .into_iter()
            .find(|a| a.as_str() == fields[1])
            .ok_or_else(|| bad("algo"))?;
        let mode = [DeconfMode::None, DeconfMode::Reweight, DeconfMode::Resample]
            .into_iter()
            .find(|m| m.as_str() == fields[2])
            .ok_or_else(|| bad("mode"))?;
        records.push(EvalRecord {
            scenario: Scenario::from_str(fields[0]).ok_or_else(|| bad("scenario"))?,
            algo,
            mode,
            seed: fields[3].parse().map_err(|_| bad("seed"))?,
            step: fields[4].parse().map_err(|_| bad("step"))?,
            mean_return: fields[5].parse().map_err(|_| bad("mean_return"))?,
        });
    }
    Ok(records)
}

/// Seed-averaged return per evaluation step for one (algo, mode) group,
/// sorted by step.
pub fn seed_mean_curve(records: &[&EvalRecord]) -> Vec<(usize, f64)> {
    let mut by_step: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = by_step.entry(r.step).or_insert((0.0, 0));
        e.0 += r.mean_return;
        e.1 += 1;
    }
    by_step
        .into_iter()
        .map(|(step, (sum, n))| (step, sum / n as f64))
        .collect()
}

/// Best seed-averaged return over training. Non-learning baselines (BC)
/// instead partition the evaluation points into 10 parts, average within
/// each part and take the best part, which smooths evaluation noise the
/// same way a best-single-point read-out would not.
pub fn best_return(records: &[&EvalRecord], algo: Algo) -> Option<f64> {
    let curve = seed_mean_curve(records);
    if curve.is_empty() {
        return None;
    }
    if algo == Algo::Bc {
        let parts = 10.min(curve.len());
        let chunk = curve.len().div_ceil(parts);
        curve
            .chunks(chunk)
            .map(|c| c.iter().map(|(_, v)| v).sum::<f64>() / c.len() as f64)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
    } else {
        curve
            .iter()
            .map(|&(_, v)| v)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
    }
}

/// Final-step seed-averaged return.
pub fn final_return(records: &[&EvalRecord]) -> Option<f64> {
    seed_mean_curve(records).last().map(|&(_, v)| v)
}

/// One rendered report cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub scenario: Scenario,
    pub algo: Algo,
    pub mode: DeconfMode,
    /// Best-over-training headline value; `None` renders as FAILED.
    pub best: Option<f64>,
    pub last: Option<f64>,
}

/// Renders the cell table and a plot-data file (one block per
/// (algo, mode), step vs seed-mean return). Returns false when any cell
/// failed, which the caller maps to a nonzero exit.
pub fn emit_report(
    cells: &[ReportCell],
    records: &[EvalRecord],
    report_path: &Path,
    curves_path: &Path,
) -> Result<bool, HarnessError> {
    let mut out = String::from("scenario\talgo\tmode\tbest_return\tfinal_return\n");
    let mut ok = true;
    for c in cells {
        let mut fmt = |v: Option<f64>| match v {
            Some(v) => format!("{v:.2}"),
            None => {
                ok = false;
                "FAILED".to_string()
            }
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            c.scenario.as_str(),
            c.algo.as_str(),
            c.mode.as_str(),
            fmt(c.best),
            fmt(c.last)
        ));
    }
    crate::cache::write_atomic(report_path, out.as_bytes())?;

    let mut curves = String::new();
    let mut groups: BTreeMap<(&str, &str), Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.algo.as_str(), r.mode.as_str()))
            .or_default()
            .push(r);
    }
    for ((algo, mode), group) in groups {
        curves.push_str(&format!("# algo={algo} mode={mode}\n"));
        for (step, v) in seed_mean_curve(&group) {
            curves.push_str(&format!("{step} {v:.16e}\n"));
        }
        curves.push('\n');
    }
    crate::cache::write_atomic(curves_path, curves.as_bytes())?;
    Ok(ok)
}
