use crate::{CoreError, OfflineDataset, Scenario, StateVec, Transition};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

const COLUMNS: &str = "x,y,v,a,m,u,x2,y2,v2,r,done";

fn fmt_real(x: f64) -> String {
    // 17 significant digits round-trip any f64
    format!("{:.16e}", x)
}

/// Serializes a dataset as a `#`-headed, comma-separated text table.
/// The format round-trips bit-exactly through [`load_dataset`].
pub fn save_dataset(dataset: &OfflineDataset, path: &Path) -> Result<(), CoreError> {
    dataset.validate()?;
    let mut out = String::new();
    writeln!(out, "# scenario={}", dataset.scenario.as_str()).unwrap();
    writeln!(out, "# seed={}", dataset.seed).unwrap();
    writeln!(out, "# config_digest={}", dataset.generator_config_digest).unwrap();
    writeln!(out, "# n={}", dataset.transitions.len()).unwrap();
    writeln!(out, "# columns={}", COLUMNS).unwrap();
    for t in &dataset.transitions {
        let m = t.m.map(|m| m.to_string()).unwrap_or_default();
        let u = t.u.map(|u| u.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_real(t.s.x),
            fmt_real(t.s.y),
            fmt_real(t.s.v),
            t.a,
            m,
            u,
            fmt_real(t.s_next.x),
            fmt_real(t.s_next.y),
            fmt_real(t.s_next.v),
            fmt_real(t.r),
            if t.done { 1 } else { 0 },
        )
        .unwrap();
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix("# ")
        .and_then(|rest| rest.strip_prefix(key))
        .and_then(|rest| rest.strip_prefix('='))
}

/// Parses a dataset file written by [`save_dataset`], restoring the
/// scenario tag and checking every dataset invariant.
pub fn load_dataset(path: &Path) -> Result<OfflineDataset, CoreError> {
    let f = std::fs::File::open(path)?;
    let reader = BufReader::new(f);

    let mut scenario: Option<Scenario> = None;
    let mut seed: Option<u64> = None;
    let mut digest: Option<String> = None;
    let mut declared_n: Option<usize> = None;
    let mut transitions = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let row = idx + 1;
        if line.starts_with('#') {
            if let Some(v) = header_value(&line, "scenario") {
                scenario = Scenario::from_str(v);
                if scenario.is_none() {
                    return Err(CoreError::BadHeader("scenario"));
                }
            } else if let Some(v) = header_value(&line, "seed") {
                seed = v.parse().ok();
            } else if let Some(v) = header_value(&line, "config_digest") {
                digest = Some(v.to_string());
            } else if let Some(v) = header_value(&line, "n") {
                declared_n = v.parse().ok();
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        transitions.push(parse_row(&line, row)?);
    }

    let scenario = scenario.ok_or(CoreError::BadHeader("scenario"))?;
    let seed = seed.ok_or(CoreError::BadHeader("seed"))?;
    let digest = digest.ok_or(CoreError::BadHeader("config_digest"))?;
    let n = declared_n.ok_or(CoreError::BadHeader("n"))?;
    if n != transitions.len() {
        return Err(CoreError::MalformedRow {
            row: transitions.len(),
            msg: format!("header declares n={n} but file has {} rows", transitions.len()),
        });
    }
    OfflineDataset::new(transitions, scenario, digest, seed)
}

fn parse_row(line: &str, row: usize) -> Result<Transition, CoreError> {
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != 11 {
        return Err(CoreError::MalformedRow {
            row,
            msg: format!("expected 11 cells, found {}", cells.len()),
        });
    }
    let real = |i: usize| -> Result<f64, CoreError> {
        cells[i].parse().map_err(|_| CoreError::MalformedRow {
            row,
            msg: format!("cell {} is not a real number: `{}`", i + 1, cells[i]),
        })
    };
    let opt_int = |i: usize| -> Result<Option<i64>, CoreError> {
        if cells[i].is_empty() {
            Ok(None)
        } else {
            cells[i]
                .parse()
                .map(Some)
                .map_err(|_| CoreError::MalformedRow {
                    row,
                    msg: format!("cell {} is not an integer: `{}`", i + 1, cells[i]),
                })
        }
    };
    let a: usize = cells[3].parse().map_err(|_| CoreError::MalformedRow {
        row,
        msg: format!("action index is not an integer: `{}`", cells[3]),
    })?;
    let done = match cells[10] {
        "0" => false,
        "1" => true,
        other => {
            return Err(CoreError::MalformedRow {
                row,
                msg: format!("done flag must be 0 or 1, found `{other}`"),
            })
        }
    };
    Ok(Transition {
        s: StateVec::new(real(0)?, real(1)?, real(2)?),
        a,
        m: opt_int(4)?.map(|m| m as usize),
        u: opt_int(5)?,
        s_next: StateVec::new(real(6)?, real(7)?, real(8)?),
        r: real(9)?,
        done,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_dataset(scenario: Scenario, n: usize) -> OfflineDataset {
        let transitions = (0..n)
            .map(|i| Transition {
                s: StateVec::new(0.1 * i as f64, -0.3, 1.5),
                a: i % 5,
                m: if scenario.is_star() { None } else { Some((i + 1) % 5) },
                u: if scenario.is_star() { Some((i % 2) as i64) } else { None },
                s_next: StateVec::new(0.2, 0.4, -2.0),
                r: -1.25 + i as f64,
                done: false,
            })
            .collect();
        OfflineDataset::new(transitions, scenario, "digest0".into(), 42).unwrap()
    }

    #[test]
    fn round_trip_single_transition() {
        let d = sample_dataset(Scenario::EmotionalPendulum, 1);
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("d.csv");
        save_dataset(&d, &p).unwrap();
        let loaded = load_dataset(&p).unwrap();
        assert_eq!(d, loaded);
    }

    #[test]
    fn empty_dataset_rejected() {
        let d = OfflineDataset {
            transitions: vec![],
            scenario: Scenario::Tabular,
            generator_config_digest: String::new(),
            seed: 0,
        };
        let tmp = tempfile::tempdir().unwrap();
        let err = save_dataset(&d, &tmp.path().join("d.csv")).unwrap_err();
        assert!(matches!(err, CoreError::EmptyDataset));
    }

    #[test]
    fn nan_reward_rejected() {
        let mut d = sample_dataset(Scenario::WindyPendulum, 3);
        d.transitions[1].r = f64::NAN;
        let tmp = tempfile::tempdir().unwrap();
        let err = save_dataset(&d, &tmp.path().join("d.csv")).unwrap_err();
        assert!(matches!(err, CoreError::NonFiniteReward(1)));
    }

    #[test]
    fn star_scenario_with_m_is_shape_mismatch() {
        let d = sample_dataset(Scenario::EmotionalPendulum, 3);
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("d.csv");
        save_dataset(&d, &p).unwrap();
        // rewrite the scenario header to a Star tag; rows still carry m
        let text = std::fs::read_to_string(&p).unwrap();
        let text = text.replace("scenario=EmotionalPendulum", "scenario=EmotionalPendulumStar");
        std::fs::write(&p, text).unwrap();
        let err = load_dataset(&p).unwrap_err();
        assert!(matches!(err, CoreError::ShapeMismatch { row: 0, .. }));
    }

    #[test]
    fn truncated_file_names_offending_line() {
        let d = sample_dataset(Scenario::EmotionalPendulum, 5);
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("d.csv");
        save_dataset(&d, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        // cut the last row in half
        let cut = text.len() - 40;
        std::fs::write(&p, &text[..cut]).unwrap();
        let err = load_dataset(&p).unwrap_err();
        match err {
            CoreError::MalformedRow { row, .. } => assert_eq!(row, 10),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn deterministic_bytes_for_same_dataset() {
        let d = sample_dataset(Scenario::Tabular, 100);
        let tmp = tempfile::tempdir().unwrap();
        let p1 = tmp.path().join("a.csv");
        let p2 = tmp.path().join("b.csv");
        save_dataset(&d, &p1).unwrap();
        save_dataset(&d, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_identity(n in 1usize..40, seed in 0u64..1000) {
            use rand::Rng as _;
            let mut rng = crate::rng_from_seed(seed);
            let transitions: Vec<Transition> = (0..n).map(|_| Transition {
                s: StateVec::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-8.0..8.0)),
                a: rng.gen_range(0..5),
                m: Some(rng.gen_range(0..5)),
                u: None,
                s_next: StateVec::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-8.0..8.0)),
                r: rng.gen_range(-20.0..15.0),
                done: false,
            }).collect();
            let d = OfflineDataset::new(transitions, Scenario::EmotionalPendulum, format!("g{seed}"), seed).unwrap();
            let tmp = tempfile::tempdir().unwrap();
            let p = tmp.path().join("d.csv");
            save_dataset(&d, &p).unwrap();
            proptest::prop_assert_eq!(load_dataset(&p).unwrap(), d);
        }
    }
}
