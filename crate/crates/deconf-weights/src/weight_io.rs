use crate::{postprocess_weights, WeightError, WeightVector};
use cmdp_core::RatioKind;
use std::io::Write as _;
use std::path::Path;

/// Writes one raw weight per line after a `#` header; the clipped values
/// are reconstructed from the bounds on load, so nothing is lost.
pub fn save_weights(
    w: &WeightVector,
    ratio_kind: RatioKind,
    path: &Path,
) -> Result<(), WeightError> {
    let mut out = String::new();
    out.push_str("# deconf-weights v1\n");
    out.push_str(&format!("# ratio_kind={}\n", ratio_kind.as_str()));
    out.push_str(&format!(
        "# clip_low={:.16e} clip_high={:.16e}\n",
        w.clip_bounds.0, w.clip_bounds.1
    ));
    out.push_str(&format!("# mean_raw={:.16e}\n", w.mean_raw));
    out.push_str(&format!("# flagged={}\n", w.flagged));
    for v in &w.raw {
        out.push_str(&format!("{:.16e}\n", v));
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn header_field(line: &str, key: &str) -> Result<String, WeightError> {
    line.trim_start_matches('#')
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .map(str::to_owned)
        .ok_or_else(|| WeightError::BadWeightFile(format!("missing {key}")))
}

pub fn load_weights(path: &Path) -> Result<(WeightVector, RatioKind), WeightError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("# deconf-weights v1") {
        return Err(WeightError::BadWeightFile("bad magic line".into()));
    }
    let kind_line = lines
        .next()
        .ok_or_else(|| WeightError::BadWeightFile("missing ratio_kind".into()))?;
    let kind_str = header_field(kind_line, "ratio_kind")?;
    let kind = [
        RatioKind::Full,
        RatioKind::RewardOnly,
        RatioKind::NextStateOnly,
        RatioKind::Backdoor,
    ]
    .into_iter()
    .find(|k| k.as_str() == kind_str)
    .ok_or_else(|| WeightError::BadWeightFile(format!("unknown ratio_kind {kind_str}")))?;
    let clip_line = lines
        .next()
        .ok_or_else(|| WeightError::BadWeightFile("missing clip bounds".into()))?;
    let low: f64 = header_field(clip_line, "clip_low")?
        .parse()
        .map_err(|e| WeightError::BadWeightFile(format!("clip_low: {e}")))?;
    let high: f64 = header_field(clip_line, "clip_high")?
        .parse()
        .map_err(|e| WeightError::BadWeightFile(format!("clip_high: {e}")))?;
    let mean_line = lines
        .next()
        .ok_or_else(|| WeightError::BadWeightFile("missing mean_raw".into()))?;
    let _: f64 = header_field(mean_line, "mean_raw")?
        .parse()
        .map_err(|e| WeightError::BadWeightFile(format!("mean_raw: {e}")))?;
    let flag_line = lines
        .next()
        .ok_or_else(|| WeightError::BadWeightFile("missing flagged".into()))?;
    let flagged: usize = header_field(flag_line, "flagged")?
        .parse()
        .map_err(|e| WeightError::BadWeightFile(format!("flagged: {e}")))?;

    let mut raw = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        raw.push(line.trim().parse::<f64>().map_err(|e| {
            WeightError::BadWeightFile(format!("line {}: {e}", i + 6))
        })?);
    }
    if raw.is_empty() {
        return Err(WeightError::BadWeightFile("no weights".into()));
    }
    let mut w = postprocess_weights(raw, low, high)?;
    w.flagged = flagged;
    Ok((w, kind))
}
