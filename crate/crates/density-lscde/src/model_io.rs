use crate::{DensityError, LscdeModel};
use nalgebra::{DMatrix, DVector};
use std::io::Write as _;
use std::path::Path;

fn fmt(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Writes a model as a small text file: a header with the shape and
/// bandwidths, then one whitespace-separated row per center holding the
/// x block, the y block and the coefficient.
pub fn save_model(model: &LscdeModel, path: &Path) -> Result<(), DensityError> {
    let mut out = String::new();
    out.push_str("# lscde-model v1\n");
    out.push_str(&format!(
        "# k={} dim_x={} dim_y={}\n",
        model.k(),
        model.dim_x,
        model.dim_y
    ));
    out.push_str(&format!(
        "# bandwidth_x={} bandwidth_y={}\n",
        fmt(model.bandwidth_x),
        fmt(model.bandwidth_y)
    ));
    for i in 0..model.k() {
        let mut fields = Vec::with_capacity(model.dim_x + model.dim_y + 1);
        for j in 0..model.dim_x {
            fields.push(fmt(model.centers_x[(i, j)]));
        }
        for j in 0..model.dim_y {
            fields.push(fmt(model.centers_y[(i, j)]));
        }
        fields.push(fmt(model.alpha[i]));
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn header_field(line: &str, key: &str) -> Result<String, DensityError> {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .map(str::to_owned)
        .ok_or_else(|| DensityError::BadModelFile(format!("missing {key}")))
}

pub fn load_model(path: &Path) -> Result<LscdeModel, DensityError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or("");
    if magic != "# lscde-model v1" {
        return Err(DensityError::BadModelFile(format!("bad magic {magic:?}")));
    }
    let shape = lines
        .next()
        .ok_or_else(|| DensityError::BadModelFile("missing shape line".into()))?;
    let k: usize = header_field(shape, "k")?
        .parse()
        .map_err(|e| DensityError::BadModelFile(format!("k: {e}")))?;
    let dim_x: usize = header_field(shape, "dim_x")?
        .parse()
        .map_err(|e| DensityError::BadModelFile(format!("dim_x: {e}")))?;
    let dim_y: usize = header_field(shape, "dim_y")?
        .parse()
        .map_err(|e| DensityError::BadModelFile(format!("dim_y: {e}")))?;
    let bw = lines
        .next()
        .ok_or_else(|| DensityError::BadModelFile("missing bandwidth line".into()))?;
    let bandwidth_x: f64 = header_field(bw, "bandwidth_x")?
        .parse()
        .map_err(|e| DensityError::BadModelFile(format!("bandwidth_x: {e}")))?;
    let bandwidth_y: f64 = header_field(bw, "bandwidth_y")?
        .parse()
        .map_err(|e| DensityError::BadModelFile(format!("bandwidth_y: {e}")))?;

    let mut centers_x = DMatrix::zeros(k, dim_x);
    let mut centers_y = DMatrix::zeros(k, dim_y);
    let mut alpha = DVector::zeros(k);
    let mut rows = 0;
    for (ln, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|e| DensityError::BadModelFile(format!("row {}: {e}", ln + 4)))
            })
            .collect::<Result<_, _>>()?;
        if vals.len() != dim_x + dim_y + 1 {
            return Err(DensityError::BadModelFile(format!(
                "row {}: expected {} fields, found {}",
                ln + 4,
                dim_x + dim_y + 1,
                vals.len()
            )));
        }
        if rows >= k {
            return Err(DensityError::BadModelFile(format!(
                "more than k={k} rows"
            )));
        }
        for j in 0..dim_x {
            centers_x[(rows, j)] = vals[j];
        }
        for j in 0..dim_y {
            centers_y[(rows, j)] = vals[dim_x + j];
        }
        alpha[rows] = vals[dim_x + dim_y];
        rows += 1;
    }
    if rows != k {
        return Err(DensityError::BadModelFile(format!(
            "expected k={k} rows, found {rows}"
        )));
    }
    Ok(LscdeModel {
        centers_x,
        centers_y,
        bandwidth_x,
        bandwidth_y,
        alpha,
        dim_x,
        dim_y,
    })
}
