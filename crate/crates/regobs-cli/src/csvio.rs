//! CSV serialization of trajectories and sweep tables.
//!
//! Floats are printed with 17 significant digits so a re-parse reproduces
//! the exact bits.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;

use regobs_core::OutputTrajectory;

/// 17-significant-digit rendering, enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `t,y_1,…,y_q` with one row per sample.
pub fn write_trajectory<W: Write>(mut w: W, trajectory: &OutputTrajectory) -> Result<()> {
    let q = trajectory.values.nrows();
    let mut header = String::from("t");
    for i in 1..=q {
        header.push_str(&format!(",y_{i}"));
    }
    writeln!(w, "{header}")?;
    for (s, t) in trajectory.times.iter().enumerate() {
        let mut row = fmt_float(*t);
        for i in 0..q {
            row.push(',');
            row.push_str(&fmt_float(trajectory.values[(i, s)]));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Reads a trajectory CSV written by [`write_trajectory`] (or any file with
/// the same header contract) and checks the channel count against the suite.
pub fn read_trajectory(path: &Path, labels: Vec<String>) -> Result<OutputTrajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read trajectory {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "t" {
        bail!(
            "trajectory {}: header must start with `t` followed by output columns",
            path.display()
        );
    }
    for (i, name) in headers.iter().skip(1).enumerate() {
        let expected = format!("y_{}", i + 1);
        if name != expected {
            bail!(
                "trajectory {}: column {} is `{name}`, expected `{expected}`",
                path.display(),
                i + 1
            );
        }
    }
    let q = headers.len() - 1;
    if q != labels.len() {
        bail!(
            "trajectory {} carries {q} output columns but the suite has {} sensors",
            path.display(),
            labels.len()
        );
    }
    let mut times = Vec::new();
    let mut flat: Vec<f64> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != q + 1 {
            bail!(
                "trajectory {}: row {} has {} fields, expected {}",
                path.display(),
                row + 2,
                record.len(),
                q + 1
            );
        }
        let mut fields = record.iter().map(|f| {
            f.parse::<f64>()
                .with_context(|| format!("trajectory {}: row {}", path.display(), row + 2))
        });
        times.push(fields.next().unwrap()?);
        for v in fields {
            flat.push(v?);
        }
    }
    if times.is_empty() {
        bail!("trajectory {} holds no samples", path.display());
    }
    let s = times.len();
    let values = DMatrix::from_fn(q, s, |i, j| flat[j * q + i]);
    Ok(OutputTrajectory {
        times,
        values,
        labels,
    })
}

/// One sweep grid point's outcome.
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub strategic: bool,
    pub min_sv: f64,
    pub failing_groups: usize,
}

/// Writes `coord_1,…,coord_d,verdict,min_sv,failing_groups`, verdict as
/// 1/0 so the table feeds plotting tools directly.
pub fn write_sweep<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    let d = rows.first().map_or(0, |r| r.coords.len());
    let mut header = String::new();
    for i in 1..=d {
        header.push_str(&format!("coord_{i},"));
    }
    header.push_str("verdict,min_sv,failing_groups");
    writeln!(w, "{header}")?;
    for row in rows {
        let mut line = String::new();
        for c in &row.coords {
            line.push_str(&fmt_float(*c));
            line.push(',');
        }
        line.push_str(&format!(
            "{},{},{}",
            u8::from(row.strategic),
            fmt_float(row.min_sv),
            row.failing_groups
        ));
        writeln!(w, "{line}")?;
    }
    Ok(())
}
