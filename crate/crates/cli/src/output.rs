//! Report and trajectory writers.

use crate::CliError;
use kepler_euler::dynamics::{Method, Sample, Trajectory, TrajectoryMeta};
use kepler_euler::Chart;
use serde::Serialize;
use std::fs::File;
use std::io::Write;
use std::path::Path;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Failure(format!("cannot write {}: {e}", path.display()))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e)),
        _ => Ok(()),
    }
}

/// Pretty JSON with a trailing newline. Field order follows the struct
/// declarations and maps are ordered, so equal inputs give equal bytes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    ensure_parent(path)?;
    std::fs::write(path, to_json(value)).map_err(|e| io_err(path, e))
}

/// Seventeen significant digits, enough to round-trip every `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], samples: &[Sample], width: usize) -> Result<(), CliError> {
    ensure_parent(path)?;
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for s in samples {
        let row = std::iter::once(s.t).chain(s.state[..width].iter().copied()).map(fmt_float);
        w.write_record(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    w.into_inner().map_err(|e| io_err(path, e.error()))?.flush().map_err(|e| io_err(path, e))
}

/// Reads a `t,x1,x2,alpha` trajectory on `chart`. Derivatives are not
/// stored in the file and are left empty.
pub fn read_bundle_csv(path: &Path, chart: Chart) -> Result<Trajectory, CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::trim).map(String::from).collect();
    if header != ["t", "x1", "x2", "alpha"] {
        return Err(bad(format!("expected header t,x1,x2,alpha, got {}", header.join(","))));
    }
    let mut samples = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let vals =
            rec.iter().map(|f| f.trim().parse::<f64>()).collect::<Result<Vec<f64>, _>>().map_err(|e| bad(format!("row {}: {e}", i + 2)))?;
        samples.push(Sample { t: vals[0], state: vals[1..].to_vec(), deriv: Vec::new() });
    }
    let meta = TrajectoryMeta {
        method: Method::EmbeddedRK45Adaptive,
        abs_tol: f64::NAN,
        rel_tol: f64::NAN,
        max_step: f64::NAN,
        accepted_steps: samples.len().saturating_sub(1),
        rejected_steps: 0,
        energy_drift: None,
        events: Vec::new(),
    };
    Ok(Trajectory { chart, samples, meta })
}

/// Prints a report to stdout.
pub fn emit<T: Serialize>(value: &T) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(to_json(value).as_bytes());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 2f64.sqrt(), 1e-300, 6.02e23, 0.0] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let samples: Vec<Sample> =
            (0..3).map(|i| Sample { t: i as f64 * 0.1, state: vec![0.3, -0.7, 1.0 / 7.0 + i as f64], deriv: vec![] }).collect();
        write_csv(&path, &["t", "x1", "x2", "alpha"], &samples, 3).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        let traj = read_bundle_csv(&path, Chart::bundle(Chart::StereoPlane(-0.5))).unwrap();
        assert_eq!(
            traj.samples.iter().map(|s| (s.t, s.state.clone())).collect::<Vec<_>>(),
            samples.iter().map(|s| (s.t, s.state.clone())).collect::<Vec<_>>()
        );
    }
}
