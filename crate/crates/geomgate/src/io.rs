//! CSV and JSON emission with atomic file writes.
//!
//! CSV layout: a `# geomgate-csv v1` line, `# key=value` metadata lines, the
//! column header, one row per axis point and `# fit=value` footer lines.
//! Floats use 17 significant digits so files are byte-stable and exact.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use geomgate_core::analysis::{Report, SweepResult};
use geomgate_core::linalg::CMatrix;
use geomgate_core::pulses::PulseSchedule;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

pub const CSV_HEADER: &str = "# geomgate-csv v1";
pub const JSON_SCHEMA: &str = "geomgate-json v1";

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Commas and newlines in metadata would break the line format.
fn sanitize(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub fn sweep_to_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let _ = writeln!(out, "# scan={}", sanitize(&result.name));
    for (k, v) in &result.metadata {
        let _ = writeln!(out, "# {}={}", sanitize(k), sanitize(v));
    }
    let mut header = vec![result.axis_name.as_str()];
    header.extend(result.metrics.iter().map(|m| m.name.as_str()));
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, x) in result.axis_values.iter().enumerate() {
        let mut row = vec![format_float(*x)];
        row.extend(result.metrics.iter().map(|m| format_float(m.values[i])));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    for fit in &result.fits {
        let value = fit.value.map_or_else(|| "undefined".to_string(), format_float);
        let _ = writeln!(out, "# {}={}", sanitize(&fit.name), value);
    }
    out
}

fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn sweep_to_json(result: &SweepResult, config: Option<&RunConfig>) -> Value {
    let mut metrics = Map::new();
    for m in &result.metrics {
        metrics.insert(m.name.clone(), m.values.iter().copied().map(float_value).collect());
    }
    let mut fits = Map::new();
    for f in &result.fits {
        fits.insert(f.name.clone(), f.value.map_or(Value::Null, float_value));
    }
    let mut meta = Map::new();
    for (k, v) in &result.metadata {
        meta.insert(k.clone(), Value::String(v.clone()));
    }
    let mut doc = json!({
        "schema": JSON_SCHEMA,
        "name": result.name,
        "axis_name": result.axis_name,
        "axis": result.axis_values.iter().copied().map(float_value).collect::<Vec<_>>(),
        "metrics": metrics,
        "fits": fits,
        "metadata": meta,
    });
    if let Some(c) = config {
        doc["config"] = serde_json::to_value(c).expect("config is always serializable");
    }
    doc
}

pub fn report_to_json(report: &Report) -> Value {
    let scans: Vec<Value> = report
        .scans
        .iter()
        .map(|s| {
            json!({
                "name": s.name,
                "axis_name": s.axis_name,
                "points": s.points,
                "extrema": s.extrema.iter().map(|e| json!({
                    "name": e.name,
                    "min": float_value(e.min),
                    "max": float_value(e.max),
                    "argmin": float_value(e.argmin),
                    "argmax": float_value(e.argmax),
                })).collect::<Vec<_>>(),
                "fits": s.fits.iter().map(|f| json!({
                    "name": f.name,
                    "value": f.value.map_or(Value::Null, float_value),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            json!({
                "scan": c.threshold.scan,
                "quantity": c.threshold.quantity,
                "lower": c.threshold.lower.map_or(Value::Null, float_value),
                "upper": c.threshold.upper.map_or(Value::Null, float_value),
                "value": c.value.map_or(Value::Null, float_value),
                "passed": c.passed,
            })
        })
        .collect();
    json!({
        "schema": JSON_SCHEMA,
        "passed": report.passed(),
        "scans": scans,
        "checks": checks,
    })
}

/// `[[re, im], ...]` rows.
pub fn matrix_to_json(m: &CMatrix) -> Value {
    let n = m.dim();
    (0..n)
        .map(|r| (0..n).map(|c| json!([float_value(m[(r, c)].re), float_value(m[(r, c)].im)])).collect::<Vec<_>>())
        .collect()
}

/// `row,col,re,im` lines under the CSV header.
pub fn matrix_to_csv(m: &CMatrix, metadata: &[(String, String)]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (k, v) in metadata {
        let _ = writeln!(out, "# {}={}", sanitize(k), sanitize(v));
    }
    out.push_str("row,col,re,im\n");
    for r in 0..m.dim() {
        for c in 0..m.dim() {
            let z = m[(r, c)];
            let _ = writeln!(out, "{r},{c},{},{}", format_float(z.re), format_float(z.im));
        }
    }
    out
}

fn clean(x: f64) -> f64 {
    if x.abs() < 5e-7 { 0.0 } else { x }
}

/// Fixed-width rendering for terminals, entries rounded to 6 decimals
/// without negative zeros.
pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.dim() {
        out.push_str("  [");
        for c in 0..m.dim() {
            let z = m[(r, c)];
            let _ = write!(out, " {:+.6}{:+.6}i", clean(z.re), clean(z.im));
        }
        out.push_str(" ]\n");
    }
    out
}

pub fn format_schedule(schedule: &PulseSchedule) -> String {
    let mut out = String::from("  seg  kind       start        duration     area         phase\n");
    let starts = schedule.boundaries();
    for (k, seg) in schedule.segments().iter().enumerate() {
        let _ = writeln!(
            out,
            "  {:<4} {:<10} {:<12.6} {:<12.6} {:<12.6} {:+.6}",
            k + 1,
            seg.envelope.kind().name(),
            starts[k],
            seg.envelope.duration(),
            seg.envelope.area(),
            seg.phase
        );
    }
    out
}

pub fn schedule_to_json(schedule: &PulseSchedule) -> Value {
    schedule
        .segments()
        .iter()
        .map(|s| {
            let mut v = json!({
                "kind": s.envelope.kind().name(),
                "peak": float_value(s.envelope.peak()),
                "duration": float_value(s.envelope.duration()),
                "phase": float_value(s.phase),
            });
            if let geomgate_core::pulses::EnvelopeKind::Gaussian { width_ratio } = s.envelope.kind() {
                v["width_ratio"] = float_value(width_ratio);
            }
            v
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
