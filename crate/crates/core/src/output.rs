//! CSV/JSON rendering and the simulate/scan/fit drivers behind the binary.
//!
//! Every output is rendered in memory before anything touches the disk, so a
//! failing run leaves no partial files. Floats are written with 17
//! significant digits.

use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::analysis::{bloch_trajectory, fit_decay, DecayFit, DecayModel};
use crate::config::Config;
use crate::engine::{self, ScanKind, ScanResult};
use crate::ensemble::{Signal, SpectralSnapshot};
use crate::error::{Error, Result};
use crate::protocol::expected_echo_time;

pub const SIGNAL_HEADER: [&str; 7] = ["t_s", "re_p", "im_p", "abs_p", "rho11", "rho22", "rho33"];
pub const SPECTRUM_HEADER: [&str; 5] = ["delta_hz", "im_rho13", "rho33", "rho11", "rho22"];
pub const BLOCH_HEADER: [&str; 4] = ["t_s", "u", "v", "w"];
pub const SCAN_HEADER: [&str; 4] = ["axis", "echo_time_s", "amplitude", "amplitude_sq"];

/// A named output file rendered in memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn table<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [f64; N]>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.map(num)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

pub fn signal_csv(signal: &Signal) -> Result<String> {
    table(
        SIGNAL_HEADER,
        (0..signal.len()).map(|i| {
            let p = signal.polarization[i];
            let pop = signal.populations[i];
            [signal.times[i], p.re, p.im, p.norm(), pop[0], pop[1], pop[2]]
        }),
    )
}

pub fn spectrum_csv(snap: &SpectralSnapshot) -> Result<String> {
    table(
        SPECTRUM_HEADER,
        (0..snap.delta.len()).map(|i| {
            [snap.delta[i], snap.im_rho13[i], snap.rho33[i], snap.rho11[i], snap.rho22[i]]
        }),
    )
}

pub fn scan_csv(scan: &ScanResult) -> Result<String> {
    table(
        SCAN_HEADER,
        scan.points.iter().filter_map(|p| {
            p.echo
                .map(|e| [p.axis, e.t_peak, e.amplitude, e.amplitude * e.amplitude])
        }),
    )
}

fn json_text(value: &impl Serialize) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::invalid(format!("json: {e}")))
}

fn fit_entry(points: &[(f64, f64)], model: DecayModel) -> serde_json::Value {
    match fit_decay(points, model) {
        Ok(fit) => serde_json::to_value(fit).expect("plain data"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Renders signal.csv, echo.json, one spectra file per snapshot and one
/// Bloch file per retained atom.
pub fn simulate(cfg: &Config) -> Result<Vec<Artifact>> {
    let out = engine::run(&cfg.run)?;
    let seq = &cfg.run.sequence;
    let mut files = vec![Artifact {
        name: "signal.csv".into(),
        contents: signal_csv(&out.signal)?,
    }];
    if seq.protocol.is_some() {
        let echo = engine::measure_echo(seq, &out.signal)?;
        let warnings: Vec<String> = out.warnings.iter().map(|w| w.to_string()).collect();
        files.push(Artifact {
            name: "echo.json".into(),
            contents: json_text(&json!({
                "echo": echo,
                "expected_echo_time": expected_echo_time(seq)?,
                "warnings": warnings,
            }))?,
        });
    }
    for snap in &out.snapshots {
        files.push(Artifact {
            name: format!("spectra_{:.3}us.csv", snap.t * 1e6),
            contents: spectrum_csv(snap)?,
        });
    }
    for atom in &out.retained {
        let points = bloch_trajectory(&atom.times, &atom.states, cfg.bloch_subspace)?;
        files.push(Artifact {
            name: format!("bloch_{:.3}kHz.csv", atom.delta_opt * 1e-3),
            contents: table(
                BLOCH_HEADER,
                points.iter().map(|p| [p.t, p.u, p.v, p.w]),
            )?,
        });
    }
    Ok(files)
}

/// Both decay models fitted to `(T, amplitude)` points.
pub fn fit_report(points: &[(f64, f64)], warnings: &[String]) -> Result<String> {
    json_text(&json!({
        "axis": "storage_time_s",
        "points": points.len(),
        "exp": fit_entry(points, DecayModel::Exp),
        "exp_offset": fit_entry(points, DecayModel::ExpOffset),
        "warnings": warnings,
    }))
}

/// Renders scan.csv and scan.json, plus fit.json for storage scans.
pub fn scan(cfg: &Config) -> Result<Vec<Artifact>> {
    let spec = cfg
        .scan
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [scan] block".into()))?;
    let result = match spec.kind {
        ScanKind::Storage => engine::scan_storage(&cfg.run, &spec.values)?,
        ScanKind::B2Area => engine::scan_b2_area(&cfg.run, &spec.values)?,
    };
    let warnings = result.warnings();
    let mut files = vec![
        Artifact {
            name: "scan.csv".into(),
            contents: scan_csv(&result)?,
        },
        Artifact {
            name: "scan.json".into(),
            contents: json_text(&json!({
                "kind": result.kind,
                "storage_origin": result.storage_origin,
                "points": result.points,
                "warnings": warnings,
            }))?,
        },
    ];
    if result.kind == ScanKind::Storage {
        files.push(Artifact {
            name: "fit.json".into(),
            contents: fit_report(&result.storage_points(), &warnings)?,
        });
    }
    Ok(files)
}

/// Reads `(t, amplitude)` pairs from a CSV with a header row. The time column
/// is `axis`, `t_s` or `t`, falling back to the first column; the amplitude
/// column is `amplitude`, falling back to the second.
pub fn read_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |e: csv::Error| Error::Config(format!("csv: {e}"));
    let header = r.headers().map_err(bad)?.clone();
    let find = |names: &[&str], fallback: usize| {
        names
            .iter()
            .find_map(|n| header.iter().position(|h| h == *n))
            .unwrap_or(fallback)
    };
    let (ti, ai) = (find(&["axis", "t_s", "t"], 0), find(&["amplitude"], 1));
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(bad)?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("row {}: column {i} is not a number", line + 2)))
        };
        points.push((field(ti)?, field(ai)?));
    }
    Ok(points)
}

pub fn fit_file(text: &str, model: DecayModel) -> Result<DecayFit> {
    fit_decay(&read_points(text)?, model)
}

/// Creates `dir` and writes every artifact into it.
pub fn write_artifacts(dir: &Path, files: &[Artifact]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in files {
        std::fs::write(dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}

/// Process exit code for a failed command: 3 for numeric failures, 2 for
/// everything attributable to the inputs.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric { .. } | Error::StepSize { .. } => 3,
        _ => 2,
    }
}
