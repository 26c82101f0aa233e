//! Reconstruction report as a two-column `key,value` CSV.
//!
//! Rows appear in a fixed order: the scalar metrics, then every power
//! fraction as `fraction.<name>`, then every provenance entry as
//! `provenance.<key>`, the last two groups sorted by key. Floats use the
//! shortest representation that parses back to the same value.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::ReconstructionReport;

const SCALARS: [&str; 8] = [
    "focus_depth_m",
    "focus_x_m",
    "focus_y_m",
    "peak_intensity",
    "peak_to_mean",
    "ncc",
    "speckle_contrast",
    "solid_angle_sr",
];

fn rows(report: &ReconstructionReport) -> Vec<(String, String)> {
    let f = |v: f64| format!("{v:e}");
    let values = [
        f(report.focus_depth),
        f(report.focus_xy.0),
        f(report.focus_xy.1),
        f(report.peak_intensity),
        f(report.peak_to_mean),
        report.ncc.map_or_else(|| "none".to_string(), f),
        f(report.speckle_contrast),
        f(report.solid_angle_sr),
    ];
    let mut out: Vec<(String, String)> = SCALARS
        .iter()
        .zip(values)
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    out.extend(
        report
            .power_fractions
            .iter()
            .map(|(k, v)| (format!("fraction.{k}"), f(*v))),
    );
    out.extend(
        report
            .provenance
            .iter()
            .map(|(k, v)| (format!("provenance.{k}"), v.clone())),
    );
    out
}

pub fn write_report(report: &ReconstructionReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["key", "value"]).map_err(csv_err)?;
    for (k, v) in rows(report) {
        w.write_record([k, v]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReconstructionReport> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut scalars = BTreeMap::new();
    let mut fractions = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message,
        };
        if record.len() != 2 {
            return Err(bad(format!("expected 2 columns, found {}", record.len())));
        }
        let (key, value) = (&record[0], &record[1]);
        let number = || {
            value
                .parse::<f64>()
                .map_err(|_| bad(format!("{key}: '{value}' is not a number")))
        };
        if let Some(name) = key.strip_prefix("fraction.") {
            fractions.insert(name.to_string(), number()?);
        } else if let Some(name) = key.strip_prefix("provenance.") {
            provenance.insert(name.to_string(), value.to_string());
        } else if SCALARS.contains(&key) {
            let v = if key == "ncc" && value == "none" {
                None
            } else {
                Some(number()?)
            };
            scalars.insert(key.to_string(), v);
        } else {
            return Err(bad(format!("unknown key '{key}'")));
        }
    }
    let get = |k: &str| -> Result<f64> {
        scalars
            .get(k)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!("missing key '{k}'"),
            })
    };
    Ok(ReconstructionReport {
        focus_depth: get("focus_depth_m")?,
        focus_xy: (get("focus_x_m")?, get("focus_y_m")?),
        peak_intensity: get("peak_intensity")?,
        peak_to_mean: get("peak_to_mean")?,
        ncc: scalars.get("ncc").copied().flatten(),
        speckle_contrast: get("speckle_contrast")?,
        power_fractions: fractions,
        solid_angle_sr: get("solid_angle_sr")?,
        provenance,
    })
}
