//! Scan CSV files and Lorentzian fit reports.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ionkit_core::lineshape::{self, Lorentzian, LorentzianFit, ScanData};

use crate::error::{Error, Result};
use crate::registry::column_of;

pub const HEADER: [&str; 2] = ["frequency_MHz", "counts"];

/// Starting values; any left unset come from the automatic seed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Guess {
    pub center: Option<f64>,
    pub fwhm: Option<f64>,
    pub amplitude: Option<f64>,
    pub offset: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub scan: String,
    pub label: String,
    pub guess: Guess,
}

pub fn parse_scan(text: &str, path: &str, label: &str) -> Result<ScanData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let malformed = |line: u64, column: usize, message: String| Error::Malformed {
        path: path.to_string(),
        line: line as usize,
        column,
        message,
    };
    let mut points = Vec::new();
    let mut line_of = Vec::new();
    let mut header_seen = false;
    for row in rdr.records() {
        let row = row.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), 1, e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        if !header_seen {
            if row.iter().collect::<Vec<_>>() != HEADER {
                return Err(malformed(line, 1, format!("expected header {}", HEADER.join(","))));
            }
            header_seen = true;
            continue;
        }
        let mut vals = [0.0; 2];
        for (k, v) in vals.iter_mut().enumerate() {
            let f = &row[k];
            *v = f
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| malformed(line, column_of(&row, k), format!("{}: not a number: {f:?}", HEADER[k])))?;
        }
        points.push((vals[0], vals[1]));
        line_of.push((line, column_of(&row, 1)));
    }
    if !header_seen {
        return Err(malformed(1, 1, "empty scan".into()));
    }
    ScanData::new(points, label).map_err(|e| match e {
        lineshape::LineshapeError::NotIncreasing(i) | lineshape::LineshapeError::BadCounts(i) => {
            let (line, counts_col) = line_of[i];
            let column = if matches!(e, lineshape::LineshapeError::BadCounts(_)) { counts_col } else { 1 };
            malformed(line, column, e.to_string())
        }
        other => Error::domain(other),
    })
}

pub fn read_scan(path: &Path, label: &str) -> Result<ScanData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    parse_scan(&text, &path.display().to_string(), label)
}

pub fn scan_csv(scan: &ScanData, preamble: &str) -> String {
    let mut s = format!("{preamble}{}\n", HEADER.join(","));
    for (f, c) in &scan.points {
        s += &format!("{f},{c}\n");
    }
    s
}

pub fn run(scan: &ScanData, cfg: &FitConfig) -> Result<LorentzianFit> {
    let g = &cfg.guess;
    let guess = if [g.center, g.fwhm, g.amplitude, g.offset].iter().all(Option::is_none) {
        None
    } else {
        let seed = lineshape::auto_seed(scan).map_err(Error::domain)?;
        Some(Lorentzian {
            center: g.center.unwrap_or(seed.center),
            fwhm: g.fwhm.unwrap_or(seed.fwhm),
            amplitude: g.amplitude.unwrap_or(seed.amplitude),
            offset: g.offset.unwrap_or(seed.offset),
        })
    };
    lineshape::fit_lorentzian(scan, guess).map_err(Error::domain)
}

fn params(l: &Lorentzian) -> Value {
    json!({ "center": l.center, "fwhm": l.fwhm, "amplitude": l.amplitude, "offset": l.offset })
}

pub fn report_json(fit: &LorentzianFit, scan: &ScanData) -> Value {
    json!({
        "label": scan.label,
        "points": scan.len(),
        "params": params(&fit.line),
        "stat_unc": params(&fit.stat_unc),
        "systematic_mhz": fit.systematic,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "residual_norm": fit.residual_norm,
        "gradient_cosine": fit.gradient_cosine,
        "dof": fit.dof,
        "weighting": fit.weighting,
    })
}

pub fn report_table(fit: &LorentzianFit) -> String {
    let (l, u) = (&fit.line, &fit.stat_unc);
    format!(
        "center    {:.4} +/- {:.4} (stat) +/- {} (sys) MHz\nfwhm      {:.4} +/- {:.4} MHz\namplitude {:.5} +/- {:.5}\noffset    {:.5} +/- {:.5}\nconverged {} after {} iterations, residual norm {:.4e}\n",
        l.center, u.center, fit.systematic, l.fwhm, u.fwhm, l.amplitude, u.amplitude, l.offset, u.offset,
        fit.converged, fit.iterations, fit.residual_norm
    )
}
