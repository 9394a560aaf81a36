//! Sideband plan files and their reports.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ionkit_core::sidebands::{self, DriveSpec, PlanConfig, PlanEntry, PlanReport, SidebandError, ToneEffect, ToneOrigin};
use ionkit_core::spectra::IsotopeRecord;

use crate::error::{Error, Result};
use crate::lines::{self, LineRef};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveFile {
    /// MHz.
    pub frequency: f64,
    pub max_order: u32,
}

/// A carrier either as an absolute offset from the 138 line or relative to
/// a named line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Carrier {
    Offset(f64),
    Relative { line: LineRef, detuning: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    pub branch: String,
    pub carrier: Carrier,
    #[serde(default)]
    pub drives: Vec<DriveFile>,
    /// `[lo, hi]` MHz relative to the carrier.
    #[serde(default)]
    pub scan: Option<[f64; 2]>,
}

fn default_capture() -> f64 {
    PlanConfig::default().capture_range
}
fn default_linewidth() -> f64 {
    PlanConfig::default().linewidth
}
fn default_step() -> f64 {
    PlanConfig::default().scan_step
}
fn default_repump() -> f64 {
    PlanConfig::default().repump_tolerance
}
fn embedded() -> String {
    "embedded".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    #[serde(default)]
    pub name: String,
    pub target: u32,
    #[serde(default)]
    pub contaminants: Vec<u32>,
    pub entries: Vec<EntryFile>,
    #[serde(default = "default_capture")]
    pub capture_range: f64,
    #[serde(default = "default_linewidth")]
    pub linewidth: f64,
    #[serde(default = "default_step")]
    pub scan_step: f64,
    #[serde(default = "default_repump")]
    pub repump_tolerance: f64,
    #[serde(default = "embedded")]
    pub registry: String,
}

impl PlanFile {
    pub fn config(&self) -> PlanConfig {
        PlanConfig {
            capture_range: self.capture_range,
            linewidth: self.linewidth,
            scan_step: self.scan_step,
            repump_tolerance: self.repump_tolerance,
        }
    }

    pub fn entries(&self, records: &[IsotopeRecord]) -> Result<Vec<PlanEntry>> {
        self.entries
            .iter()
            .map(|e| {
                let branch = lines::branch(&e.branch)?;
                let carrier_offset = match &e.carrier {
                    Carrier::Offset(x) => *x,
                    Carrier::Relative { line, detuning } => {
                        let l = line.resolve(records)?;
                        if l.branch != branch {
                            return Err(Error::Usage(format!(
                                "carrier line {} is not on the entry's branch {}",
                                lines::describe(&l),
                                e.branch
                            )));
                        }
                        l.offset + detuning
                    }
                };
                Ok(PlanEntry {
                    branch,
                    carrier_offset,
                    drives: e.drives.iter().map(|d| DriveSpec { frequency: d.frequency, max_order: d.max_order }).collect(),
                    scan: e.scan.map(|[lo, hi]| (lo, hi)),
                })
            })
            .collect()
    }
}

pub fn origin_text(o: &ToneOrigin) -> String {
    o.to_string()
}

pub fn effect_json(e: &ToneEffect) -> Value {
    json!({
        "isotope": e.isotope,
        "line": lines::line_json(&e.line),
        "tone_offset_mhz": e.tone_offset,
        "origin": origin_text(&e.origin),
        "detuning_mhz": e.detuning,
        "class": e.class.name(),
        "relative_rate": e.relative_rate,
    })
}

pub fn report_json(report: &PlanReport, entries: &[PlanEntry]) -> Value {
    json!({
        "valid": report.valid(),
        "target": report.target,
        "carriers_mhz": entries.iter().map(|e| json!({"branch": e.branch.code(), "offset": e.carrier_offset})).collect::<Vec<_>>(),
        "target_cooling": report.target_cooling.iter().map(effect_json).collect::<Vec<_>>(),
        "target_repump": report.target_repump.iter().map(effect_json).collect::<Vec<_>>(),
        "contaminants": report.contaminants.iter().map(|v| json!({
            "isotope": v.isotope,
            "heated": v.heated(),
            "cooling": v.cooling,
            "heating": v.heating,
            "source": v.heating_source(),
            "nearest_heating": v.nearest_heating.as_ref().map(effect_json),
        })).collect::<Vec<_>>(),
        "uncovered": report.uncovered,
    })
}

pub fn report_table(report: &PlanReport) -> String {
    let mut s = format!(
        "target {}Ba+: {}\n",
        report.target,
        if report.valid() { "VALID" } else { "INVALID" }
    );
    s += &format!("  {:<22}{:>12}{:>14}  {}\n", "line", "tone_MHz", "detuning_MHz", "class");
    for e in report.target_cooling.iter().chain(&report.target_repump) {
        s += &format!(
            "  {:<22}{:>12.3}{:>14.3}  {} ({})\n",
            lines::describe(&e.line),
            e.tone_offset,
            e.detuning,
            e.class.name(),
            e.origin
        );
    }
    s += &format!("{:<13}{:<8}{:<11}{:>14}{:>14}\n", "contaminant", "heated", "source", "nearest_MHz", "detuning_MHz");
    for v in &report.contaminants {
        let (tone, det) = v
            .nearest_heating
            .as_ref()
            .map_or(("-".to_string(), "-".to_string()), |e| (format!("{:.1}", e.tone_offset), format!("{:+.1}", e.detuning)));
        s += &format!(
            "{:<13}{:<8}{:<11}{:>14}{:>14}\n",
            format!("{}Ba+", v.isotope),
            if v.heated() { "yes" } else { "no" },
            v.heating_source(),
            tone,
            det
        );
    }
    if !report.uncovered.is_empty() {
        s += &format!("uncovered: {:?}\n", report.uncovered);
    }
    s
}

/// Evaluate a plan. A heated target or a plan that cannot cool the target
/// is a domain error carrying the offending tones.
pub fn evaluate(file: &PlanFile, records: &[IsotopeRecord]) -> Result<(PlanReport, Vec<PlanEntry>)> {
    let entries = file.entries(records)?;
    match sidebands::plan_report(records, file.target, &file.contaminants, &entries, &file.config()) {
        Ok(r) => Ok((r, entries)),
        Err(SidebandError::PlanInvalid { offending }) => {
            let list: Vec<String> = offending
                .iter()
                .map(|e| format!("{} tone {:.3} MHz ({}) detuning {:+.3} MHz", lines::describe(&e.line), e.tone_offset, e.origin, e.detuning))
                .collect();
            Err(Error::Domain(format!("plan heats the target:\n  {}", list.join("\n  "))))
        }
        Err(e) => Err(Error::domain(e)),
    }
}
