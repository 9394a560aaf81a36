//! Level and line tables, and references to a single line by its labels.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ionkit_core::spectra::{self, Branch, HyperfineLevel, IsotopeRecord, Term, TransitionLine};
use ionkit_core::HalfInt;

use crate::error::{Error, Result};
use crate::registry;

/// `(isotope, branch, F_lower, F_upper)`; F labels are omitted for
/// spinless isotopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRef {
    pub isotope: u32,
    pub branch: String,
    #[serde(default)]
    pub f_lower: Option<f64>,
    #[serde(default)]
    pub f_upper: Option<f64>,
}

pub fn half_int(x: f64) -> Result<HalfInt> {
    let twice = 2.0 * x;
    if !(twice >= 0.0) || twice.fract() != 0.0 || twice > 64.0 {
        return Err(Error::Usage(format!("{x} is not a non-negative half-integer")));
    }
    Ok(HalfInt::from_twice(twice as u32))
}

pub fn branch(s: &str) -> Result<Branch> {
    s.parse().map_err(|_| Error::Usage(format!("unknown branch {s:?} (use b or r)")))
}

impl LineRef {
    pub fn resolve(&self, records: &[IsotopeRecord]) -> Result<TransitionLine> {
        let iso = registry::find(records, self.isotope)?;
        let f = match (self.f_lower, self.f_upper) {
            (Some(l), Some(u)) => Some((half_int(l)?, half_int(u)?)),
            (None, None) => None,
            _ => return Err(Error::Usage("give both f_lower and f_upper or neither".into())),
        };
        let line = spectra::transition_line(iso, branch(&self.branch)?, f).map_err(Error::domain)?;
        if !line.allowed {
            return Err(Error::Domain(format!("{} is dipole-forbidden", describe(&line))));
        }
        Ok(line)
    }
}

pub fn describe(line: &TransitionLine) -> String {
    format!("{} {} F={}->{}", line.isotope, line.branch, line.f_lower, line.f_upper)
}

pub fn line_json(line: &TransitionLine) -> Value {
    json!({
        "isotope": line.isotope,
        "branch": line.branch.code(),
        "f_lower": line.f_lower.value(),
        "f_upper": line.f_upper.value(),
        "offset_mhz": line.offset,
        "allowed": line.allowed,
    })
}

fn level_json(l: &HyperfineLevel) -> Value {
    json!({ "term": l.term.label(), "f": l.f.value(), "energy_mhz": l.energy })
}

pub fn term(s: &str) -> Result<Term> {
    Term::ALL
        .iter()
        .copied()
        .find(|t| t.label() == s || t.label().replace('/', "") == s)
        .ok_or_else(|| Error::Usage(format!("unknown term {s:?} (use S1/2, P1/2 or D3/2)")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsConfig {
    pub isotope: u32,
    pub terms: Vec<String>,
    pub registry: String,
}

pub fn levels(records: &[IsotopeRecord], cfg: &LevelsConfig) -> Result<(Vec<HyperfineLevel>, Value)> {
    let iso = registry::find(records, cfg.isotope)?;
    let mut out = Vec::new();
    for t in &cfg.terms {
        out.extend(spectra::hyperfine_levels(iso, term(t)?));
    }
    let json = json!({ "isotope": iso.mass_number, "spin": iso.spin.value(), "levels": out.iter().map(level_json).collect::<Vec<_>>() });
    Ok((out, json))
}

pub fn levels_table(isotope: u32, levels: &[HyperfineLevel]) -> String {
    let mut s = format!("{:<6}{:<7}{:>5}{:>18}\n", "A", "term", "F", "energy_MHz");
    for l in levels {
        s += &format!("{:<6}{:<7}{:>5}{:>18.6}\n", isotope, l.term.label(), l.f.to_string(), l.energy);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinesConfig {
    /// Empty means every isotope in the registry.
    pub isotopes: Vec<u32>,
    pub branches: Vec<String>,
    pub include_forbidden: bool,
    pub registry: String,
}

pub fn lines(records: &[IsotopeRecord], cfg: &LinesConfig) -> Result<Vec<TransitionLine>> {
    let branches = cfg.branches.iter().map(|b| branch(b)).collect::<Result<Vec<_>>>()?;
    let chosen: Vec<&IsotopeRecord> = if cfg.isotopes.is_empty() {
        records.iter().collect()
    } else {
        cfg.isotopes.iter().map(|&a| registry::find(records, a)).collect::<Result<_>>()?
    };
    let mut out = Vec::new();
    for iso in chosen {
        for &b in &branches {
            out.extend(
                spectra::transition_lines(iso, b)
                    .into_iter()
                    .filter(|l| l.allowed || cfg.include_forbidden),
            );
        }
    }
    Ok(out)
}

/// One row per isotope and hyperfine pair; blue and red offsets side by
/// side where both branches share the labels (always true for I = 0).
pub fn lines_table(lines: &[TransitionLine]) -> String {
    let mut s = format!(
        "{:<6}{:<7}{:>6}{:>6}{:>16}{:>6}{:>6}{:>16}\n",
        "A", "", "F''b", "F'b", "b_offset_MHz", "F''r", "F'r", "r_offset_MHz"
    );
    let mut isotopes: Vec<u32> = lines.iter().map(|l| l.isotope).collect();
    isotopes.dedup();
    for a in isotopes {
        let of = |b: Branch| lines.iter().filter(move |l| l.isotope == a && l.branch == b).collect::<Vec<_>>();
        let (blue, red) = (of(Branch::Blue), of(Branch::Red));
        for k in 0..blue.len().max(red.len()) {
            let cell = |l: Option<&&TransitionLine>| match l {
                Some(l) => format!(
                    "{:>6}{:>6}{:>16}",
                    l.f_lower.to_string(),
                    l.f_upper.to_string(),
                    format!("{:.3}{}", l.offset, if l.allowed { "" } else { "*" })
                ),
                None => format!("{:>6}{:>6}{:>16}", "", "", ""),
            };
            s += &format!("{:<6}{:<7}{}{}\n", a, "", cell(blue.get(k)), cell(red.get(k)));
        }
    }
    if lines.iter().any(|l| !l.allowed) {
        s += "* dipole-forbidden\n";
    }
    s
}

pub fn lines_csv(lines: &[TransitionLine], preamble: &str) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["isotope", "branch", "f_lower", "f_upper", "offset_mhz", "allowed"]).expect("in-memory write");
    for l in lines {
        w.write_record([
            l.isotope.to_string(),
            l.branch.code().to_string(),
            l.f_lower.to_string(),
            l.f_upper.to_string(),
            l.offset.to_string(),
            l.allowed.to_string(),
        ])
        .expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory write")).expect("UTF-8");
    format!("{preamble}{body}")
}
