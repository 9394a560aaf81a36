//! Phase-modulation tone combs and their effect on trapped isotopes.
//!
//! A laser carrier sent through an electro-optic modulator driven at
//! frequencies `f_i` produces tones at `carrier + sum_i n_i f_i`. Whether a
//! tone cools or heats an ion depends only on the sign of its detuning from
//! a dipole-allowed line: red of resonance cools, blue heats. No sideband
//! amplitudes are modelled, so classification is purely geometric.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::spectra::{transition_lines, Branch, IsotopeRecord, TransitionLine};
use crate::spin::HalfInt;

pub const MAX_DRIVES: usize = 3;
pub const MAX_ORDER: u32 = 5;
pub const MAX_TONES: usize = 10_000;
/// Tones closer than this are merged, MHz.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SidebandError {
    #[error("at most {MAX_DRIVES} drives are supported, got {0}")]
    TooManyDrives(usize),
    #[error("drive frequency must be positive and finite, got {0} MHz")]
    BadDriveFrequency(f64),
    #[error("drive order {0} exceeds the limit of {MAX_ORDER}")]
    OrderTooHigh(u32),
    #[error("comb would hold {0} tones (limit {MAX_TONES})")]
    TooManyTones(usize),
    #[error("capture range must be positive, got {0} MHz")]
    BadCaptureRange(f64),
    #[error("scan window ({0}, {1}) MHz is empty or not finite")]
    BadScan(f64, f64),
    #[error("isotope {0} is not in the registry")]
    UnknownIsotope(u32),
    #[error("target cannot be cooled, unaddressed: {}", .0.join(", "))]
    MissingCoolingTones(Vec<String>),
    #[error("target would be heated by {} tone(s)", .offending.len())]
    PlanInvalid { offending: Vec<ToneEffect> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSpec {
    /// MHz.
    pub frequency: f64,
    pub max_order: u32,
}

/// Where a tone comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ToneOrigin {
    /// Fixed comb tone with one order per drive (unused slots are zero).
    Comb { orders: [i32; MAX_DRIVES] },
    /// First-order sideband swept through the scan window; `sideband` is the
    /// tone's offset from its carrier.
    Scan { sideband: f64 },
}

impl ToneOrigin {
    pub fn is_carrier(&self) -> bool {
        matches!(self, ToneOrigin::Comb { orders } if orders.iter().all(|&n| n == 0))
    }
}

impl fmt::Display for ToneOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToneOrigin::Comb { orders } if orders.iter().all(|&n| n == 0) => f.write_str("carrier"),
            ToneOrigin::Comb { orders } => write!(f, "orders {:?}", orders),
            ToneOrigin::Scan { sideband } => write!(f, "scan {:+.0} MHz", sideband),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tone {
    /// MHz relative to the 138Ba+ line of the comb's branch.
    pub offset: f64,
    pub origin: ToneOrigin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToneComb {
    pub branch: Branch,
    pub carrier_offset: f64,
    pub drives: Vec<DriveSpec>,
    /// Sorted by offset.
    pub tones: Vec<Tone>,
}

impl ToneComb {
    pub fn carrier(&self) -> &Tone {
        self.tones
            .iter()
            .find(|t| t.origin.is_carrier())
            .expect("comb always holds its carrier")
    }
}

/// All tones `carrier + sum n_i f_i` with `|n_i| <= max_order_i`.
///
/// Coincident tones are merged, keeping the signature with the smallest
/// total order.
pub fn generate_comb(
    carrier_offset: f64,
    drives: &[DriveSpec],
    branch: Branch,
) -> Result<ToneComb, SidebandError> {
    if drives.len() > MAX_DRIVES {
        return Err(SidebandError::TooManyDrives(drives.len()));
    }
    let mut count = 1usize;
    for d in drives {
        if !(d.frequency > 0.0) || !d.frequency.is_finite() {
            return Err(SidebandError::BadDriveFrequency(d.frequency));
        }
        if d.max_order > MAX_ORDER {
            return Err(SidebandError::OrderTooHigh(d.max_order));
        }
        count = count.saturating_mul(2 * d.max_order as usize + 1);
    }
    if count > MAX_TONES {
        return Err(SidebandError::TooManyTones(count));
    }

    let mut signatures: Vec<[i32; MAX_DRIVES]> = Vec::with_capacity(count);
    signatures.push([0; MAX_DRIVES]);
    for (k, d) in drives.iter().enumerate() {
        let m = d.max_order as i32;
        let mut next = Vec::with_capacity(signatures.len() * (2 * m as usize + 1));
        for sig in &signatures {
            for n in -m..=m {
                let mut s = *sig;
                s[k] = n;
                next.push(s);
            }
        }
        signatures = next;
    }
    // Lowest total order first, so merging keeps the simplest signature.
    signatures.sort_by_key(|s| (s.iter().map(|n| n.unsigned_abs()).sum::<u32>(), *s));

    let mut tones: Vec<Tone> = Vec::with_capacity(signatures.len());
    for orders in signatures {
        let shift: f64 = drives
            .iter()
            .zip(orders)
            .map(|(d, n)| f64::from(n) * d.frequency)
            .sum();
        let offset = carrier_offset + shift;
        if tones.iter().all(|t| (t.offset - offset).abs() > DEDUP_TOLERANCE) {
            tones.push(Tone {
                offset,
                origin: ToneOrigin::Comb { orders },
            });
        }
    }
    tones.sort_by(|a, b| a.offset.total_cmp(&b.offset));
    Ok(ToneComb {
        branch,
        carrier_offset,
        drives: drives.to_vec(),
        tones,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ToneClass {
    Cooling,
    Heating,
    Idle,
}

impl ToneClass {
    /// Red within the capture range cools, blue heats; exact resonance and
    /// anything outside the range is idle.
    pub fn from_detuning(detuning: f64, capture_range: f64) -> Self {
        if detuning < 0.0 && detuning >= -capture_range {
            ToneClass::Cooling
        } else if detuning > 0.0 && detuning <= capture_range {
            ToneClass::Heating
        } else {
            ToneClass::Idle
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ToneClass::Cooling => "cooling",
            ToneClass::Heating => "heating",
            ToneClass::Idle => "idle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToneEffect {
    pub isotope: u32,
    pub line: TransitionLine,
    pub tone_offset: f64,
    pub origin: ToneOrigin,
    /// Tone minus line, MHz.
    pub detuning: f64,
    pub class: ToneClass,
    /// Low-intensity scattering rate relative to resonance,
    /// `1 / (1 + (2 detuning / linewidth)^2)`.
    pub relative_rate: f64,
}

fn check_capture(capture_range: f64) -> Result<(), SidebandError> {
    if capture_range > 0.0 && capture_range.is_finite() {
        Ok(())
    } else {
        Err(SidebandError::BadCaptureRange(capture_range))
    }
}

fn classify_into(
    out: &mut Vec<ToneEffect>,
    branch: Branch,
    tones: &[Tone],
    isotopes: &[IsotopeRecord],
    capture_range: f64,
    linewidth: f64,
) {
    for iso in isotopes {
        let lines = transition_lines(iso, branch);
        for line in lines.iter().filter(|l| l.allowed) {
            for tone in tones {
                let detuning = tone.offset - line.offset;
                if detuning.abs() > capture_range {
                    continue;
                }
                let x = 2.0 * detuning / linewidth;
                out.push(ToneEffect {
                    isotope: iso.mass_number,
                    line: *line,
                    tone_offset: tone.offset,
                    origin: tone.origin,
                    detuning,
                    class: ToneClass::from_detuning(detuning, capture_range),
                    relative_rate: 1.0 / (1.0 + x * x),
                });
            }
        }
    }
}

fn sort_effects(effects: &mut [ToneEffect]) {
    effects.sort_by(|a, b| {
        a.isotope
            .cmp(&b.isotope)
            .then(a.detuning.abs().total_cmp(&b.detuning.abs()))
            .then(a.tone_offset.total_cmp(&b.tone_offset))
    });
}

/// Every (tone, allowed line) pair within `capture_range`, sorted by isotope
/// then by `|detuning|`.
pub fn classify_tones(
    comb: &ToneComb,
    isotopes: &[IsotopeRecord],
    capture_range: f64,
    linewidth: f64,
) -> Result<Vec<ToneEffect>, SidebandError> {
    check_capture(capture_range)?;
    let mut out = Vec::new();
    classify_into(&mut out, comb.branch, &comb.tones, isotopes, capture_range, linewidth);
    sort_effects(&mut out);
    Ok(out)
}

/// One laser of a loading plan.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanEntry {
    pub branch: Branch,
    pub carrier_offset: f64,
    pub drives: Vec<DriveSpec>,
    /// Window `(lo, hi)` in MHz, relative to the carrier, swept by a single
    /// first-order sideband.
    pub scan: Option<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanConfig {
    /// MHz.
    pub capture_range: f64,
    /// Reporting only, MHz.
    pub linewidth: f64,
    /// Scan discretisation, MHz.
    pub scan_step: f64,
    /// Largest blue detuning tolerated on a target repump line, MHz.
    pub repump_tolerance: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            capture_range: 500.0,
            linewidth: crate::constants::BLUE_LINEWIDTH_MHZ,
            scan_step: 1.0,
            repump_tolerance: crate::constants::WAVEMETER_SYSTEMATIC_MHZ,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesVerdict {
    pub isotope: u32,
    pub cooling: usize,
    pub heating: usize,
    /// Distinct tone origins producing a heating classification, by plan entry.
    pub heating_origins: Vec<(usize, ToneOrigin)>,
    /// Heating effect closest to resonance.
    pub nearest_heating: Option<ToneEffect>,
}

impl SpeciesVerdict {
    pub fn heated(&self) -> bool {
        self.heating > 0
    }

    /// Whether the work is done by the scanned sideband, by fixed comb tones, or both.
    pub fn heating_source(&self) -> &'static str {
        let scan = self
            .heating_origins
            .iter()
            .any(|(_, o)| matches!(o, ToneOrigin::Scan { .. }));
        let comb = self
            .heating_origins
            .iter()
            .any(|(_, o)| matches!(o, ToneOrigin::Comb { .. }));
        match (scan, comb) {
            (true, true) => "scan+comb",
            (true, false) => "scan",
            (false, true) => "comb",
            (false, false) => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanReport {
    pub target: u32,
    /// Target effects on its cycling lines; all cooling.
    pub target_cooling: Vec<ToneEffect>,
    /// Target effects on repump lines (lower level outside the cycle).
    pub target_repump: Vec<ToneEffect>,
    pub contaminants: Vec<SpeciesVerdict>,
    pub uncovered: Vec<u32>,
}

impl PlanReport {
    pub fn valid(&self) -> bool {
        self.uncovered.is_empty()
    }
}

fn describe_level(branch: Branch, f: HalfInt) -> String {
    alloc::format!("{} F={} ({}-branch)", branch.lower(), f, branch)
}

/// Check a loading plan: the target must only be cooled on its cycling
/// lines and every contaminant must be heated somewhere in the plan.
///
/// The cycling lower level of each branch is the one whose line lies
/// closest to a carrier. Lines from other lower levels are repump lines;
/// a blue tone on one of those is tolerated up to `repump_tolerance`.
pub fn plan_report(
    registry: &[IsotopeRecord],
    target: u32,
    contaminants: &[u32],
    plan: &[PlanEntry],
    config: &PlanConfig,
) -> Result<PlanReport, SidebandError> {
    check_capture(config.capture_range)?;
    let find = |a: u32| {
        registry
            .iter()
            .find(|r| r.mass_number == a)
            .cloned()
            .ok_or(SidebandError::UnknownIsotope(a))
    };
    let target_rec = find(target)?;
    let contaminant_recs: Vec<IsotopeRecord> =
        contaminants.iter().map(|&a| find(a)).collect::<Result<_, _>>()?;

    // (entry index, effect)
    let mut target_effects: Vec<(usize, ToneEffect)> = Vec::new();
    let mut contaminant_effects: Vec<(usize, ToneEffect)> = Vec::new();
    for (k, entry) in plan.iter().enumerate() {
        let comb = generate_comb(entry.carrier_offset, &entry.drives, entry.branch)?;
        let mut tones = comb.tones.clone();
        if let Some((lo, hi)) = entry.scan {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() || !(config.scan_step > 0.0) {
                return Err(SidebandError::BadScan(lo, hi));
            }
            let steps = libm::floor((hi - lo) / config.scan_step + 1e-9) as usize;
            tones.extend((0..=steps).map(|i| {
                let sideband = lo + i as f64 * config.scan_step;
                Tone {
                    offset: entry.carrier_offset + sideband,
                    origin: ToneOrigin::Scan { sideband },
                }
            }));
        }
        let mut buf = Vec::new();
        classify_into(
            &mut buf,
            entry.branch,
            &tones,
            core::slice::from_ref(&target_rec),
            config.capture_range,
            config.linewidth,
        );
        target_effects.extend(buf.drain(..).map(|e| (k, e)));
        classify_into(
            &mut buf,
            entry.branch,
            &tones,
            &contaminant_recs,
            config.capture_range,
            config.linewidth,
        );
        contaminant_effects.extend(buf.drain(..).map(|e| (k, e)));
    }

    // Every lower level of the blue branch needs a tone (no dark ground
    // level), and at least one red line must be addressed to repump D3/2.
    let mut missing = Vec::new();
    for f in HalfInt::couple(target_rec.spin, Branch::Blue.lower().j()) {
        let hit = target_effects
            .iter()
            .any(|(_, e)| e.line.branch == Branch::Blue && e.line.f_lower == f);
        if !hit {
            missing.push(describe_level(Branch::Blue, f));
        }
    }
    if !target_effects.iter().any(|(_, e)| e.line.branch == Branch::Red) {
        missing.push(alloc::format!("{} (r-branch)", Branch::Red.lower()));
    }
    if !missing.is_empty() {
        return Err(SidebandError::MissingCoolingTones(missing));
    }

    // Cycling lower level per branch: the target line nearest any carrier.
    let mut cycling: Vec<(Branch, HalfInt)> = Vec::new();
    for branch in Branch::ALL {
        let nearest = target_effects
            .iter()
            .filter(|(_, e)| e.line.branch == branch && e.origin.is_carrier())
            .min_by(|a, b| a.1.detuning.abs().total_cmp(&b.1.detuning.abs()));
        if let Some((_, e)) = nearest {
            cycling.push((branch, e.line.f_lower));
        }
    }
    let is_cycling = |e: &ToneEffect| cycling.contains(&(e.line.branch, e.line.f_lower));

    let mut offending = Vec::new();
    let mut target_cooling = Vec::new();
    let mut target_repump = Vec::new();
    for (_, e) in &target_effects {
        if is_cycling(e) {
            if e.class == ToneClass::Heating {
                offending.push(*e);
            }
            target_cooling.push(*e);
        } else {
            if e.class == ToneClass::Heating && e.detuning > config.repump_tolerance {
                offending.push(*e);
            }
            target_repump.push(*e);
        }
    }
    if !offending.is_empty() {
        sort_effects(&mut offending);
        return Err(SidebandError::PlanInvalid { offending });
    }
    sort_effects(&mut target_cooling);
    sort_effects(&mut target_repump);

    let mut verdicts = Vec::new();
    for rec in &contaminant_recs {
        let mine: Vec<&(usize, ToneEffect)> = contaminant_effects
            .iter()
            .filter(|(_, e)| e.isotope == rec.mass_number)
            .collect();
        let mut heating_origins: Vec<(usize, ToneOrigin)> = Vec::new();
        let mut nearest_heating: Option<ToneEffect> = None;
        let mut cooling = 0;
        let mut heating = 0;
        for (k, e) in mine {
            match e.class {
                ToneClass::Cooling => cooling += 1,
                ToneClass::Heating => {
                    heating += 1;
                    // Scan tones collapse to one origin per entry.
                    let key = match e.origin {
                        ToneOrigin::Scan { .. } => ToneOrigin::Scan { sideband: f64::NAN },
                        o => o,
                    };
                    let seen = heating_origins.iter().any(|(kk, o)| {
                        *kk == *k
                            && match (o, &key) {
                                (ToneOrigin::Scan { .. }, ToneOrigin::Scan { .. }) => true,
                                _ => *o == key,
                            }
                    });
                    if !seen {
                        heating_origins.push((*k, key));
                    }
                    if nearest_heating.is_none_or(|n| e.detuning < n.detuning) {
                        nearest_heating = Some(*e);
                    }
                }
                ToneClass::Idle => {}
            }
        }
        verdicts.push(SpeciesVerdict {
            isotope: rec.mass_number,
            cooling,
            heating,
            heating_origins,
            nearest_heating,
        });
    }
    let uncovered = verdicts
        .iter()
        .filter(|v| !v.heated())
        .map(|v| v.isotope)
        .collect();

    Ok(PlanReport {
        target,
        target_cooling,
        target_repump,
        contaminants: verdicts,
        uncovered,
    })
}

/// The loading plan for 133Ba+: blue carrier 4218 MHz above the 138 line
/// with a 5872 MHz drive (second order depumps S1/2 F=0), a first-order
/// sideband swept from -4300 to -3800 MHz across the even isotopes, and a
/// red repumper 30 MHz below the D3/2 F=1 -> P1/2 F=0 line.
pub fn barium133_loading_plan(carrier_offset: f64) -> Vec<PlanEntry> {
    let red_line = crate::spectra::isotope(133)
        .and_then(|iso| {
            crate::spectra::transition_line(&iso, Branch::Red, Some((HalfInt::ONE, HalfInt::ZERO)))
        })
        .expect("133 is in the registry")
        .offset;
    alloc::vec![
        PlanEntry {
            branch: Branch::Blue,
            carrier_offset,
            drives: alloc::vec![DriveSpec {
                frequency: 5872.0,
                max_order: 2,
            }],
            scan: Some((-4300.0, -3800.0)),
        },
        PlanEntry {
            branch: Branch::Red,
            carrier_offset: red_line - 30.0,
            drives: Vec::new(),
            scan: None,
        },
    ]
}
