//! Hyperfine levels and transition offsets of Ba+ isotopes.
//!
//! Every frequency is in MHz and relative: hyperfine energies are offsets
//! from the degeneracy-weighted centroid of their fine-structure level, and
//! transition offsets are measured from the 138Ba+ line of the same branch.
//! Isotope shifts in the table are centroid-to-centroid, so a transition
//! offset is the table shift plus the upper minus the lower hyperfine energy.

mod measured;
mod registry;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::constants;
use crate::spin::HalfInt;

pub use measured::Measured;
pub use registry::{
    isotope, registry, IsotopeRecord, REFERENCE_MASS_NUMBER, TABLE, WAVEMETER_LIMITED,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error("F = {f} is not reachable from I = {i}, J = {j}")]
    InvalidF { i: HalfInt, j: HalfInt, f: HalfInt },
    #[error("quadrupole constant must vanish for I = {i}, J = {j} (got B = {b} MHz)")]
    QuadrupoleNotAllowed { i: HalfInt, j: HalfInt, b: f64 },
    #[error("isotope {0} has no nuclear spin; hyperfine F labels do not apply")]
    HyperfineOnSpinless(u32),
    #[error("isotope {0} has nuclear spin; F labels are required")]
    MissingF(u32),
    #[error("no isotope with mass number {0} in the registry")]
    UnknownIsotope(u32),
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("bad spin {0:?}")]
    BadSpin(String),
    #[error("record for A = {0} is inconsistent: {1}")]
    InvalidRecord(u32, &'static str),
}

/// Fine-structure level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    S12,
    P12,
    D32,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::S12, Term::P12, Term::D32];

    pub fn j(self) -> HalfInt {
        match self {
            Term::S12 | Term::P12 => HalfInt::HALF,
            Term::D32 => HalfInt::THREE_HALVES,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Term::S12 => "S1/2",
            Term::P12 => "P1/2",
            Term::D32 => "D3/2",
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Optical branch: `b` is 6S1/2 - 6P1/2 near 493 nm, `r` is 5D3/2 - 6P1/2 near 650 nm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Blue,
    Red,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Blue, Branch::Red];

    pub fn lower(self) -> Term {
        match self {
            Branch::Blue => Term::S12,
            Branch::Red => Term::D32,
        }
    }

    pub fn upper(self) -> Term {
        Term::P12
    }

    pub fn code(self) -> &'static str {
        match self {
            Branch::Blue => "b",
            Branch::Red => "r",
        }
    }

    /// Nominal vacuum wavelength, m.
    pub fn wavelength(self) -> f64 {
        match self {
            Branch::Blue => constants::BLUE_WAVELENGTH,
            Branch::Red => constants::RED_WAVELENGTH,
        }
    }

    /// Default natural linewidth Gamma/2pi, MHz.
    pub fn linewidth(self) -> f64 {
        match self {
            Branch::Blue => constants::BLUE_LINEWIDTH_MHZ,
            Branch::Red => constants::RED_LINEWIDTH_MHZ,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Branch {
    type Err = SpectraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "b" | "B" | "blue" | "493" => Ok(Branch::Blue),
            "r" | "R" | "red" | "650" => Ok(Branch::Red),
            other => Err(SpectraError::BadNumber(other.into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperfineLevel {
    pub term: Term,
    pub f: HalfInt,
    /// MHz from the fine-structure centroid.
    pub energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionLine {
    pub isotope: u32,
    pub branch: Branch,
    pub f_lower: HalfInt,
    pub f_upper: HalfInt,
    /// MHz relative to the 138Ba+ line of the same branch.
    pub offset: f64,
    pub allowed: bool,
}

/// Electric-dipole selection rule on F: `|dF| <= 1`, and no `0 -> 0`.
pub fn dipole_allowed(f_lower: HalfInt, f_upper: HalfInt) -> bool {
    let both_zero = f_lower == HalfInt::ZERO && f_upper == HalfInt::ZERO;
    !both_zero && f_lower.twice().abs_diff(f_upper.twice()) <= 2
}

/// Hyperfine energy of level F in MHz, relative to the fine-structure centroid.
///
/// Magnetic dipole `(A/2) K` plus electric quadrupole
/// `B [ (3/2) K (K+1) - 2 I(I+1) J(J+1) ] / [ 2I(2I-1) 2J(2J-1) ]`,
/// with `K = F(F+1) - I(I+1) - J(J+1)`.
pub fn hyperfine_energy(
    i: HalfInt,
    j: HalfInt,
    f: HalfInt,
    a_const: f64,
    b_const: f64,
) -> Result<f64, SpectraError> {
    if !HalfInt::couples_to(i, j, f) {
        return Err(SpectraError::InvalidF { i, j, f });
    }
    let quadrupole_possible = i.twice() >= 2 && j.twice() >= 2;
    if b_const != 0.0 && !quadrupole_possible {
        return Err(SpectraError::QuadrupoleNotAllowed { i, j, b: b_const });
    }

    let (ii, jj) = (i.casimir(), j.casimir());
    let k = f.casimir() - ii - jj;
    let mut energy = 0.5 * a_const * k;
    if quadrupole_possible && b_const != 0.0 {
        let (iv, jv) = (i.value(), j.value());
        let num = 1.5 * k * (k + 1.0) - 2.0 * ii * jj;
        let den = 2.0 * iv * (2.0 * iv - 1.0) * 2.0 * jv * (2.0 * jv - 1.0);
        energy += b_const * num / den;
    }
    Ok(energy)
}

/// All hyperfine levels of `term` for an isotope, ordered by F.
pub fn hyperfine_levels(iso: &IsotopeRecord, term: Term) -> Vec<HyperfineLevel> {
    let (a, b) = (iso.a_constant(term), iso.b_constant(term));
    HalfInt::couple(iso.spin, term.j())
        .map(|f| HyperfineLevel {
            term,
            f,
            // F comes from the coupling range and B is only present where allowed.
            energy: hyperfine_energy(iso.spin, term.j(), f, a, b)
                .expect("registry record violates its own invariants"),
        })
        .collect()
}

/// Energy of `F = f_high` minus energy of `F = f_low` within one term.
pub fn splitting(
    iso: &IsotopeRecord,
    term: Term,
    f_low: HalfInt,
    f_high: HalfInt,
) -> Result<f64, SpectraError> {
    let (a, b, j) = (iso.a_constant(term), iso.b_constant(term), term.j());
    Ok(hyperfine_energy(iso.spin, j, f_high, a, b)? - hyperfine_energy(iso.spin, j, f_low, a, b)?)
}

/// Transition offset for one hyperfine component of `branch`.
///
/// `f` is `(F_lower, F_upper)`. It must be `None` for spinless isotopes and
/// `Some` otherwise.
pub fn transition_line(
    iso: &IsotopeRecord,
    branch: Branch,
    f: Option<(HalfInt, HalfInt)>,
) -> Result<TransitionLine, SpectraError> {
    let (lower, upper) = (branch.lower(), branch.upper());
    let (f_lower, f_upper) = match (iso.spin == HalfInt::ZERO, f) {
        (true, Some(_)) => return Err(SpectraError::HyperfineOnSpinless(iso.mass_number)),
        (true, None) => (lower.j(), upper.j()),
        (false, None) => return Err(SpectraError::MissingF(iso.mass_number)),
        (false, Some(pair)) => pair,
    };
    let e_upper = hyperfine_energy(
        iso.spin,
        upper.j(),
        f_upper,
        iso.a_constant(upper),
        iso.b_constant(upper),
    )?;
    let e_lower = hyperfine_energy(
        iso.spin,
        lower.j(),
        f_lower,
        iso.a_constant(lower),
        iso.b_constant(lower),
    )?;
    Ok(TransitionLine {
        isotope: iso.mass_number,
        branch,
        f_lower,
        f_upper,
        offset: iso.shift(branch).value + e_upper - e_lower,
        allowed: dipole_allowed(f_lower, f_upper),
    })
}

/// Every hyperfine component of `branch`, forbidden ones included and flagged.
pub fn transition_lines(iso: &IsotopeRecord, branch: Branch) -> Vec<TransitionLine> {
    let spinless = iso.spin == HalfInt::ZERO;
    let mut out = Vec::new();
    for f_lower in HalfInt::couple(iso.spin, branch.lower().j()) {
        for f_upper in HalfInt::couple(iso.spin, branch.upper().j()) {
            let f = (!spinless).then_some((f_lower, f_upper));
            out.push(transition_line(iso, branch, f).expect("F drawn from coupling range"));
        }
    }
    out
}

/// Both branches for one isotope.
pub fn all_lines(iso: &IsotopeRecord) -> Vec<TransitionLine> {
    Branch::ALL
        .iter()
        .flat_map(|&b| transition_lines(iso, b))
        .collect()
}

#[cfg(test)]
mod tests;
