//! King-plot regression and field-shift inversion.
//!
//! The isotope shift of line `i` between isotopes `A` and `A'` splits into a
//! mass term and a field term,
//! `dnu = k_MS (1/A - 1/A') + F_i * lambda`, where `lambda` is to lowest order
//! the change in mean-square nuclear charge radius. Plotting the normalised
//! shifts of one line against another removes `lambda` and leaves a straight
//! line whose slope is the ratio of field-shift constants.

use alloc::vec::Vec;

use crate::constants::{ELECTRON_MASS_AMU, RED_WAVELENGTH, SPEED_OF_LIGHT};
use crate::linalg;
use crate::spectra::{Branch, IsotopeRecord, REFERENCE_MASS_NUMBER};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KingError {
    #[error("isotope {0} is the reference; its normalised shift is undefined")]
    ReferenceIsotope(u32),
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("x values have no spread; the line is undetermined")]
    SingularFit,
    #[error("point for A = {0} has non-positive weight")]
    BadWeight(u32),
    #[error("field-shift constant is zero")]
    ZeroFieldShift,
    #[error("isotope pair ({0}, {0}) has no shift")]
    SamePair(u32),
}

/// How shifts are normalised before plotting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide by `A - 138`.
    #[default]
    MassDifference,
    /// Divide by `1/A - 1/138` (modified King plot).
    InverseMass,
}

impl Normalization {
    pub fn divisor(self, mass_number: u32) -> Result<f64, KingError> {
        if mass_number == REFERENCE_MASS_NUMBER {
            return Err(KingError::ReferenceIsotope(mass_number));
        }
        let a = f64::from(mass_number);
        let r = f64::from(REFERENCE_MASS_NUMBER);
        Ok(match self {
            Normalization::MassDifference => a - r,
            Normalization::InverseMass => 1.0 / a - 1.0 / r,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Normalization::MassDifference => "mass-difference",
            Normalization::InverseMass => "inverse-mass",
        }
    }
}

pub fn normalized_shift(
    iso: &IsotopeRecord,
    branch: Branch,
    normalization: Normalization,
) -> Result<f64, KingError> {
    Ok(iso.shift(branch).value / normalization.divisor(iso.mass_number)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KingPoint {
    pub mass_number: u32,
    /// Normalised blue-line shift.
    pub x: f64,
    /// Normalised red-line shift.
    pub y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub weight: f64,
}

impl KingPoint {
    /// Point from a table row; sigmas are statistical and systematic
    /// uncertainties in quadrature, weight is `1 / sigma_y^2`.
    pub fn from_record(iso: &IsotopeRecord, normalization: Normalization) -> Result<Self, KingError> {
        let d = normalization.divisor(iso.mass_number)?;
        let sigma_x = iso.shift_b.total_uncertainty() / d.abs();
        let sigma_y = iso.shift_r.total_uncertainty() / d.abs();
        let weight = if sigma_y > 0.0 { 1.0 / (sigma_y * sigma_y) } else { 1.0 };
        Ok(KingPoint {
            mass_number: iso.mass_number,
            x: iso.shift_b.value / d,
            y: iso.shift_r.value / d,
            sigma_x,
            sigma_y,
            weight,
        })
    }
}

/// Points for every non-reference record whose mass number is not excluded.
pub fn king_points(
    records: &[IsotopeRecord],
    normalization: Normalization,
    exclude: &[u32],
) -> Vec<KingPoint> {
    records
        .iter()
        .filter(|r| r.mass_number != REFERENCE_MASS_NUMBER && !exclude.contains(&r.mass_number))
        .map(|r| KingPoint::from_record(r, normalization).expect("reference filtered out"))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KingFit {
    pub slope: f64,
    pub intercept: f64,
    /// `y - (slope x + intercept)` per input point, in input order.
    pub residuals: Vec<f64>,
    /// Covariance of (slope, intercept), assuming weights are inverse variances.
    pub covariance: [[f64; 2]; 2],
    pub chi_squared: f64,
    /// Weights actually used in the final pass.
    pub weights: Vec<f64>,
}

impl KingFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    pub fn slope_uncertainty(&self) -> f64 {
        libm::sqrt(self.covariance[0][0])
    }

    /// `chi^2 / (n - 2)`, or 1 for an exactly determined line.
    pub fn reduced_chi_squared(&self) -> f64 {
        let dof = self.residuals.len().saturating_sub(2);
        if dof == 0 {
            1.0
        } else {
            self.chi_squared / dof as f64
        }
    }

    /// Slope uncertainty inflated by the observed scatter when it exceeds
    /// what the weights predict.
    pub fn slope_uncertainty_scaled(&self) -> f64 {
        self.slope_uncertainty() * libm::sqrt(self.reduced_chi_squared().max(1.0))
    }
}

fn weighted_line(points: &[KingPoint], weights: &[f64]) -> Result<KingFit, KingError> {
    if points.len() < 2 {
        return Err(KingError::TooFewPoints(points.len()));
    }
    for (p, &w) in points.iter().zip(weights) {
        if !(w > 0.0) || !w.is_finite() {
            return Err(KingError::BadWeight(p.mass_number));
        }
    }

    let xmax = points.iter().fold(0.0f64, |m, p| m.max(p.x.abs()));
    let x0 = points[0].x;
    if points.iter().all(|p| (p.x - x0).abs() <= 1e-12 * xmax) {
        return Err(KingError::SingularFit);
    }

    // Centre on the weighted means so the normal equations stay well conditioned.
    let sw: f64 = weights.iter().sum();
    let xm = points.iter().zip(weights).map(|(p, w)| w * p.x).sum::<f64>() / sw;
    let ym = points.iter().zip(weights).map(|(p, w)| w * p.y).sum::<f64>() / sw;
    let sxx: f64 = points.iter().zip(weights).map(|(p, w)| w * (p.x - xm) * (p.x - xm)).sum();
    let sxy: f64 = points.iter().zip(weights).map(|(p, w)| w * (p.x - xm) * (p.y - ym)).sum();
    if sxx <= 0.0 {
        return Err(KingError::SingularFit);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;

    let normal = [
        [weights.iter().zip(points).map(|(w, p)| w * p.x * p.x).sum(), sw * xm],
        [sw * xm, sw],
    ];
    let covariance = linalg::invert(&normal).ok_or(KingError::SingularFit)?;

    let residuals: Vec<f64> = points.iter().map(|p| p.y - (slope * p.x + intercept)).collect();
    let chi_squared = residuals.iter().zip(weights).map(|(r, w)| w * r * r).sum();
    Ok(KingFit {
        slope,
        intercept,
        residuals,
        covariance,
        chi_squared,
        weights: weights.to_vec(),
    })
}

/// Weighted least-squares line through `points` using their `weight` field.
pub fn fit_king_line(points: &[KingPoint]) -> Result<KingFit, KingError> {
    let weights: Vec<f64> = points.iter().map(|p| p.weight).collect();
    weighted_line(points, &weights)
}

/// Fit with y-errors first, then refit once with the effective variance
/// `sigma_y^2 + slope^2 sigma_x^2`.
pub fn fit_king_line_effective_variance(points: &[KingPoint]) -> Result<KingFit, KingError> {
    let first = fit_king_line(points)?;
    let m2 = first.slope * first.slope;
    let weights: Vec<f64> = points
        .iter()
        .map(|p| {
            let var = p.sigma_y * p.sigma_y + m2 * p.sigma_x * p.sigma_x;
            if var > 0.0 {
                1.0 / var
            } else {
                p.weight
            }
        })
        .collect();
    weighted_line(points, &weights)
}

/// Mass-shift contribution to an isotope shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassShift {
    /// The whole mass contribution for the pair, MHz.
    PerPair(f64),
    /// `k_MS` in MHz amu, multiplied by `1/A - 1/A'`.
    Constant(f64),
    /// A per-pair specific mass shift in MHz plus the normal mass shift
    /// `-nu (m_e/u) (1/A - 1/A')` of a line at `transition_frequency` MHz.
    SpecificPlusNormal {
        specific: f64,
        transition_frequency: f64,
    },
}

impl MassShift {
    pub fn contribution(&self, pair: (u32, u32)) -> f64 {
        let mu = 1.0 / f64::from(pair.0) - 1.0 / f64::from(pair.1);
        match *self {
            MassShift::PerPair(m) => m,
            MassShift::Constant(k) => k * mu,
            MassShift::SpecificPlusNormal {
                specific,
                transition_frequency,
            } => specific - transition_frequency * ELECTRON_MASS_AMU * mu,
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            MassShift::PerPair(_) => "per-pair total mass shift",
            MassShift::Constant(_) => "k_MS times (1/A - 1/A')",
            MassShift::SpecificPlusNormal { .. } => "per-pair specific mass shift plus normal mass shift",
        }
    }
}

/// Frequency of the 650 nm line, MHz.
pub fn red_line_frequency() -> f64 {
    SPEED_OF_LIGHT / RED_WAVELENGTH * 1e-6
}

/// The ways a bare "360 MHz" specific mass shift can be read.
pub fn mass_shift_readings(value: f64, transition_frequency: f64) -> [MassShift; 3] {
    [
        MassShift::PerPair(value),
        MassShift::Constant(value),
        MassShift::SpecificPlusNormal {
            specific: value,
            transition_frequency,
        },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldShiftModel {
    /// MHz / fm^2.
    pub field_shift: f64,
    pub mass_shift: MassShift,
    pub reference: u32,
}

impl FieldShiftModel {
    /// 650 nm line: F = 988 MHz/fm^2 and a 360 MHz specific mass shift
    /// added to the normal mass shift.
    pub fn barium_red() -> Self {
        FieldShiftModel {
            field_shift: 988.0,
            mass_shift: MassShift::SpecificPlusNormal {
                specific: 360.0,
                transition_frequency: red_line_frequency(),
            },
            reference: REFERENCE_MASS_NUMBER,
        }
    }

    /// Isotope shift for `A` against the model's reference.
    pub fn forward(&self, lambda: f64, mass_number: u32) -> f64 {
        self.mass_shift.contribution((mass_number, self.reference)) + self.field_shift * lambda
    }
}

/// `lambda = (dnu - mass term) / F`, in fm^2.
pub fn invert_field_shift(
    dnu: f64,
    pair: (u32, u32),
    model: &FieldShiftModel,
) -> Result<f64, KingError> {
    if model.field_shift == 0.0 {
        return Err(KingError::ZeroFieldShift);
    }
    if pair.0 == pair.1 {
        return Err(KingError::SamePair(pair.0));
    }
    Ok((dnu - model.mass_shift.contribution(pair)) / model.field_shift)
}
