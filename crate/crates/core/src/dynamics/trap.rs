use alloc::string::String;
use alloc::vec::Vec;

use super::{DynamicsError, IonState, Vec3};
use crate::constants::{ATOMIC_MASS_UNIT, COULOMB_CONSTANT, ELEMENTARY_CHARGE, TWO_PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrapMode {
    FullRf,
    Pseudopotential,
}

/// Ideal linear quadrupole with a static axial well.
///
/// `omega_z` is the axial frequency of a singly charged ion of mass
/// `axial_reference_mass`; the static spring constant scales with charge
/// only, so other species see `omega_z * sqrt(m_ref / m)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapConfig {
    /// m.
    pub r0: f64,
    /// RF amplitude (half of peak-to-peak), V.
    pub v0: f64,
    /// RF drive, rad/s.
    pub omega: f64,
    /// rad/s.
    pub omega_z: f64,
    /// kg.
    pub axial_reference_mass: f64,
    pub mode: TrapMode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrapWarning {
    /// Mathieu q above 0.5: the lowest-order secular relations degrade.
    HighQ { species: String, q: f64 },
}

impl TrapConfig {
    /// 3 mm to the electrodes, 200 V peak-to-peak at 1 MHz.
    pub fn ucla(omega_z: f64, mode: TrapMode) -> Self {
        TrapConfig {
            r0: 3e-3,
            v0: 100.0,
            omega: TWO_PI * 1e6,
            omega_z,
            axial_reference_mass: 138.0 * ATOMIC_MASS_UNIT,
            mode,
        }
    }

    pub fn rf_period(&self) -> f64 {
        TWO_PI / self.omega
    }

    /// `q = 2 Q V0 / (m r0^2 Omega^2)`.
    pub fn mathieu_q(&self, mass: f64, charge: f64) -> f64 {
        2.0 * charge * self.v0 / (mass * self.r0 * self.r0 * self.omega * self.omega)
    }

    /// Static axial spring constant for a given charge, N/m.
    pub fn axial_spring(&self, charge: f64) -> f64 {
        self.axial_reference_mass * self.omega_z * self.omega_z * charge / ELEMENTARY_CHARGE
    }

    pub fn axial_frequency(&self, mass: f64, charge: f64) -> f64 {
        libm::sqrt(self.axial_spring(charge) / mass)
    }

    /// Lowest-order RF secular frequency `q Omega / (2 sqrt 2)`, ignoring
    /// the static defocusing.
    pub fn rf_secular_frequency(&self, mass: f64, charge: f64) -> f64 {
        self.mathieu_q(mass, charge) * self.omega / (2.0 * core::f64::consts::SQRT_2)
    }

    /// Squared pseudopotential radial frequency including the static
    /// defocusing `-omega_z^2 / 2`.
    pub fn radial_frequency_sq(&self, mass: f64, charge: f64) -> f64 {
        let w = self.rf_secular_frequency(mass, charge);
        w * w - 0.5 * self.axial_spring(charge) / mass
    }

    pub fn radial_frequency(&self, mass: f64, charge: f64) -> f64 {
        libm::sqrt(self.radial_frequency_sq(mass, charge).max(0.0))
    }

    /// Characteristic crystal length `(k_e e^2 / k_z)^(1/3)` for unit charges.
    pub fn length_scale(&self) -> f64 {
        let k = self.axial_spring(ELEMENTARY_CHARGE);
        libm::cbrt(COULOMB_CONSTANT * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / k)
    }

    /// Largest secular frequency among the given ions.
    pub fn max_secular_frequency(&self, ions: &[IonState]) -> f64 {
        ions.iter()
            .map(|i| {
                self.radial_frequency(i.mass, i.charge)
                    .max(self.axial_frequency(i.mass, i.charge))
            })
            .fold(0.0, f64::max)
    }

    /// Largest stable time step: 1/50 of the shortest relevant period.
    pub fn max_step(&self, ions: &[IonState]) -> f64 {
        match self.mode {
            TrapMode::FullRf => self.rf_period() / 50.0,
            TrapMode::Pseudopotential => TWO_PI / self.max_secular_frequency(ions) / 50.0,
        }
    }

    /// Geometry checks plus per-species stability.
    pub fn validate(&self, ions: &[IonState]) -> Result<Vec<TrapWarning>, DynamicsError> {
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(DynamicsError::InvalidTrap("r0 must be positive"));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(DynamicsError::InvalidTrap("Omega must be positive"));
        }
        if !(self.omega_z >= 0.0) || !(self.axial_reference_mass > 0.0) || !self.v0.is_finite() {
            return Err(DynamicsError::InvalidTrap("axial confinement must be non-negative"));
        }
        let mut warnings: Vec<TrapWarning> = Vec::new();
        for ion in ions {
            if warnings.iter().any(|w| matches!(w, TrapWarning::HighQ { species, .. } if *species == ion.species)) {
                continue;
            }
            let q = self.mathieu_q(ion.mass, ion.charge).abs();
            if q >= 0.9 {
                return Err(DynamicsError::Unstable {
                    species: ion.species.clone(),
                    q,
                });
            }
            let w2 = self.radial_frequency_sq(ion.mass, ion.charge);
            if w2 <= 0.0 {
                return Err(DynamicsError::NoRadialConfinement {
                    species: ion.species.clone(),
                    omega_sq: w2,
                });
            }
            if q > 0.5 {
                warnings.push(TrapWarning::HighQ {
                    species: ion.species.clone(),
                    q,
                });
            }
        }
        Ok(warnings)
    }
}

/// Trap force on one ion at time `t`.
pub fn trap_force(ion: &IonState, t: f64, trap: &TrapConfig) -> Vec3 {
    let [x, y, z] = ion.position;
    let kz = trap.axial_spring(ion.charge);
    match trap.mode {
        TrapMode::FullRf => {
            let e = ion.charge * trap.v0 * libm::cos(trap.omega * t) / (trap.r0 * trap.r0);
            [e * x + 0.5 * kz * x, -e * y + 0.5 * kz * y, -kz * z]
        }
        TrapMode::Pseudopotential => {
            let kr = ion.mass * trap.radial_frequency_sq(ion.mass, ion.charge);
            [-kr * x, -kr * y, -kz * z]
        }
    }
}

/// Potential energy in the pseudopotential picture (the full RF field has
/// no conserved energy).
pub fn trap_potential_energy(ion: &IonState, trap: &TrapConfig) -> f64 {
    let [x, y, z] = ion.position;
    let kz = trap.axial_spring(ion.charge);
    let kr = ion.mass * trap.radial_frequency_sq(ion.mass, ion.charge);
    0.5 * kr * (x * x + y * y) + 0.5 * kz * z * z
}
