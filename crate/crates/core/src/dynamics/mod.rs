//! Molecular dynamics of ions in a linear RF Paul trap.
//!
//! Ions feel the trap (full time-dependent quadrupole or its pseudopotential),
//! their mutual Coulomb repulsion and stochastic photon kicks from laser
//! beams. Integration is velocity Verlet; scattering is applied as a Monte
//! Carlo kick after each step. Everything is SI.

mod coulomb;
mod crystal;
mod scatter;
mod sim;
mod trap;

use alloc::string::String;

pub use coulomb::{coulomb_energy, coulomb_forces, pair_force, CoulombEngine, ReferenceEngine, SOFT_CORE};
pub use crystal::{cold_crystal, crystal_extent, CrystalOptions};
pub use scatter::{scatter_step, scattering_rate, BeamSpec, Sweep, MAX_SCATTER_PROBABILITY};
pub use sim::{
    kinetic_temperature, measure_temperature, run_simulation, thermal_start, EnergySample, SimConfig, SimResult,
    TemperatureSample, TrajectorySample,
};
pub use trap::{trap_force, trap_potential_energy, TrapConfig, TrapMode, TrapWarning};

use crate::constants::{ATOMIC_MASS_UNIT, ELECTRON_MASS_AMU, ELEMENTARY_CHARGE};

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid trap: {0}")]
    InvalidTrap(&'static str),
    #[error("species {species} is unstable: Mathieu q = {q:.3}")]
    Unstable { species: String, q: f64 },
    #[error("species {species} has no radial confinement in the pseudopotential (omega_r^2 = {omega_sq:.3e})")]
    NoRadialConfinement { species: String, omega_sq: f64 },
    #[error("time step {dt:.3e} s exceeds the limit {limit:.3e} s")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("invalid beam {index}: {reason}")]
    InvalidBeam { index: usize, reason: &'static str },
    #[error("beam {index} scatters with probability {probability:.3} per step; reduce dt below {suggested_dt:.3e} s")]
    ScatterGuard {
        index: usize,
        probability: f64,
        suggested_dt: f64,
    },
    #[error("integration blew up at step {step}")]
    Blowup { step: u64 },
    #[error("no ions of species {0:?}")]
    EmptySpecies(String),
    #[error("averaging window {window:.3e} s is shorter than {minimum:.3e} s")]
    WindowTooShort { window: f64, minimum: f64 },
    #[error("unknown isotope {0}")]
    UnknownIsotope(u32),
    #[error("no ions")]
    NoIons,
}

/// Neutral atomic masses of the long-lived barium isotopes, amu (AME2020).
pub const BARIUM_ATOMIC_MASSES: [(u32, f64); 8] = [
    (130, 129.906_320_7),
    (132, 131.905_061_1),
    (133, 132.906_007_4),
    (134, 133.904_508_2),
    (135, 134.905_688_2),
    (136, 135.904_575_7),
    (137, 136.905_827_1),
    (138, 137.905_247_0),
];

/// Mass of the singly charged ion, amu.
pub fn barium_ion_mass_amu(mass_number: u32) -> Result<f64, DynamicsError> {
    BARIUM_ATOMIC_MASSES
        .iter()
        .find(|(a, _)| *a == mass_number)
        .map(|(_, m)| m - ELECTRON_MASS_AMU)
        .ok_or(DynamicsError::UnknownIsotope(mass_number))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IonState {
    pub species: String,
    /// kg.
    pub mass: f64,
    /// C.
    pub charge: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub alive: bool,
}

impl IonState {
    pub fn new(species: impl Into<String>, mass_amu: f64, charge_e: f64) -> Self {
        IonState {
            species: species.into(),
            mass: mass_amu * ATOMIC_MASS_UNIT,
            charge: charge_e * ELEMENTARY_CHARGE,
            position: [0.0; 3],
            velocity: [0.0; 3],
            alive: true,
        }
    }

    /// Singly charged barium ion labelled `Ba<A>`.
    pub fn barium(mass_number: u32) -> Result<Self, DynamicsError> {
        Ok(Self::new(
            alloc::format!("Ba{mass_number}"),
            barium_ion_mass_amu(mass_number)?,
            1.0,
        ))
    }

    pub fn at(mut self, position: Vec3) -> Self {
        self.position = position;
        self
    }

    pub fn moving(mut self, velocity: Vec3) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * dot(self.velocity, self.velocity)
    }
}

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}
