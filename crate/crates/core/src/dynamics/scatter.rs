use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use super::{dot, norm, DynamicsError, IonState, Vec3};
use crate::constants::{HBAR, TWO_PI};

/// Upper bound on the per-step scattering probability of any beam.
pub const MAX_SCATTER_PROBABILITY: f64 = 0.1;

/// Linear sawtooth on the detuning: `detuning + span * frac(t / period)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    /// MHz.
    pub span: f64,
    /// s.
    pub period: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamSpec {
    /// Unit propagation vector.
    pub direction: Vec3,
    /// m.
    pub wavelength: f64,
    /// Laser minus addressed line, MHz.
    pub detuning: f64,
    pub saturation: f64,
    /// Gamma/2pi of the addressed line, MHz.
    pub linewidth: f64,
    /// Species labels this beam interacts with.
    pub targets: Vec<String>,
    pub sweep: Option<Sweep>,
}

impl BeamSpec {
    pub fn validate(&self, index: usize) -> Result<(), DynamicsError> {
        let bad = |reason| Err(DynamicsError::InvalidBeam { index, reason });
        if (norm(self.direction) - 1.0).abs() > 1e-9 {
            return bad("direction must be a unit vector");
        }
        if !(self.wavelength > 0.0) {
            return bad("wavelength must be positive");
        }
        if !(self.saturation >= 0.0) || !self.saturation.is_finite() {
            return bad("saturation must be non-negative");
        }
        if !(self.linewidth > 0.0) || !self.linewidth.is_finite() {
            return bad("linewidth must be positive");
        }
        if !self.detuning.is_finite() {
            return bad("detuning must be finite");
        }
        if let Some(s) = self.sweep {
            if !(s.period > 0.0) || !s.span.is_finite() {
                return bad("sweep period must be positive");
            }
        }
        Ok(())
    }

    pub fn addresses(&self, species: &str) -> bool {
        self.targets.iter().any(|t| t == species)
    }

    /// MHz at time `t`.
    pub fn detuning_at(&self, t: f64) -> f64 {
        match self.sweep {
            None => self.detuning,
            Some(s) => {
                let phase = t / s.period;
                self.detuning + s.span * (phase - libm::floor(phase))
            }
        }
    }

    /// Gamma, rad/s.
    pub fn gamma(&self) -> f64 {
        TWO_PI * self.linewidth * 1e6
    }

    /// Wavevector, 1/m.
    pub fn wavevector(&self) -> Vec3 {
        let k = TWO_PI / self.wavelength;
        [k * self.direction[0], k * self.direction[1], k * self.direction[2]]
    }

    /// Resonant rate `(Gamma/2) s/(1+s)`, the largest rate at any velocity.
    pub fn max_rate(&self) -> f64 {
        0.5 * self.gamma() * self.saturation / (1.0 + self.saturation)
    }

    /// Fails when a single step could scatter with probability >= 0.1.
    pub fn check_step(&self, index: usize, dt: f64) -> Result<(), DynamicsError> {
        let p = self.max_rate() * dt.abs();
        if p >= MAX_SCATTER_PROBABILITY {
            return Err(DynamicsError::ScatterGuard {
                index,
                probability: p,
                suggested_dt: 0.99 * MAX_SCATTER_PROBABILITY / self.max_rate(),
            });
        }
        Ok(())
    }
}

/// Two-level rate `(Gamma/2) s / (1 + s + (2 delta_eff / Gamma)^2)`, 1/s,
/// with `delta_eff = delta - k.v`.
pub fn scattering_rate(beam: &BeamSpec, velocity: Vec3, t: f64) -> f64 {
    let g = beam.gamma();
    let delta = TWO_PI * beam.detuning_at(t) * 1e6 - dot(beam.wavevector(), velocity);
    let x = 2.0 * delta / g;
    0.5 * g * beam.saturation / (1.0 + beam.saturation + x * x)
}

/// Monte Carlo photon scattering over one step: with probability `R dt`
/// per beam the ion absorbs `hbar k` along the beam and re-emits in a
/// uniformly random direction. Returns the number of photons scattered.
pub fn scatter_step<R: Rng + ?Sized>(
    ion: &mut IonState,
    beams: &[BeamSpec],
    t: f64,
    dt: f64,
    rng: &mut R,
) -> Result<u32, DynamicsError> {
    let mut photons = 0;
    for (index, beam) in beams.iter().enumerate() {
        if !beam.addresses(&ion.species) || beam.saturation == 0.0 {
            continue;
        }
        beam.check_step(index, dt)?;
        let p = scattering_rate(beam, ion.velocity, t) * dt.abs();
        let u: f64 = rng.random();
        if u < p {
            let recoil = HBAR * TWO_PI / (beam.wavelength * ion.mass);
            let n: [f64; 3] = UnitSphere.sample(rng);
            for k in 0..3 {
                ion.velocity[k] += recoil * (beam.direction[k] + n[k]);
            }
            photons += 1;
        }
    }
    Ok(photons)
}
