use alloc::vec;
use alloc::vec::Vec;

use super::{IonState, Vec3};
use crate::constants::COULOMB_CONSTANT;

/// Separations below this are clamped, m.
pub const SOFT_CORE: f64 = 1e-9;

/// Force on the ion at `ri` from the one at `rj`, and whether the soft core
/// was used.
#[inline]
pub fn pair_force(ri: Vec3, rj: Vec3, qi: f64, qj: f64) -> (Vec3, bool) {
    let mut d = [ri[0] - rj[0], ri[1] - rj[1], ri[2] - rj[2]];
    let mut r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let clamped = r2 < SOFT_CORE * SOFT_CORE;
    if clamped {
        let r = libm::sqrt(r2);
        if r > 0.0 {
            let s = SOFT_CORE / r;
            d = [d[0] * s, d[1] * s, d[2] * s];
        } else {
            d = [0.0, 0.0, SOFT_CORE];
        }
        r2 = SOFT_CORE * SOFT_CORE;
    }
    let inv_r = 1.0 / libm::sqrt(r2);
    let c = COULOMB_CONSTANT * qi * qj * inv_r * inv_r * inv_r;
    ([c * d[0], c * d[1], c * d[2]], clamped)
}

/// Pairwise Coulomb force evaluation over the live ions.
pub trait CoulombEngine {
    /// Overwrite `out` with the Coulomb force on each ion; dead ions get zero
    /// and exert nothing. Returns the number of clamped pairs.
    fn forces(&self, positions: &[Vec3], charges: &[f64], alive: &[bool], out: &mut [Vec3]) -> u64;

    /// True when results are bit-reproducible run to run.
    fn deterministic(&self) -> bool;

    fn name(&self) -> &'static str;
}

/// Sequential `i < j` sweep with Newton's third law; the summation order is
/// fixed, so results are bitwise reproducible.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceEngine;

impl CoulombEngine for ReferenceEngine {
    fn forces(&self, positions: &[Vec3], charges: &[f64], alive: &[bool], out: &mut [Vec3]) -> u64 {
        let n = positions.len();
        for f in out.iter_mut() {
            *f = [0.0; 3];
        }
        let mut clamps = 0;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for j in i + 1..n {
                if !alive[j] {
                    continue;
                }
                let (f, c) = pair_force(positions[i], positions[j], charges[i], charges[j]);
                clamps += u64::from(c);
                for k in 0..3 {
                    out[i][k] += f[k];
                    out[j][k] -= f[k];
                }
            }
        }
        clamps
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "reference"
    }
}

/// Coulomb forces on the live ions with the reference engine.
pub fn coulomb_forces(ions: &[IonState]) -> (Vec<Vec3>, u64) {
    let pos: Vec<Vec3> = ions.iter().map(|i| i.position).collect();
    let q: Vec<f64> = ions.iter().map(|i| i.charge).collect();
    let alive: Vec<bool> = ions.iter().map(|i| i.alive).collect();
    let mut out = vec![[0.0; 3]; ions.len()];
    let clamps = ReferenceEngine.forces(&pos, &q, &alive, &mut out);
    (out, clamps)
}

/// Total Coulomb energy of the live ions, J.
pub fn coulomb_energy(ions: &[IonState]) -> f64 {
    let mut e = 0.0;
    for (i, a) in ions.iter().enumerate().filter(|(_, a)| a.alive) {
        for b in ions[i + 1..].iter().filter(|b| b.alive) {
            let d = [
                a.position[0] - b.position[0],
                a.position[1] - b.position[1],
                a.position[2] - b.position[2],
            ];
            let r = super::norm(d).max(SOFT_CORE);
            e += COULOMB_CONSTANT * a.charge * b.charge / r;
        }
    }
    e
}
