//! Cold-crystal equilibrium by direct minimisation of the secular potential.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DynamicsError, IonState, TrapConfig, Vec3};
use crate::constants::ELEMENTARY_CHARGE;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrystalOptions {
    /// Largest residual force component, in units of `k_z l`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Seeds the transverse jitter of the starting chain.
    pub seed: u64,
}

impl Default for CrystalOptions {
    fn default() -> Self {
        CrystalOptions {
            tolerance: 1e-10,
            max_iterations: 400_000,
            seed: 0,
        }
    }
}

/// Minimum-energy positions of `ions` in the pseudopotential of `trap`,
/// found with FIRE relaxation in units of the crystal length scale.
/// The result is in metres, in the order of `ions`.
pub fn cold_crystal(
    trap: &TrapConfig,
    ions: &[IonState],
    options: &CrystalOptions,
) -> Result<Vec<Vec3>, DynamicsError> {
    let n = ions.len();
    if n == 0 {
        return Err(DynamicsError::NoIons);
    }
    trap.validate(ions)?;
    let ell = trap.length_scale();
    let kz_e = trap.axial_spring(ELEMENTARY_CHARGE);
    let q: Vec<f64> = ions.iter().map(|i| i.charge / ELEMENTARY_CHARGE).collect();
    let kappa: Vec<f64> = ions
        .iter()
        .map(|i| i.mass * trap.radial_frequency_sq(i.mass, i.charge) / kz_e)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let spacing = 2.0 * libm::pow(n as f64, -0.4).max(0.2);
    let mut x: Vec<Vec3> = (0..n)
        .map(|i| {
            let jitter = 0.05;
            [
                jitter * (rng.random::<f64>() - 0.5),
                jitter * (rng.random::<f64>() - 0.5),
                (i as f64 - 0.5 * (n as f64 - 1.0)) * spacing,
            ]
        })
        .collect();

    let force = |x: &[Vec3], f: &mut [Vec3]| {
        for (i, fi) in f.iter_mut().enumerate() {
            *fi = [-kappa[i] * x[i][0], -kappa[i] * x[i][1], -q[i] * x[i][2]];
        }
        for i in 0..n {
            for j in i + 1..n {
                let d = [x[i][0] - x[j][0], x[i][1] - x[j][1], x[i][2] - x[j][2]];
                let r2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).max(1e-24);
                let c = q[i] * q[j] / (r2 * libm::sqrt(r2));
                for k in 0..3 {
                    f[i][k] += c * d[k];
                    f[j][k] -= c * d[k];
                }
            }
        }
    };

    // FIRE
    let (dt_max, n_min, f_inc, f_dec, alpha0, f_alpha): (f64, usize, f64, f64, f64, f64) =
        (0.2, 5, 1.1, 0.5, 0.1, 0.99);
    let mut dt: f64 = 0.02;
    let mut alpha = alpha0;
    let mut since_negative = 0usize;
    let mut v = vec![[0.0f64; 3]; n];
    let mut f = vec![[0.0f64; 3]; n];
    force(&x, &mut f);
    for _ in 0..options.max_iterations {
        let fmax = f
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()));
        if fmax < options.tolerance {
            break;
        }
        let p: f64 = v.iter().zip(&f).map(|(a, b)| super::dot(*a, *b)).sum();
        let vn = libm::sqrt(v.iter().map(|a| super::dot(*a, *a)).sum::<f64>());
        let fn_ = libm::sqrt(f.iter().map(|a| super::dot(*a, *a)).sum::<f64>());
        if p > 0.0 {
            for (vi, fi) in v.iter_mut().zip(&f) {
                for k in 0..3 {
                    vi[k] = (1.0 - alpha) * vi[k] + alpha * fi[k] / fn_ * vn;
                }
            }
            since_negative += 1;
            if since_negative > n_min {
                dt = (dt * f_inc).min(dt_max);
                alpha *= f_alpha;
            }
        } else {
            for vi in v.iter_mut() {
                *vi = [0.0; 3];
            }
            since_negative = 0;
            dt *= f_dec;
            alpha = alpha0;
        }
        // semi-implicit Euler
        for i in 0..n {
            for k in 0..3 {
                v[i][k] += dt * f[i][k];
                x[i][k] += dt * v[i][k];
            }
        }
        force(&x, &mut f);
    }

    Ok(x.into_iter().map(|p| [p[0] * ell, p[1] * ell, p[2] * ell]).collect())
}

/// Largest `|z|` of a configuration.
pub fn crystal_extent(positions: &[Vec3]) -> f64 {
    positions.iter().fold(0.0, |m, p| m.max(p[2].abs()))
}
