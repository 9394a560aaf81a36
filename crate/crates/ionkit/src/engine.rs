//! Rayon-parallel Coulomb forces.

use rayon::prelude::*;

use ionkit_core::dynamics::{pair_force, CoulombEngine, ReferenceEngine, Vec3};

/// Each ion sums the forces from all others on its own task, so no
/// reduction across threads is needed. The per-ion summation order differs
/// from [`ReferenceEngine`], so results agree with it only to rounding.
#[derive(Clone, Copy, Debug, Default)]
pub struct ParallelEngine;

impl CoulombEngine for ParallelEngine {
    fn forces(&self, positions: &[Vec3], charges: &[f64], alive: &[bool], out: &mut [Vec3]) -> u64 {
        out.par_iter_mut()
            .enumerate()
            .map(|(i, fi)| {
                *fi = [0.0; 3];
                if !alive[i] {
                    return 0;
                }
                let mut clamps = 0;
                for j in 0..positions.len() {
                    if j == i || !alive[j] {
                        continue;
                    }
                    let (f, c) = pair_force(positions[i], positions[j], charges[i], charges[j]);
                    // count each clamped pair once
                    clamps += u64::from(c && j > i);
                    for k in 0..3 {
                        fi[k] += f[k];
                    }
                }
                clamps
            })
            .sum()
    }

    fn deterministic(&self) -> bool {
        false
    }

    fn name(&self) -> &'static str {
        "parallel"
    }
}

/// Engine by name: `reference` or `parallel`.
pub fn by_name(name: &str) -> Option<&'static dyn CoulombEngine> {
    match name {
        "reference" => Some(&ReferenceEngine),
        "parallel" => Some(&ParallelEngine),
        _ => None,
    }
}
