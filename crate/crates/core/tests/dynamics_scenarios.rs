//! Long-running dynamics checks: Doppler limit, blue heating, a two-ion
//! crystal in the full RF field and one purification run.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ionkit_core::constants::*;
use ionkit_core::dynamics::*;
use ionkit_core::spectra::{isotope, transition_line, Branch};
use ionkit_core::HalfInt;

const H: f64 = FRAC_1_SQRT_2;

fn beam(dir: Vec3, wavelength: f64, detuning: f64, s: f64, lw: f64, species: &str) -> BeamSpec {
    BeamSpec {
        direction: dir,
        wavelength,
        detuning,
        saturation: s,
        linewidth: lw,
        targets: vec![species.into()],
        sweep: None,
    }
}

/// Counter-propagating pairs along two non-parallel directions. The radial
/// modes are degenerate, so a single axis leaves one of them undamped.
fn cooling_beams(detuning: f64, s: f64, lw: f64, species: &str) -> Vec<BeamSpec> {
    [[H, 0.0, H], [0.0, H, H], [-H, 0.0, -H], [0.0, -H, -H]]
        .into_iter()
        .map(|d| beam(d, BLUE_WAVELENGTH, detuning, s, lw, species))
        .collect()
}

fn doppler_ratio(scale: f64, seed: u64) -> f64 {
    let lw = BLUE_LINEWIDTH_MHZ * scale;
    let trap = TrapConfig::ucla(2.0 * PI * 50e3, TrapMode::FullRf);
    let mut ions = vec![IonState::barium(138).unwrap()];
    thermal_start(&trap, &mut ions, 2e-3, seed).unwrap();
    let beams = cooling_beams(-lw / 2.0, 0.1, lw, "Ba138");
    let cfg = SimConfig { dt: 5e-9, steps: 4_000_000, seed, ..SimConfig::default() };
    let r = run_simulation(&trap, ions, &beams, &cfg, &ReferenceEngine).unwrap();
    let t = measure_temperature(&r, "Ba138", 10e-3).unwrap();
    let limit = HBAR * 2.0 * PI * lw * 1e6 / (2.0 * BOLTZMANN);
    t / limit
}

#[test]
fn doppler_limit_within_factor_three() {
    for scale in [0.7, 1.0, 1.3] {
        let ratio = doppler_ratio(scale, 1);
        assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "scale {scale}: T/T_D = {ratio}");
    }
}

#[test]
fn blue_light_heats_only_its_species() {
    let trap = TrapConfig::ucla(2.0 * PI * 50e3, TrapMode::FullRf);
    let mut ions = vec![IonState::barium(138).unwrap(), IonState::barium(136).unwrap()];
    thermal_start(&trap, &mut ions, 1e-3, 2).unwrap();
    let lw = BLUE_LINEWIDTH_MHZ;
    let beams: Vec<BeamSpec> = [[H, 0.0, H], [0.0, H, H]]
        .into_iter()
        .map(|d| beam(d, BLUE_WAVELENGTH, lw / 2.0, 0.1, lw, "Ba136"))
        .collect();
    let cfg = SimConfig { dt: 5e-9, steps: 400_000, seed: 2, temperature_every: 20, ..SimConfig::default() };
    let r = run_simulation(&trap, ions, &beams, &cfg, &ReferenceEngine).unwrap();
    assert_eq!(r.photons[0], 0);
    assert!(r.photons[1] > 0);

    // block means over several secular periods each
    let k = r.species_index("Ba136").unwrap();
    let samples: Vec<f64> = r.temperatures.iter().map(|s| s.kelvin[k]).collect();
    let blocks: Vec<f64> = samples
        .chunks(samples.len() / 5)
        .take(5)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    for w in blocks.windows(2) {
        assert!(w[1] > w[0], "{blocks:?}");
    }
}

fn two_ion_spacing_oracle(trap: &TrapConfig) -> f64 {
    // k_e e^2 / d^2 = k_z d / 2
    let k = trap.axial_spring(ELEMENTARY_CHARGE);
    let f = |d: f64| COULOMB_CONSTANT * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (d * d) - 0.5 * k * d;
    let (mut lo, mut hi) = (1e-7, 1e-3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn two_ion_crystal_full_rf() {
    let trap = TrapConfig::ucla(2.0 * PI * 50e3, TrapMode::FullRf);
    let mut ions = vec![IonState::barium(138).unwrap(), IonState::barium(138).unwrap()];
    thermal_start(&trap, &mut ions, 2e-3, 5).unwrap();
    let beams = cooling_beams(-BLUE_LINEWIDTH_MHZ / 2.0, 0.1, BLUE_LINEWIDTH_MHZ, "Ba138");
    let cfg = SimConfig { dt: 5e-9, steps: 2_000_000, seed: 5, trajectory_every: 50, ..SimConfig::default() };
    let r = run_simulation(&trap, ions, &beams, &cfg, &ReferenceEngine).unwrap();
    assert!(r.retained("Ba138"));

    let late: Vec<_> = r.trajectory.iter().filter(|s| s.t > 5e-3).collect();
    let mut sum = 0.0;
    let mut n = 0;
    for pair in late.chunks(2) {
        let (a, b) = (pair[0].position, pair[1].position);
        sum += ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        n += 1;
    }
    let d = sum / n as f64;
    let oracle = two_ion_spacing_oracle(&trap);
    assert!((d / oracle - 1.0).abs() < 5e-3, "d = {d:e}, oracle = {oracle:e}");
}

/// One seed of the 20-ion purification run.
#[test]
fn purification_single_seed() {
    let trap = TrapConfig::ucla(2.0 * PI * 5e3, TrapMode::FullRf);
    let mut ions = vec![IonState::barium(133).unwrap()];
    ions.extend((0..19).map(|_| IonState::barium(132).unwrap()));
    thermal_start(&trap, &mut ions, 5e-3, 0).unwrap();

    let i133 = isotope(133).unwrap();
    let blue133 = transition_line(&i133, Branch::Blue, Some((HalfInt::ONE, HalfInt::ZERO))).unwrap().offset;
    let blue132 = isotope(132).unwrap().shift_b.value;
    let carrier = 4218.0;
    let mut beams = cooling_beams(carrier - blue133, 10.0, BLUE_LINEWIDTH_MHZ, "Ba133");
    for d in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
        beams.push(beam(d, RED_WAVELENGTH, -30.0, 10.0, RED_LINEWIDTH_MHZ, "Ba133"));
        let mut heat = beam(d, BLUE_WAVELENGTH, carrier - 4300.0 - blue132, 5.0, BLUE_LINEWIDTH_MHZ, "Ba132");
        heat.sweep = Some(Sweep { span: 500.0, period: 40e-3 });
        beams.push(heat);
    }
    let dt = 1.25e-9;
    let cfg = SimConfig { dt, t0: 25e-3, steps: 12_000_000, seed: 0, temperature_every: 100, ..SimConfig::default() };
    let r = run_simulation(&trap, ions, &beams, &cfg, &ReferenceEngine).unwrap();
    assert!(r.retained("Ba133"));
    assert!(r.all_ejected("Ba132"), "{} of 19 ejected", r.ejected("Ba132"));
}
