//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if anything fails other than the criteria listed in
//! `KNOWN_UNATTAINABLE`, or if one of those unexpectedly passes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};

use ionkit::plan::PlanFile;
use ionkit::scenario::Scenario;
use ionkit_core::constants::{BLUE_LINEWIDTH_MHZ, BLUE_WAVELENGTH, BOLTZMANN, HBAR};
use ionkit_core::dynamics::{
    measure_temperature, run_simulation, thermal_start, BeamSpec, IonState, ReferenceEngine, SimConfig, TrapConfig,
    TrapMode,
};
use ionkit_core::kingplot::{
    self, fit_king_line_effective_variance, invert_field_shift, king_points, FieldShiftModel, MassShift, Normalization,
};
use ionkit_core::lineshape::{fit_lorentzian, linear_grid, synth_scan, Lorentzian};
use ionkit_core::sidebands::{self, barium133_loading_plan, PlanConfig, ToneClass, ToneOrigin};
use ionkit_core::spectra::{self, hyperfine_energy, isotope, splitting, Branch, Term};
use ionkit_core::HalfInt;

/// Criteria that fail by construction; see the project notes.
const KNOWN_UNATTAINABLE: &[&str] = &["trap-full-rf-secular"];

const PURIFY_20: &str = include_str!("../scenarios/purification-20.json");
const FIG1C: &str = include_str!("../scenarios/fig1c.json");

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn h(twice: u32) -> HalfInt {
    HalfInt::from_twice(twice)
}

fn hyperfine_splittings() -> Outcome {
    let iso = isotope(133).unwrap();
    let d1 = splitting(&iso, Term::S12, h(0), h(2)).unwrap().abs();
    let d2 = splitting(&iso, Term::P12, h(0), h(2)).unwrap().abs();
    let d3 = splitting(&iso, Term::D32, h(4), h(2)).unwrap().abs();
    let computed_ok = (d1 - 9925.45).abs() < 0.01 && (d2 - 1840.0).abs() < 0.01 && (d3 - 937.0).abs() < 0.01;
    let measured = [(d1, 9931.0), (d2, 1840.0), (d3, 937.0)];
    let within = measured.iter().all(|(c, m)| (c - m).abs() <= 25.0);
    Outcome {
        id: "hyperfine-splittings",
        pass: computed_ok && within,
        detail: format!("|D1| = {d1:.2}, |D2| = {d2:.2}, |D3| = {d3:.2} MHz vs 9931/1840/937 (tol 25)"),
    }
}

/// Spin operators `(z, x, +)` for spin `s` in the basis m = s, s-1, ..., -s.
fn spin_ops(s: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = (2.0 * s).round() as usize + 1;
    let m = |k: usize| s - k as f64;
    let z = DMatrix::from_fn(n, n, |r, c| if r == c { m(r) } else { 0.0 });
    // <m+1|S+|m>
    let plus = DMatrix::from_fn(n, n, |r, c| {
        if c == r + 1 {
            (s * (s + 1.0) - m(c) * (m(c) + 1.0)).sqrt()
        } else {
            0.0
        }
    });
    let x = (&plus + plus.transpose()) * 0.5;
    (z, x, plus)
}

/// Energies of the dipole + quadrupole Hamiltonian grouped by F, built from
/// Cartesian components in the uncoupled basis.
fn operator_levels(i: f64, j: f64, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (iz, ix, ip) = spin_ops(i);
    let (jz, jx, jp) = spin_ops(j);
    // Iy Jy = -(I+ - I-)(J+ - J-)/4, real
    let idiff = &ip - ip.transpose();
    let jdiff = &jp - jp.transpose();
    let idotj = iz.kronecker(&jz) + ix.kronecker(&jx) - idiff.kronecker(&jdiff) * 0.25;
    let n = idotj.nrows();
    let one = DMatrix::<f64>::identity(n, n);
    let (i2, j2) = (i * (i + 1.0), j * (j + 1.0));
    let quad = (&idotj * &idotj * 3.0 + &idotj * 1.5 - &one * (i2 * j2)) * (b / (2.0 * i * (2.0 * i - 1.0) * j * (2.0 * j - 1.0)));
    let ham = &idotj * a + quad;
    let f2 = &one * (i2 + j2) + &idotj * 2.0;
    let eig = ham.symmetric_eigen();
    (0..n)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let ff = (v.transpose() * &f2 * v)[(0, 0)];
            // F from F(F+1)
            ((-1.0 + (1.0 + 4.0 * ff).sqrt()) / 2.0, eig.eigenvalues[k])
        })
        .collect()
}

fn quadrupole_137() -> Outcome {
    let iso = isotope(137).unwrap();
    let (a, b) = (iso.a_constant(Term::D32), iso.b_constant(Term::D32));
    let levels = operator_levels(1.5, 1.5, a, b);
    let mut worst: f64 = 0.0;
    let mut counts = Vec::new();
    for twice_f in [0u32, 2, 4, 6] {
        let f = h(twice_f);
        let closed = hyperfine_energy(iso.spin, Term::D32.j(), f, a, b).unwrap();
        let members: Vec<f64> = levels.iter().filter(|(ff, _)| (ff - f.value()).abs() < 1e-6).map(|x| x.1).collect();
        counts.push(members.len());
        for e in members {
            worst = worst.max((e - closed).abs());
        }
    }
    let multiplicities_ok = counts == [1, 3, 5, 7];
    Outcome {
        id: "quadrupole-137",
        pass: multiplicities_ok && worst < 1e-9,
        detail: format!("max |closed - operator| = {worst:.2e} MHz over F = 0..3, multiplicities {counts:?}"),
    }
}

fn king_slope() -> Outcome {
    let reg = spectra::registry();
    let fit = |exclude: &[u32]| {
        fit_king_line_effective_variance(&king_points(&reg, Normalization::MassDifference, exclude)).unwrap()
    };
    let (all, subset) = (fit(&[]), fit(&[130, 132, 133]));
    let ok = |s: f64| (s - -0.26).abs() <= 0.03;
    Outcome {
        id: "king-slope",
        pass: ok(all.slope) && ok(subset.slope),
        detail: format!(
            "slope {:.4} (all), {:.4} (without 130/132/133); target -0.26 +/- 0.03",
            all.slope, subset.slope
        ),
    }
}

fn field_shift() -> Outcome {
    let iso = isotope(133).unwrap();
    let dnu = iso.shift_r.value;
    let base = FieldShiftModel::barium_red();
    let names = ["per-pair", "constant", "specific-plus-normal"];
    let readings = kingplot::mass_shift_readings(360.0, kingplot::red_line_frequency());
    let lambdas: Vec<f64> = readings
        .iter()
        .map(|m| invert_field_shift(dnu, (133, 138), &FieldShiftModel { mass_shift: *m, ..base }).unwrap())
        .collect();
    // the reading consistent with the quoted value, if exactly one is
    let inside: Vec<usize> = (0..3).filter(|&k| (lambdas[k] - -0.104).abs() <= 0.02).collect();
    let selected = match inside[..] {
        [k] => Some(k),
        _ => None,
    };
    let default_lambda = invert_field_shift(dnu, (133, 138), &base).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let f = rng.random_range(100.0..3000.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mass = match rng.random_range(0..3) {
            0 => MassShift::PerPair(rng.random_range(-1000.0..1000.0)),
            1 => MassShift::Constant(rng.random_range(-1e6..1e6)),
            _ => MassShift::SpecificPlusNormal {
                specific: rng.random_range(-1000.0..1000.0),
                transition_frequency: rng.random_range(1e8..1e9),
            },
        };
        let a = [130u32, 132, 133, 134, 135, 136, 137][rng.random_range(0..7)];
        let lambda = rng.random_range(-0.5..0.5);
        let model = FieldShiftModel { field_shift: f, mass_shift: mass, reference: 138 };
        let back = invert_field_shift(model.forward(lambda, a), (a, 138), &model).unwrap();
        worst = worst.max((back - lambda).abs() / lambda.abs().max(1e-3));
    }
    let pass = selected == Some(2) && (default_lambda - lambdas[2]).abs() < 1e-15 && worst < 1e-12;
    Outcome {
        id: "field-shift-inversion",
        pass,
        detail: format!(
            "{} -> {:.4} fm^2 (readings: {}); round-trip max rel err {worst:.1e}",
            selected.map_or("no unique reading", |k| names[k]),
            default_lambda,
            names.iter().zip(&lambdas).map(|(n, l)| format!("{n} {l:+.4}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn fig1c_plan() -> Outcome {
    let reg = spectra::registry();
    let file: PlanFile = serde_json::from_str(FIG1C).unwrap();
    let entries = file.entries(&reg).unwrap();
    let contaminants = [130u32, 132, 134, 136, 138];
    let check = |carrier: f64| -> Result<(), String> {
        let mut plan = entries.clone();
        let base = barium133_loading_plan(4218.0)[0].carrier_offset;
        plan[0].carrier_offset += carrier - base;
        let r = sidebands::plan_report(&reg, 133, &contaminants, &plan, &PlanConfig::default()).map_err(|e| e.to_string())?;
        if !r.valid() {
            return Err(format!("uncovered {:?}", r.uncovered));
        }
        if let Some(e) = r.target_cooling.iter().find(|e| e.class != ToneClass::Cooling) {
            return Err(format!("133 {} classified {:?}", e.line.offset, e.class));
        }
        if r.target_cooling.is_empty() {
            return Err("133 not cooled".into());
        }
        let carrier = plan[0].carrier_offset;
        for v in &r.contaminants {
            let scanned = v.heating_origins.iter().any(|(_, o)| matches!(o, ToneOrigin::Scan { .. }));
            // the swept sideband must pass over a blue line of the isotope
            let reachable = spectra::transition_lines(&isotope(v.isotope).unwrap(), Branch::Blue)
                .iter()
                .filter(|l| l.allowed)
                .any(|l| (-4300.0..=-3800.0).contains(&(l.offset - carrier)));
            if !scanned || !reachable {
                return Err(format!("{} not heated by the scan", v.isotope));
            }
        }
        Ok(())
    };
    let results: Vec<(f64, Result<(), String>)> = [4218.0, 4208.0, 4228.0].into_iter().map(|c| (c, check(c))).collect();
    let pass = results.iter().all(|(_, r)| r.is_ok());
    let detail = results
        .iter()
        .map(|(c, r)| format!("{c}: {}", r.as_ref().map_or_else(|e| e.clone(), |_| "valid".into())))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { id: "fig1c-plan", pass, detail: format!("{detail} (133 cooled only, 130/132/134/136/138 heated in scan)") }
}

/// Peak of the power spectrum with parabolic interpolation, Hz.
fn spectral_peak(x: &[f64], dt: f64, lo: f64) -> f64 {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos();
            Complex::new(v * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    let first = (lo / df).ceil() as usize;
    let p: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm_sqr()).collect();
    let k = (first..n / 2).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    let (a, b, c) = (p[k - 1].ln(), p[k].ln(), p[k + 1].ln());
    let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + shift) * df
}

fn trap_secular() -> Outcome {
    let trap = TrapConfig::ucla(0.0, TrapMode::FullRf);
    let ion = IonState::barium(138).unwrap().at([1e-6, 0.0, 0.0]);
    let q = trap.mathieu_q(ion.mass, ion.charge);
    let predicted = q * trap.omega / (2.0 * 2f64.sqrt()) / (2.0 * PI);
    let dt = trap.rf_period() / 100.0;
    let cfg = SimConfig {
        dt,
        steps: 1 << 18,
        trajectory_every: 1,
        temperature_every: 0,
        z_max: Some(1e-3),
        ..SimConfig::default()
    };
    let r = run_simulation(&trap, vec![ion], &[], &cfg, &ReferenceEngine).unwrap();
    let x: Vec<f64> = r.trajectory.iter().map(|s| s.position[0]).take(1 << 18).collect();
    let measured = spectral_peak(&x, dt, 50e3);
    let rel = (measured - predicted) / predicted;
    Outcome {
        id: "trap-full-rf-secular",
        pass: rel.abs() <= 0.02,
        detail: format!(
            "q = {q:.4}: FFT peak {:.2} kHz vs q*Omega/(2 sqrt 2) = {:.2} kHz ({:+.2}%, tol 2%)",
            measured / 1e3,
            predicted / 1e3,
            100.0 * rel
        ),
    }
}

fn trap_drift() -> Outcome {
    let trap = TrapConfig::ucla(2.0 * PI * 50e3, TrapMode::Pseudopotential);
    let ion = IonState::barium(138).unwrap().at([3e-6, -2e-6, 5e-6]).moving([0.2, 0.1, -0.3]);
    let period = 2.0 * PI / trap.radial_frequency(ion.mass, ion.charge);
    let dt = period / 200.0;
    let cfg = SimConfig { dt, steps: 200 * 1000, record_energy: true, z_max: Some(1e-3), ..SimConfig::default() };
    let r = run_simulation(&trap, vec![ion], &[], &cfg, &ReferenceEngine).unwrap();
    let per = (period / (r.window_steps as f64 * dt)).round().max(1.0) as usize;
    let blocks: Vec<f64> = r
        .energy
        .chunks_exact(per * 10)
        .map(|c| c.iter().map(|e| e.total).sum::<f64>() / c.len() as f64)
        .collect();
    let periods = (blocks.len() - 1) as f64 * 10.0;
    let drift = (blocks[blocks.len() - 1] - blocks[0]).abs() / blocks[0] / periods;
    Outcome {
        id: "trap-pseudopotential-drift",
        pass: drift < 1e-6,
        detail: format!("relative energy drift {drift:.2e} per secular period over {periods} periods (tol 1e-6)"),
    }
}

fn doppler() -> Outcome {
    let h = FRAC_1_SQRT_2;
    let mut ratios = Vec::new();
    for scale in [0.7, 1.0, 1.3] {
        let lw = BLUE_LINEWIDTH_MHZ * scale;
        let trap = TrapConfig::ucla(2.0 * PI * 50e3, TrapMode::FullRf);
        let mut ions = vec![IonState::barium(138).unwrap()];
        thermal_start(&trap, &mut ions, 2e-3, 1).unwrap();
        let beams: Vec<BeamSpec> = [[h, 0.0, h], [0.0, h, h], [-h, 0.0, -h], [0.0, -h, -h]]
            .into_iter()
            .map(|d| BeamSpec {
                direction: d,
                wavelength: BLUE_WAVELENGTH,
                detuning: -lw / 2.0,
                saturation: 0.1,
                linewidth: lw,
                targets: vec!["Ba138".into()],
                sweep: None,
            })
            .collect();
        let cfg = SimConfig { dt: 5e-9, steps: 4_000_000, seed: 1, ..SimConfig::default() };
        let r = run_simulation(&trap, ions, &beams, &cfg, &ReferenceEngine).unwrap();
        let t = measure_temperature(&r, "Ba138", 10e-3).unwrap();
        let limit = HBAR * 2.0 * PI * lw * 1e6 / (2.0 * BOLTZMANN);
        ratios.push((scale, t / limit));
    }
    Outcome {
        id: "doppler-limit",
        pass: ratios.iter().all(|(_, r)| *r > 1.0 / 3.0 && *r < 3.0),
        detail: format!(
            "T/T_D = {} at Gamma x 0.7/1.0/1.3, delta = -Gamma/2 (tol factor 3)",
            ratios.iter().map(|(_, r)| format!("{r:.2}")).collect::<Vec<_>>().join("/")
        ),
    }
}

fn purification() -> Outcome {
    let base: Scenario = serde_json::from_str(PURIFY_20).unwrap();
    let reg = spectra::registry();
    let (mut kept, mut clean) = (0, 0);
    let mut notes = Vec::new();
    let seeds = 10;
    for seed in 0..seeds {
        let mut sc = base.clone();
        sc.run.seed = seed;
        let o = sc.run(&reg).unwrap();
        kept += usize::from(o.target_retained() == Some(true));
        clean += usize::from(o.contaminants_ejected() == Some(true));
        let last = o.result.ejection_times.iter().flatten().fold(0.0f64, |m, t| m.max(*t));
        notes.push(format!("{seed}:{}/19@{:.1}ms", o.result.ejected("Ba132"), last * 1e3));
    }
    Outcome {
        id: "purification-20",
        pass: kept == seeds as usize && clean >= 9,
        detail: format!(
            "target retained {kept}/{seeds}, contaminants cleared {clean}/{seeds} (need 10/10, >= 9/10); [{}]",
            notes.join(" ")
        ),
    }
}

fn lineshape() -> Outcome {
    let truth = Lorentzian { center: 937.0, fwhm: 40.0, amplitude: 1.0, offset: 1.0 };
    let grid = linear_grid(737.0, 1137.0, 50);
    let fit = fit_lorentzian(&synth_scan(&truth, &grid, 0.0, 0).unwrap(), None).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let noiseless = [
        rel(fit.line.center, truth.center),
        rel(fit.line.fwhm, truth.fwhm),
        rel(fit.line.amplitude, truth.amplitude),
        rel(fit.line.offset, truth.offset),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    // SNR 10: peak height / noise sigma
    let trials = 200;
    let mut sq = 0.0;
    let mut unconverged = 0;
    for seed in 0..trials {
        let f = fit_lorentzian(&synth_scan(&truth, &grid, 0.1, 1000 + seed).unwrap(), None).unwrap();
        unconverged += usize::from(!f.converged);
        sq += (f.line.center - truth.center).powi(2);
    }
    let rms = (sq / trials as f64).sqrt();
    Outcome {
        id: "lineshape",
        pass: noiseless < 1e-8 && rms <= 4.0 && unconverged == 0 && fit.converged,
        detail: format!(
            "noiseless max rel err {noiseless:.1e} (tol 1e-8); SNR 10 center RMS {rms:.2} MHz over {trials} scans (tol 4)"
        ),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_ionkit");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let (ta, tb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let run = |input: &str, out: &std::path::Path, traj: &std::path::Path| {
        Command::new(exe)
            .args(["sim", input, "--seed", "3", "--set", "run.steps=40000", "--set", "run.trajectory_every=400"])
            .arg("--out")
            .arg(out)
            .arg("--trajectory")
            .arg(traj)
            .output()
            .unwrap()
    };
    let first = run("purification-short.json", &a, &ta);
    let second = run(a.to_str().unwrap(), &b, &tb);
    if !first.status.success() || !second.status.success() {
        return Outcome {
            id: "determinism",
            pass: false,
            detail: format!("{}{}", String::from_utf8_lossy(&first.stderr), String::from_utf8_lossy(&second.stderr)),
        };
    }
    let load = |p: &std::path::Path| serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(p).unwrap()).unwrap();
    let (da, db) = (load(&a), load(&b));
    let same_result = serde_json::to_string(&da["result"]).unwrap() == serde_json::to_string(&db["result"]).unwrap();
    let same_config = da["config"] == db["config"];
    let same_traj = std::fs::read(&ta).unwrap() == std::fs::read(&tb).unwrap();
    Outcome {
        id: "determinism",
        pass: same_result && same_config && same_traj,
        detail: format!(
            "rerun from emitted config: result identical {same_result}, config identical {same_config}, trajectory CSV identical {same_traj}"
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 11] = [
        hyperfine_splittings,
        quadrupole_137,
        king_slope,
        field_shift,
        fig1c_plan,
        trap_secular,
        trap_drift,
        doppler,
        purification,
        lineshape,
        determinism,
    ];
    let mut failed = Vec::new();
    for c in criteria {
        let start = Instant::now();
        let o = c();
        println!(
            "{} {:<28} {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(o.id);
        }
    }
    let unexpected: Vec<_> = failed.iter().filter(|id| !KNOWN_UNATTAINABLE.contains(id)).collect();
    let recovered: Vec<_> = KNOWN_UNATTAINABLE.iter().filter(|id| !failed.contains(id)).collect();
    println!(
        "acceptance: {} criteria, {} failed ({} known unattainable)",
        criteria.len(),
        failed.len(),
        failed.len() - unexpected.len()
    );
    if !unexpected.is_empty() || !recovered.is_empty() {
        println!("unexpected failures {unexpected:?}; known-unattainable now passing {recovered:?}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
