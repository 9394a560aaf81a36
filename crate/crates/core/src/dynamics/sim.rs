use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    cold_crystal, coulomb_energy, crystal_extent, scatter_step, trap_force, trap_potential_energy,
    BeamSpec, CoulombEngine, CrystalOptions, DynamicsError, IonState, TrapConfig, TrapMode, Vec3,
};
use crate::constants::BOLTZMANN;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// s; negative runs time backwards.
    pub dt: f64,
    pub steps: u64,
    pub seed: u64,
    /// s.
    pub t0: f64,
    /// Record every ion each this many steps; 0 disables.
    pub trajectory_every: u64,
    /// Record temperatures every this many averaging windows; 0 disables.
    pub temperature_every: u64,
    pub record_energy: bool,
    /// Axial ejection boundary, m. Derived from the cold crystal when `None`.
    pub z_max: Option<f64>,
    /// Axial boundary as a multiple of the cold-crystal half-length.
    pub ejection_factor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 5e-9,
            steps: 0,
            seed: 0,
            t0: 0.0,
            trajectory_every: 0,
            temperature_every: 1,
            record_energy: false,
            z_max: None,
            ejection_factor: 5.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub ion: usize,
    pub position: Vec3,
    pub velocity: Vec3,
    pub alive: bool,
}

/// Secular temperatures at the end of one averaging window, in the order of
/// [`SimResult::species`]. `NaN` when no ion of a species is left.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureSample {
    pub t: f64,
    pub kelvin: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    /// Window-averaged kinetic + pseudopotential + Coulomb energy, J.
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub trap: TrapConfig,
    pub config: SimConfig,
    /// Distinct species labels in order of first appearance.
    pub species: Vec<String>,
    pub initial: Vec<IonState>,
    pub final_state: Vec<IonState>,
    pub trajectory: Vec<TrajectorySample>,
    pub ejection_times: Vec<Option<f64>>,
    pub temperatures: Vec<TemperatureSample>,
    pub energy: Vec<EnergySample>,
    pub photons: Vec<u64>,
    pub clamp_count: u64,
    pub steps_taken: u64,
    /// Velocity-averaging window, steps.
    pub window_steps: u64,
    pub z_max: f64,
    pub engine: &'static str,
}

impl SimResult {
    pub fn t_end(&self) -> f64 {
        self.config.t0 + self.config.dt * self.steps_taken as f64
    }

    fn of_species<'a>(&'a self, species: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.initial
            .iter()
            .enumerate()
            .filter(move |(_, i)| i.species == species)
            .map(|(k, _)| k)
    }

    pub fn count(&self, species: &str) -> usize {
        self.of_species(species).count()
    }

    pub fn ejected(&self, species: &str) -> usize {
        self.of_species(species)
            .filter(|&k| self.ejection_times[k].is_some())
            .count()
    }

    /// Every ion of `species` still trapped.
    pub fn retained(&self, species: &str) -> bool {
        self.count(species) > 0 && self.ejected(species) == 0
    }

    pub fn all_ejected(&self, species: &str) -> bool {
        self.count(species) > 0 && self.ejected(species) == self.count(species)
    }

    pub fn species_index(&self, species: &str) -> Option<usize> {
        self.species.iter().position(|s| s == species)
    }
}

/// `sum m v^2 / (3 k_B N)`.
pub fn kinetic_temperature(ions: &[(f64, Vec3)]) -> f64 {
    if ions.is_empty() {
        return f64::NAN;
    }
    let twice_ke: f64 = ions.iter().map(|(m, v)| m * super::dot(*v, *v)).sum();
    twice_ke / (3.0 * BOLTZMANN * ions.len() as f64)
}

/// Mean secular temperature of `species` over the last `window` seconds.
pub fn measure_temperature(
    result: &SimResult,
    species: &str,
    window: f64,
) -> Result<f64, DynamicsError> {
    let idx = result
        .species_index(species)
        .ok_or_else(|| DynamicsError::EmptySpecies(species.into()))?;
    let minimum = match result.trap.mode {
        TrapMode::FullRf => 10.0 * result.trap.rf_period(),
        TrapMode::Pseudopotential => 0.0,
    };
    if window < minimum || !(window > 0.0) {
        return Err(DynamicsError::WindowTooShort { window, minimum });
    }
    let t_end = result.t_end();
    let lo = t_end - window * result.config.dt.signum();
    let in_window = |t: f64| if result.config.dt >= 0.0 { t >= lo } else { t <= lo };
    let (sum, n) = result
        .temperatures
        .iter()
        .filter(|s| in_window(s.t))
        .map(|s| s.kelvin[idx])
        .filter(|k| k.is_finite())
        .fold((0.0, 0usize), |(s, n), k| (s + k, n + 1));
    if n == 0 {
        return Err(DynamicsError::WindowTooShort { window, minimum: result.trap.rf_period() });
    }
    Ok(sum / n as f64)
}

fn check_finite(ions: &[IonState], step: u64) -> Result<(), DynamicsError> {
    let ok = ions
        .iter()
        .filter(|i| i.alive)
        .all(|i| i.position.iter().chain(&i.velocity).all(|c| c.is_finite()));
    if ok {
        Ok(())
    } else {
        Err(DynamicsError::Blowup { step })
    }
}

fn outside(ion: &IonState, r0: f64, z_max: f64) -> bool {
    let [x, y, z] = ion.position;
    x * x + y * y >= r0 * r0 || z.abs() >= z_max
}

fn total_energy(ions: &[IonState], trap: &TrapConfig) -> f64 {
    ions.iter()
        .filter(|i| i.alive)
        .map(|i| i.kinetic_energy() + trap_potential_energy(i, trap))
        .sum::<f64>()
        + coulomb_energy(ions)
}

/// Velocity-Verlet integration of `ions` with photon scattering.
///
/// Ions crossing `r >= r0` or `|z| >= z_max` are marked dead with their
/// crossing time and drop out of every later force evaluation. With a
/// deterministic engine the result depends only on the inputs and the seed.
pub fn run_simulation(
    trap: &TrapConfig,
    ions: Vec<IonState>,
    beams: &[BeamSpec],
    config: &SimConfig,
    engine: &dyn CoulombEngine,
) -> Result<SimResult, DynamicsError> {
    if ions.is_empty() {
        return Err(DynamicsError::NoIons);
    }
    trap.validate(&ions)?;
    let dt = config.dt;
    let limit = trap.max_step(&ions);
    if !(dt.abs() <= limit) || dt == 0.0 {
        return Err(DynamicsError::StepTooLarge { dt, limit });
    }
    for (k, b) in beams.iter().enumerate() {
        b.validate(k)?;
        b.check_step(k, dt)?;
    }

    let z_max = match config.z_max {
        Some(z) => z,
        None => {
            let cold = cold_crystal(trap, &ions, &CrystalOptions::default())?;
            config.ejection_factor * crystal_extent(&cold).max(trap.length_scale())
        }
    };

    let mut species: Vec<String> = Vec::new();
    for ion in &ions {
        if !species.contains(&ion.species) {
            species.push(ion.species.clone());
        }
    }
    let species_of: Vec<usize> = ions
        .iter()
        .map(|i| species.iter().position(|s| *s == i.species).unwrap())
        .collect();
    let beams_of: Vec<Vec<BeamSpec>> = species
        .iter()
        .map(|s| beams.iter().filter(|b| b.addresses(s)).cloned().collect())
        .collect();

    let n = ions.len();
    let initial = ions.clone();
    let mut ions = ions;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ejection_times: Vec<Option<f64>> = vec![None; n];
    for (k, ion) in ions.iter_mut().enumerate() {
        if ion.alive && outside(ion, trap.r0, z_max) {
            ion.alive = false;
            ejection_times[k] = Some(config.t0);
        }
    }

    let window = match libm::round(trap.rf_period() / dt.abs()) {
        w if w >= 1.0 => w as u64,
        _ => 1,
    };
    let mut result = SimResult {
        trap: *trap,
        config: config.clone(),
        species,
        initial,
        final_state: Vec::new(),
        trajectory: Vec::new(),
        ejection_times,
        temperatures: Vec::new(),
        energy: Vec::new(),
        photons: vec![0; n],
        clamp_count: 0,
        steps_taken: 0,
        window_steps: window,
        z_max,
        engine: engine.name(),
    };

    let mut positions: Vec<Vec3> = ions.iter().map(|i| i.position).collect();
    let charges: Vec<f64> = ions.iter().map(|i| i.charge).collect();
    let mut alive: Vec<bool> = ions.iter().map(|i| i.alive).collect();
    let mut coulomb = vec![[0.0; 3]; n];
    let mut accel = vec![[0.0; 3]; n];

    let eval = |ions: &[IonState],
                    positions: &[Vec3],
                    alive: &[bool],
                    t: f64,
                    coulomb: &mut [Vec3],
                    accel: &mut [Vec3]|
     -> u64 {
        let clamps = engine.forces(positions, &charges, alive, coulomb);
        for (k, ion) in ions.iter().enumerate() {
            if !ion.alive {
                accel[k] = [0.0; 3];
                continue;
            }
            let f = trap_force(ion, t, trap);
            for c in 0..3 {
                accel[k][c] = (f[c] + coulomb[k][c]) / ion.mass;
            }
        }
        clamps
    };

    result.clamp_count += eval(&ions, &positions, &alive, config.t0, &mut coulomb, &mut accel);

    let record_trajectory = |result: &mut SimResult, ions: &[IonState], t: f64| {
        for (k, ion) in ions.iter().enumerate() {
            result.trajectory.push(TrajectorySample {
                t,
                ion: k,
                position: ion.position,
                velocity: ion.velocity,
                alive: ion.alive,
            });
        }
    };
    if config.trajectory_every > 0 {
        record_trajectory(&mut result, &ions, config.t0);
    }

    let mut vsum = vec![[0.0f64; 3]; n];
    let mut esum = 0.0;
    let mut in_window = 0u64;
    let mut windows_done = 0u64;
    let half = 0.5 * dt;

    for step in 1..=config.steps {
        let t = config.t0 + dt * step as f64;
        for (k, ion) in ions.iter_mut().enumerate() {
            if !ion.alive {
                continue;
            }
            for c in 0..3 {
                ion.velocity[c] += half * accel[k][c];
                ion.position[c] += dt * ion.velocity[c];
            }
            positions[k] = ion.position;
        }
        for (k, ion) in ions.iter_mut().enumerate() {
            if ion.alive && outside(ion, trap.r0, z_max) {
                ion.alive = false;
                alive[k] = false;
                result.ejection_times[k] = Some(t);
            }
        }
        result.clamp_count += eval(&ions, &positions, &alive, t, &mut coulomb, &mut accel);
        for (k, ion) in ions.iter_mut().enumerate() {
            if !ion.alive {
                continue;
            }
            for c in 0..3 {
                ion.velocity[c] += half * accel[k][c];
            }
            let bs = &beams_of[species_of[k]];
            if !bs.is_empty() {
                result.photons[k] += u64::from(scatter_step(ion, bs, t, dt, &mut rng)?);
            }
        }
        check_finite(&ions, step)?;
        result.steps_taken = step;

        for (k, ion) in ions.iter().enumerate() {
            for c in 0..3 {
                vsum[k][c] += ion.velocity[c];
            }
        }
        if config.record_energy {
            esum += total_energy(&ions, trap);
        }
        in_window += 1;
        if in_window == window {
            windows_done += 1;
            let w = window as f64;
            if config.temperature_every > 0 && windows_done.is_multiple_of(config.temperature_every) {
                let kelvin = (0..result.species.len())
                    .map(|s| {
                        let members: Vec<(f64, Vec3)> = ions
                            .iter()
                            .enumerate()
                            .filter(|(k, i)| i.alive && species_of[*k] == s)
                            .map(|(k, i)| (i.mass, [vsum[k][0] / w, vsum[k][1] / w, vsum[k][2] / w]))
                            .collect();
                        kinetic_temperature(&members)
                    })
                    .collect();
                result.temperatures.push(TemperatureSample { t, kelvin });
            }
            if config.record_energy {
                result.energy.push(EnergySample { t, total: esum / w });
            }
            for v in vsum.iter_mut() {
                *v = [0.0; 3];
            }
            esum = 0.0;
            in_window = 0;
        }
        if config.trajectory_every > 0 && step % config.trajectory_every == 0 {
            record_trajectory(&mut result, &ions, t);
        }
    }
    result.final_state = ions;
    Ok(result)
}

/// Place `ions` on their cold-crystal sites and draw Maxwell-Boltzmann
/// velocities at `temperature`.
pub fn thermal_start(
    trap: &TrapConfig,
    ions: &mut [IonState],
    temperature: f64,
    seed: u64,
) -> Result<(), DynamicsError> {
    let sites = cold_crystal(
        trap,
        ions,
        &CrystalOptions {
            seed,
            ..CrystalOptions::default()
        },
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for (ion, site) in ions.iter_mut().zip(sites) {
        ion.position = site;
        let sigma = libm::sqrt(BOLTZMANN * temperature.max(0.0) / ion.mass);
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        ion.velocity = [normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng)];
    }
    Ok(())
}
