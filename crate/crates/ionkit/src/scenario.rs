//! Simulation scenarios: trap, ion species, beams tied to spectral lines and
//! run settings, plus the summary and trajectory artifacts of a run.

use std::f64::consts::TAU as TWO_PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ionkit_core::constants::ATOMIC_MASS_UNIT;
use ionkit_core::dynamics::{
    self, BeamSpec, IonState, SimConfig, SimResult, Sweep, TrapConfig, TrapMode,
};
use ionkit_core::spectra::IsotopeRecord;

use crate::engine;
use crate::error::{Error, Result};
use crate::lines::LineRef;

fn default_r0() -> f64 {
    3e-3
}
fn default_v0() -> f64 {
    100.0
}
fn default_rf() -> f64 {
    1e6
}
fn default_ref_mass() -> f64 {
    138.0
}
fn default_mode() -> String {
    "full_rf".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapFile {
    /// m.
    #[serde(default = "default_r0")]
    pub r0: f64,
    /// RF amplitude, V.
    #[serde(default = "default_v0")]
    pub v0: f64,
    /// Hz.
    #[serde(default = "default_rf")]
    pub rf_frequency: f64,
    /// Axial secular frequency of an ion of `axial_reference_mass`, Hz.
    pub axial_frequency: f64,
    /// amu.
    #[serde(default = "default_ref_mass")]
    pub axial_reference_mass: f64,
    /// `full_rf` or `pseudopotential`.
    #[serde(default = "default_mode")]
    pub mode: String,
}

impl TrapFile {
    pub fn build(&self) -> Result<TrapConfig> {
        let mode = match self.mode.as_str() {
            "full_rf" => TrapMode::FullRf,
            "pseudopotential" => TrapMode::Pseudopotential,
            m => return Err(Error::Usage(format!("unknown trap mode {m:?} (full_rf or pseudopotential)"))),
        };
        Ok(TrapConfig {
            r0: self.r0,
            v0: self.v0,
            omega: TWO_PI * self.rf_frequency,
            omega_z: TWO_PI * self.axial_frequency,
            axial_reference_mass: self.axial_reference_mass * ATOMIC_MASS_UNIT,
            mode,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesFile {
    pub isotope: u32,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    /// MHz, added to the detuning over one period.
    pub span: f64,
    /// s.
    pub period: f64,
}

/// A beam on one line. Give either `tone` (MHz from the 138 line of the
/// branch) or `detuning` (MHz from the line itself).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamFile {
    pub line: LineRef,
    #[serde(default)]
    pub tone: Option<f64>,
    #[serde(default)]
    pub detuning: Option<f64>,
    /// Normalised on load.
    pub direction: [f64; 3],
    pub saturation: f64,
    /// Gamma/2pi, MHz; the branch default when absent.
    #[serde(default)]
    pub linewidth: Option<f64>,
    /// Species labels; the line's isotope when absent.
    #[serde(default)]
    pub targets: Option<Vec<String>>,
    #[serde(default)]
    pub sweep: Option<SweepFile>,
    /// Add a second beam along `-direction`.
    #[serde(default)]
    pub counter_propagating: bool,
}

fn default_temperature_every() -> u64 {
    100
}
fn default_ejection_factor() -> f64 {
    5.0
}
fn default_engine() -> String {
    "reference".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    /// s.
    pub dt: f64,
    pub steps: u64,
    pub seed: u64,
    /// s.
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub trajectory_every: u64,
    /// RF periods (or steps-per-window) between temperature samples.
    #[serde(default = "default_temperature_every")]
    pub temperature_every: u64,
    #[serde(default = "default_ejection_factor")]
    pub ejection_factor: f64,
    /// `reference` or `parallel`.
    #[serde(default = "default_engine")]
    pub engine: String,
    #[serde(default)]
    pub record_energy: bool,
}

fn embedded() -> String {
    "embedded".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    /// Isotope expected to survive; every other species should be ejected.
    #[serde(default)]
    pub target: Option<u32>,
    pub trap: TrapFile,
    pub species: Vec<SpeciesFile>,
    /// K; velocities drawn at this temperature on cold-crystal sites.
    pub initial_temperature: f64,
    pub beams: Vec<BeamFile>,
    pub run: RunFile,
    #[serde(default = "embedded")]
    pub registry: String,
}

pub fn label(isotope: u32) -> String {
    format!("Ba{isotope}")
}

/// Everything [`dynamics::run_simulation`] needs.
pub struct Setup {
    pub trap: TrapConfig,
    pub ions: Vec<IonState>,
    pub beams: Vec<BeamSpec>,
    pub config: SimConfig,
    pub engine: &'static dyn dynamics::CoulombEngine,
}

impl Scenario {
    pub fn beams(&self, records: &[IsotopeRecord]) -> Result<Vec<BeamSpec>> {
        let mut out = Vec::new();
        for (k, b) in self.beams.iter().enumerate() {
            let line = b.line.resolve(records)?;
            let detuning = match (b.tone, b.detuning) {
                (Some(t), None) => t - line.offset,
                (None, Some(d)) => d,
                _ => return Err(Error::Usage(format!("beam {k}: give exactly one of tone and detuning"))),
            };
            let n = b.direction.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::Usage(format!("beam {k}: direction must be a non-zero vector")));
            }
            let direction = b.direction.map(|c| c / n);
            let spec = BeamSpec {
                direction,
                wavelength: line.branch.wavelength(),
                detuning,
                saturation: b.saturation,
                linewidth: b.linewidth.unwrap_or(line.branch.linewidth()),
                targets: b.targets.clone().unwrap_or_else(|| vec![label(line.isotope)]),
                sweep: b.sweep.as_ref().map(|s| Sweep { span: s.span, period: s.period }),
            };
            spec.validate(k).map_err(Error::domain)?;
            if b.counter_propagating {
                let mut back = spec.clone();
                back.direction = direction.map(|c| -c);
                out.push(spec);
                out.push(back);
            } else {
                out.push(spec);
            }
        }
        Ok(out)
    }

    pub fn setup(&self, records: &[IsotopeRecord]) -> Result<Setup> {
        let trap = self.trap.build()?;
        let mut ions = Vec::new();
        for s in &self.species {
            crate::registry::find(records, s.isotope)?;
            let ion = IonState::barium(s.isotope).map_err(Error::domain)?;
            ions.extend((0..s.count).map(|_| ion.clone()));
        }
        if ions.is_empty() {
            return Err(Error::Usage("scenario has no ions".into()));
        }
        dynamics::thermal_start(&trap, &mut ions, self.initial_temperature, self.run.seed).map_err(Error::domain)?;
        let r = &self.run;
        let engine = engine::by_name(&r.engine)
            .ok_or_else(|| Error::Usage(format!("unknown engine {:?} (reference or parallel)", r.engine)))?;
        Ok(Setup {
            trap,
            ions,
            beams: self.beams(records)?,
            config: SimConfig {
                dt: r.dt,
                steps: r.steps,
                seed: r.seed,
                t0: r.t0,
                trajectory_every: r.trajectory_every,
                temperature_every: r.temperature_every,
                record_energy: r.record_energy,
                z_max: None,
                ejection_factor: r.ejection_factor,
            },
            engine,
        })
    }

    pub fn run(&self, records: &[IsotopeRecord]) -> Result<Outcome> {
        let setup = self.setup(records)?;
        let start = Instant::now();
        let result = dynamics::run_simulation(&setup.trap, setup.ions, &setup.beams, &setup.config, setup.engine)
            .map_err(Error::domain)?;
        Ok(Outcome {
            result,
            wall_time: start.elapsed().as_secs_f64(),
            target: self.target.map(label),
        })
    }
}

pub struct Outcome {
    pub result: SimResult,
    /// s.
    pub wall_time: f64,
    pub target: Option<String>,
}

impl Outcome {
    pub fn target_retained(&self) -> Option<bool> {
        self.target.as_ref().map(|t| self.result.retained(t))
    }

    /// Every species other than the target fully ejected.
    pub fn contaminants_ejected(&self) -> Option<bool> {
        let t = self.target.as_ref()?;
        Some(self.result.species.iter().filter(|s| *s != t).all(|s| self.result.all_ejected(s)))
    }

    /// Everything except wall-time metrics, which live in [`Outcome::metrics_json`].
    pub fn result_json(&self) -> Value {
        let r = &self.result;
        let mut temps = serde_json::Map::new();
        temps.insert("t".into(), json!(r.temperatures.iter().map(|s| s.t).collect::<Vec<_>>()));
        for (k, s) in r.species.iter().enumerate() {
            let series: Vec<Option<f64>> = r
                .temperatures
                .iter()
                .map(|x| Some(x.kelvin[k]).filter(|v| v.is_finite()))
                .collect();
            temps.insert(s.clone(), json!(series));
        }
        json!({
            "seed": r.config.seed,
            "steps": r.steps_taken,
            "t_end": r.t_end(),
            "z_max": r.z_max,
            "engine": r.engine,
            "clamp_count": r.clamp_count,
            "verdict": {
                "target": self.target,
                "target_retained": self.target_retained(),
                "contaminants_ejected": self.contaminants_ejected(),
            },
            "species": r.species.iter().map(|s| json!({
                "label": s,
                "count": r.count(s),
                "ejected": r.ejected(s),
                "retained": r.retained(s),
            })).collect::<Vec<_>>(),
            "ions": r.initial.iter().enumerate().map(|(k, ion)| json!({
                "id": k,
                "species": ion.species,
                "ejected_at": r.ejection_times[k],
                "photons": r.photons[k],
                "final_position": r.final_state[k].position,
                "final_velocity": r.final_state[k].velocity,
            })).collect::<Vec<_>>(),
            "temperatures": temps,
            "energy": r.energy.iter().map(|e| [e.t, e.total]).collect::<Vec<_>>(),
        })
    }

    pub fn metrics_json(&self) -> Value {
        json!({
            "wall_time_s": self.wall_time,
            "steps_per_second": self.result.steps_taken as f64 / self.wall_time.max(1e-9),
        })
    }

    pub fn trajectory_csv(&self, preamble: &str) -> String {
        let r = &self.result;
        let mut s = String::from(preamble);
        s += "t,ion,species,x,y,z,vx,vy,vz,alive\n";
        for p in &r.trajectory {
            s += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                p.t,
                p.ion,
                r.initial[p.ion].species,
                p.position[0],
                p.position[1],
                p.position[2],
                p.velocity[0],
                p.velocity[1],
                p.velocity[2],
                u8::from(p.alive)
            );
        }
        s
    }
}
