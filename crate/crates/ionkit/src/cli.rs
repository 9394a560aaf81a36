//! The `ionkit` command line.
//!
//! Each subcommand resolves a configuration (from flags, a config file or an
//! earlier artifact), applies `--set key=value` overrides, runs, prints a
//! table and optionally writes a JSON artifact embedding that configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use ionkit_core::spectra::IsotopeRecord;

use crate::artifact::{self, envelope};
use crate::error::{Error, Result};
use crate::fit::{self, FitConfig, Guess};
use crate::king::{self, KingConfig};
use crate::lines::{self, LevelsConfig, LinesConfig};
use crate::overrides;
use crate::plan::{self, PlanFile};
use crate::registry::{self, Source};
use crate::scenario::Scenario;

/// Files shipped with the toolkit, found by name when no such file exists
/// on disk or in the data directory.
pub const BUNDLED: [(&str, &str); 4] = [
    ("fig1c.json", include_str!("../scenarios/fig1c.json")),
    ("purification-20.json", include_str!("../scenarios/purification-20.json")),
    ("purification-500.json", include_str!("../scenarios/purification-500.json")),
    ("purification-short.json", include_str!("../scenarios/purification-short.json")),
];

#[derive(Debug, Parser)]
#[command(name = "ionkit", version, about = "Barium ion spectroscopy, sideband planning and trap dynamics")]
pub struct Cli {
    /// Isotope registry CSV; overrides the data directory and the embedded table.
    #[arg(long, global = true, value_name = "PATH")]
    pub registry: Option<PathBuf>,
    /// Directory searched for input files and `registry.csv`.
    #[arg(long, global = true, env = "IONKIT_DATA_DIR", value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the JSON artifact here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Print the JSON artifact instead of the table.
    #[arg(long)]
    pub json: bool,
    /// Override a configuration key, e.g. `--set run.steps=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hyperfine levels of one isotope.
    Levels {
        #[arg(long)]
        isotope: Option<u32>,
        /// S1/2, P1/2 or D3/2; repeatable. All three by default.
        #[arg(long = "term")]
        terms: Vec<String>,
        /// Config file or earlier `levels` artifact.
        #[arg(long, value_name = "PATH")]
        config: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Transition lines relative to the 138 lines.
    Lines {
        /// Repeatable; every registry isotope by default.
        #[arg(long = "isotope")]
        isotopes: Vec<u32>,
        /// b or r; repeatable. Both by default.
        #[arg(long = "branch")]
        branches: Vec<String>,
        #[arg(long)]
        include_forbidden: bool,
        #[arg(long, value_name = "PATH")]
        config: Option<String>,
        /// Also write the table as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate a sideband plan file.
    Plan {
        /// Plan file or earlier `plan` artifact.
        plan: String,
        #[command(flatten)]
        output: Output,
    },
    /// King plot fits and field-shift inversion.
    King {
        /// Config file or earlier `king` artifact; defaults otherwise.
        config: Option<String>,
        /// Write the plot points and fit line as CSV.
        #[arg(long, value_name = "PATH")]
        plot: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Fit a Lorentzian to a scan CSV. Exits 1 when the fit does not converge.
    Fit {
        /// Scan CSV, or a config file / earlier `fit` artifact (.json).
        input: String,
        #[arg(long, default_value = "scan")]
        label: String,
        #[arg(long)]
        center: Option<f64>,
        #[arg(long)]
        fwhm: Option<f64>,
        #[arg(long)]
        amplitude: Option<f64>,
        #[arg(long)]
        offset: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Run a trap simulation scenario.
    Sim {
        /// Scenario file or earlier `sim` artifact.
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// reference or parallel.
        #[arg(long)]
        engine: Option<String>,
        /// Write sampled trajectories as CSV (needs `run.trajectory_every`).
        #[arg(long, value_name = "PATH")]
        trajectory: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Print or export the isotope registry in use.
    Registry {
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

/// Contents of an input named on the command line: the path itself, then
/// the data directory, then the bundled files.
pub fn locate(name: &str, data_dir: Option<&Path>) -> Result<(String, String)> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p.display(), e));
    let p = Path::new(name);
    if p.exists() {
        return Ok((name.to_string(), read(p)?));
    }
    if let Some(dir) = data_dir {
        let q = dir.join(name);
        if q.exists() {
            return Ok((q.display().to_string(), read(&q)?));
        }
    }
    if let Some((n, text)) = BUNDLED.iter().find(|(n, _)| *n == name) {
        return Ok((format!("<bundled>/{n}"), text.to_string()));
    }
    Err(Error::io(name, std::io::Error::from(std::io::ErrorKind::NotFound)))
}

/// A config of type `T` from a plain config file or from the config block
/// of an artifact written by `command`.
pub fn load_config<T: DeserializeOwned>(path: &str, text: &str, command: &str) -> Result<T> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::json(path, e))?;
    match artifact::config_of(&doc, command) {
        Some(block) => serde_json::from_value(block?)
            .map_err(|e| Error::Usage(format!("{path}: config block: {e}"))),
        None => serde_json::from_str(text).map_err(|e| Error::json(path, e)),
    }
}

struct Context {
    registry: Option<PathBuf>,
    data_dir: Option<PathBuf>,
}

impl Context {
    fn default_registry(&self) -> String {
        registry::resolve(self.registry.as_deref(), self.data_dir.as_deref()).describe()
    }

    /// `--registry` beats whatever the config names.
    fn registry_for(&self, configured: &mut String) {
        if let Some(p) = &self.registry {
            *configured = p.display().to_string();
        }
    }

    fn load_registry(&self, configured: &str) -> Result<Vec<IsotopeRecord>> {
        Source::from_description(configured).load()
    }

    fn load<T: DeserializeOwned>(&self, name: &str, command: &str) -> Result<T> {
        let (path, text) = locate(name, self.data_dir.as_deref())?;
        load_config(&path, &text, command)
    }
}

fn emit(out: &mut dyn Write, output: &Output, doc: &Value, table: &str) -> Result<()> {
    if let Some(p) = &output.out {
        artifact::write_json(p, doc)?;
    }
    let text = if output.json {
        serde_json::to_string_pretty(doc).expect("values serialise") + "\n"
    } else {
        table.to_string()
    };
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn finish<T: Serialize + DeserializeOwned>(cfg: T, output: &Output) -> Result<T> {
    overrides::apply(cfg, &output.set)
}

/// Run one invocation, writing tables to `out`. Returns the exit status for
/// outcomes that are not errors (a fit that did not converge gives 1).
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let ctx = Context {
        registry: cli.registry,
        data_dir: cli.data_dir,
    };
    match cli.command {
        Command::Levels { isotope, terms, config, output } => {
            let mut cfg = match &config {
                Some(c) => ctx.load::<LevelsConfig>(c, "levels")?,
                None => LevelsConfig {
                    isotope: isotope.ok_or_else(|| Error::Usage("levels needs --isotope or --config".into()))?,
                    terms: vec![],
                    registry: ctx.default_registry(),
                },
            };
            if let Some(a) = isotope {
                cfg.isotope = a;
            }
            if !terms.is_empty() {
                cfg.terms = terms;
            }
            if cfg.terms.is_empty() {
                cfg.terms = ["S1/2", "P1/2", "D3/2"].map(String::from).to_vec();
            }
            ctx.registry_for(&mut cfg.registry);
            let cfg = finish(cfg, &output)?;
            let records = ctx.load_registry(&cfg.registry)?;
            let (levels, result) = lines::levels(&records, &cfg)?;
            emit(out, &output, &envelope("levels", &cfg, result), &lines::levels_table(cfg.isotope, &levels))?;
        }
        Command::Lines { isotopes, branches, include_forbidden, config, csv, output } => {
            let mut cfg = match &config {
                Some(c) => ctx.load::<LinesConfig>(c, "lines")?,
                None => LinesConfig {
                    isotopes: vec![],
                    branches: vec!["b".into(), "r".into()],
                    include_forbidden: false,
                    registry: ctx.default_registry(),
                },
            };
            if !isotopes.is_empty() {
                cfg.isotopes = isotopes;
            }
            if !branches.is_empty() {
                cfg.branches = branches;
            }
            cfg.include_forbidden |= include_forbidden;
            ctx.registry_for(&mut cfg.registry);
            let cfg = finish(cfg, &output)?;
            let records = ctx.load_registry(&cfg.registry)?;
            let found = lines::lines(&records, &cfg)?;
            if let Some(p) = &csv {
                artifact::write_text(p, &lines::lines_csv(&found, &artifact::csv_preamble("lines", &cfg)))?;
            }
            let result = Value::Array(found.iter().map(lines::line_json).collect());
            emit(out, &output, &envelope("lines", &cfg, result), &lines::lines_table(&found))?;
        }
        Command::Plan { plan: name, output } => {
            let mut file: PlanFile = ctx.load(&name, "plan")?;
            ctx.registry_for(&mut file.registry);
            let file = finish(file, &output)?;
            let records = ctx.load_registry(&file.registry)?;
            let (report, entries) = plan::evaluate(&file, &records)?;
            emit(out, &output, &envelope("plan", &file, plan::report_json(&report, &entries)), &plan::report_table(&report))?;
        }
        Command::King { config, plot, output } => {
            let mut cfg = match &config {
                Some(c) => ctx.load::<KingConfig>(c, "king")?,
                None => KingConfig {
                    registry: ctx.default_registry(),
                    ..KingConfig::default()
                },
            };
            ctx.registry_for(&mut cfg.registry);
            let cfg = finish(cfg, &output)?;
            let records = ctx.load_registry(&cfg.registry)?;
            let outcome = king::run(&records, &cfg)?;
            if let Some(p) = &plot {
                artifact::write_text(p, &king::plot_csv(&outcome, &artifact::csv_preamble("king", &cfg)))?;
            }
            emit(out, &output, &envelope("king", &cfg, king::report_json(&outcome, &cfg)), &king::report_table(&outcome, &cfg))?;
        }
        Command::Fit { input, label, center, fwhm, amplitude, offset, output } => {
            let mut cfg = if input.ends_with(".json") {
                ctx.load::<FitConfig>(&input, "fit")?
            } else {
                FitConfig {
                    scan: input.clone(),
                    label,
                    guess: Guess::default(),
                }
            };
            let g = &mut cfg.guess;
            g.center = center.or(g.center);
            g.fwhm = fwhm.or(g.fwhm);
            g.amplitude = amplitude.or(g.amplitude);
            g.offset = offset.or(g.offset);
            let cfg = finish(cfg, &output)?;
            let (path, text) = locate(&cfg.scan, ctx.data_dir.as_deref())?;
            let scan = fit::parse_scan(&text, &path, &cfg.label)?;
            let result = fit::run(&scan, &cfg)?;
            emit(out, &output, &envelope("fit", &cfg, fit::report_json(&result, &scan)), &fit::report_table(&result))?;
            if !result.converged {
                eprintln!("ionkit: fit did not converge");
                return Ok(1);
            }
        }
        Command::Sim { scenario, seed, engine, trajectory, output } => {
            let mut sc: Scenario = ctx.load(&scenario, "sim")?;
            if let Some(s) = seed {
                sc.run.seed = s;
            }
            if let Some(e) = engine {
                sc.run.engine = e;
            }
            ctx.registry_for(&mut sc.registry);
            let sc = finish(sc, &output)?;
            let records = ctx.load_registry(&sc.registry)?;
            let outcome = sc.run(&records)?;
            if let Some(p) = &trajectory {
                artifact::write_text(p, &outcome.trajectory_csv(&artifact::csv_preamble("sim", &sc)))?;
            }
            let mut doc = envelope("sim", &sc, outcome.result_json());
            doc["metrics"] = outcome.metrics_json();
            emit(out, &output, &doc, &sim_table(&sc, &outcome))?;
        }
        Command::Registry { out: path } => {
            let records = ctx.load_registry(&ctx.default_registry())?;
            let text = registry::to_csv(&records);
            match path {
                Some(p) => artifact::write_text(&p, &text)?,
                None => out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
            }
        }
    }
    Ok(0)
}

fn sim_table(sc: &Scenario, o: &crate::scenario::Outcome) -> String {
    let r = &o.result;
    let mut s = format!(
        "{}: {} steps to t = {:.6} s, z_max = {:.3e} m, engine {}, {:.1} s wall\n",
        if sc.name.is_empty() { "scenario" } else { &sc.name },
        r.steps_taken,
        r.t_end(),
        r.z_max,
        r.engine,
        o.wall_time
    );
    s += &format!("{:<10}{:>7}{:>9}{:>14}\n", "species", "count", "ejected", "final_T_K");
    for (k, sp) in r.species.iter().enumerate() {
        let t = r
            .temperatures
            .last()
            .map(|x| x.kelvin[k])
            .filter(|v| v.is_finite())
            .map_or("-".to_string(), |v| format!("{v:.3e}"));
        s += &format!("{:<10}{:>7}{:>9}{:>14}\n", sp, r.count(sp), r.ejected(sp), t);
    }
    if let (Some(kept), Some(clean)) = (o.target_retained(), o.contaminants_ejected()) {
        s += &format!("target retained: {kept}, contaminants ejected: {clean}\n");
    }
    if r.clamp_count > 0 {
        s += &format!("close-approach clamps: {}\n", r.clamp_count);
    }
    s
}
