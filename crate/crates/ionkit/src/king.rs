//! King-plot fits and field-shift inversion over a shift table.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ionkit_core::kingplot::{
    self, FieldShiftModel, KingFit, KingPoint, MassShift, Normalization,
};
use ionkit_core::spectra::{Branch, IsotopeRecord};

use crate::error::{Error, Result};
use crate::registry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassShiftConfig {
    /// `per-pair`, `constant` or `specific-plus-normal`.
    pub reading: String,
    /// MHz (MHz amu for `constant`).
    pub value: f64,
    /// MHz; used by `specific-plus-normal`.
    pub transition_frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldShiftConfig {
    pub isotope: u32,
    pub branch: String,
    /// MHz / fm^2.
    pub field_shift: f64,
    pub mass_shift: MassShiftConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KingConfig {
    /// `mass-difference` or `inverse-mass`.
    pub normalization: String,
    pub effective_variance: bool,
    /// Isotopes left out of the second fit.
    pub subset_exclude: Vec<u32>,
    pub field_shift: FieldShiftConfig,
    pub registry: String,
}

impl Default for KingConfig {
    fn default() -> Self {
        let model = FieldShiftModel::barium_red();
        let (value, transition_frequency) = match model.mass_shift {
            MassShift::SpecificPlusNormal { specific, transition_frequency } => (specific, transition_frequency),
            _ => unreachable!("default reading is specific plus normal"),
        };
        KingConfig {
            normalization: Normalization::MassDifference.name().into(),
            effective_variance: true,
            subset_exclude: vec![130, 132, 133],
            field_shift: FieldShiftConfig {
                isotope: 133,
                branch: "r".into(),
                field_shift: model.field_shift,
                mass_shift: MassShiftConfig {
                    reading: "specific-plus-normal".into(),
                    value,
                    transition_frequency,
                },
            },
            registry: "embedded".into(),
        }
    }
}

fn normalization(s: &str) -> Result<Normalization> {
    [Normalization::MassDifference, Normalization::InverseMass]
        .into_iter()
        .find(|n| n.name() == s)
        .ok_or_else(|| Error::Usage(format!("unknown normalization {s:?} (mass-difference or inverse-mass)")))
}

fn mass_shift(c: &MassShiftConfig) -> Result<MassShift> {
    let readings = kingplot::mass_shift_readings(c.value, c.transition_frequency);
    let names = ["per-pair", "constant", "specific-plus-normal"];
    names
        .iter()
        .position(|n| *n == c.reading)
        .map(|i| readings[i])
        .ok_or_else(|| Error::Usage(format!("unknown mass-shift reading {:?} (one of {})", c.reading, names.join(", "))))
}

pub struct KingOutcome {
    pub points: Vec<KingPoint>,
    pub all: KingFit,
    pub subset_points: Vec<KingPoint>,
    pub subset: KingFit,
    /// `(reading name, lambda)` for every reading; the configured one first.
    pub readings: Vec<(String, f64)>,
    pub lambda: f64,
    pub dnu: f64,
}

pub fn run(records: &[IsotopeRecord], cfg: &KingConfig) -> Result<KingOutcome> {
    let norm = normalization(&cfg.normalization)?;
    let fit = |pts: &[KingPoint]| {
        if cfg.effective_variance {
            kingplot::fit_king_line_effective_variance(pts)
        } else {
            kingplot::fit_king_line(pts)
        }
        .map_err(Error::domain)
    };
    let points = kingplot::king_points(records, norm, &[]);
    let subset_points = kingplot::king_points(records, norm, &cfg.subset_exclude);
    let all = fit(&points)?;
    let subset = fit(&subset_points)?;

    let fs = &cfg.field_shift;
    let iso = registry::find(records, fs.isotope)?;
    let branch: Branch = crate::lines::branch(&fs.branch)?;
    let dnu = iso.shift(branch).value;
    let pair = (fs.isotope, ionkit_core::spectra::REFERENCE_MASS_NUMBER);
    let chosen = mass_shift(&fs.mass_shift)?;
    let model = |m: MassShift| FieldShiftModel {
        field_shift: fs.field_shift,
        mass_shift: m,
        reference: pair.1,
    };
    let lambda = kingplot::invert_field_shift(dnu, pair, &model(chosen)).map_err(Error::domain)?;
    let mut readings = vec![(fs.mass_shift.reading.clone(), lambda)];
    for (name, m) in ["per-pair", "constant", "specific-plus-normal"]
        .iter()
        .zip(kingplot::mass_shift_readings(fs.mass_shift.value, fs.mass_shift.transition_frequency))
    {
        if *name != fs.mass_shift.reading {
            readings.push((name.to_string(), kingplot::invert_field_shift(dnu, pair, &model(m)).map_err(Error::domain)?));
        }
    }
    Ok(KingOutcome { points, all, subset_points, subset, readings, lambda, dnu })
}

fn fit_json(fit: &KingFit, points: &[KingPoint]) -> Value {
    json!({
        "isotopes": points.iter().map(|p| p.mass_number).collect::<Vec<_>>(),
        "slope": fit.slope,
        "slope_uncertainty": fit.slope_uncertainty(),
        "slope_uncertainty_scaled": fit.slope_uncertainty_scaled(),
        "intercept": fit.intercept,
        "covariance": fit.covariance,
        "chi_squared": fit.chi_squared,
        "reduced_chi_squared": fit.reduced_chi_squared(),
        "residuals": fit.residuals,
        "weights": fit.weights,
    })
}

pub fn report_json(o: &KingOutcome, cfg: &KingConfig) -> Value {
    json!({
        "fits": { "all": fit_json(&o.all, &o.points), "subset": fit_json(&o.subset, &o.subset_points) },
        "field_shift": {
            "pair": [cfg.field_shift.isotope, ionkit_core::spectra::REFERENCE_MASS_NUMBER],
            "dnu_mhz": o.dnu,
            "lambda_fm2": o.lambda,
            "reading": cfg.field_shift.mass_shift.reading,
            "alternative_readings": o.readings.iter().skip(1).map(|(n, l)| json!({"reading": n, "lambda_fm2": l})).collect::<Vec<_>>(),
        },
    })
}

pub fn report_table(o: &KingOutcome, cfg: &KingConfig) -> String {
    let mut s = format!("normalization {}\n", cfg.normalization);
    let line = |name: &str, f: &KingFit, pts: &[KingPoint]| {
        format!(
            "{:<8} slope {:+.4} +/- {:.4}  intercept {:+.3}  chi2/dof {:.2}  isotopes {:?}\n",
            name,
            f.slope,
            f.slope_uncertainty(),
            f.intercept,
            f.reduced_chi_squared(),
            pts.iter().map(|p| p.mass_number).collect::<Vec<_>>()
        )
    };
    s += &line("all", &o.all, &o.points);
    s += &line("subset", &o.subset, &o.subset_points);
    s += &format!(
        "dr2({},138) = {:+.4} fm^2 from dnu_{} = {} MHz ({})\n",
        cfg.field_shift.isotope, o.lambda, cfg.field_shift.branch, o.dnu, cfg.field_shift.mass_shift.reading
    );
    for (name, l) in o.readings.iter().skip(1) {
        s += &format!("  reading {name}: {l:+.4} fm^2\n");
    }
    s
}

/// Plot-ready CSV of the full point set against the all-points fit.
pub fn plot_csv(o: &KingOutcome, preamble: &str) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["A", "x", "y", "sigma_x", "sigma_y", "fit_y"]).expect("in-memory write");
    for p in &o.points {
        w.write_record([
            p.mass_number.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            p.sigma_x.to_string(),
            p.sigma_y.to_string(),
            o.all.predict(p.x).to_string(),
        ])
        .expect("in-memory write");
    }
    format!("{preamble}{}", String::from_utf8(w.into_inner().expect("in-memory write")).expect("UTF-8"))
}
