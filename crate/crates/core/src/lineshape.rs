//! Lorentzian fluorescence scans: synthesis and least-squares fitting.
//!
//! The model is `offset + amplitude * h^2 / ((x - center)^2 + h^2)` with
//! `h = fwhm / 2`. A negative amplitude describes a dip. Fits use uniform
//! weights; the wavemeter systematic is carried alongside the statistical
//! uncertainties and never mixed into them.

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::constants::WAVEMETER_SYSTEMATIC_MHZ;
use crate::linalg::{invert, solve};

pub const MIN_POINTS: usize = 5;
pub const MAX_ITERATIONS: usize = 200;
/// Largest cosine between the residual vector and any Jacobian column
/// accepted as a stationary point.
pub const GRADIENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LineshapeError {
    #[error("empty frequency grid")]
    EmptyGrid,
    #[error("frequencies must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("counts must be finite and non-negative (index {0})")]
    BadCounts(usize),
    #[error("fwhm must be positive, got {0}")]
    BadWidth(f64),
    #[error("need at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("scan is flat; no line to fit")]
    FlatData,
    #[error("noise sigma must be finite and non-negative, got {0}")]
    BadNoise(f64),
    #[error("replicated scans must share one frequency grid")]
    GridMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorentzian {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl Lorentzian {
    pub fn eval(&self, x: f64) -> f64 {
        let h = 0.5 * self.fwhm;
        let d = x - self.center;
        self.offset + self.amplitude * h * h / (d * d + h * h)
    }

    fn to_array(self) -> [f64; 4] {
        [self.center, self.fwhm, self.amplitude, self.offset]
    }

    fn from_array(p: [f64; 4]) -> Self {
        Lorentzian {
            center: p[0],
            fwhm: p[1],
            amplitude: p[2],
            offset: p[3],
        }
    }

    /// Value and partial derivatives with respect to (center, fwhm, amplitude, offset).
    fn eval_with_gradient(&self, x: f64) -> (f64, [f64; 4]) {
        let h = 0.5 * self.fwhm;
        let d = x - self.center;
        let den = d * d + h * h;
        let l = h * h / den;
        let den2 = den * den;
        let grad = [
            2.0 * self.amplitude * h * h * d / den2,
            self.amplitude * h * d * d / den2,
            l,
            1.0,
        ];
        (self.offset + self.amplitude * l, grad)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanData {
    /// (frequency MHz, counts), strictly increasing in frequency.
    pub points: Vec<(f64, f64)>,
    pub label: String,
    /// Dwell per point, seconds, when known.
    pub dwell: Option<f64>,
    /// Number of sweeps averaged into each point.
    pub replicas: u32,
}

impl ScanData {
    pub fn new(points: Vec<(f64, f64)>, label: impl Into<String>) -> Result<Self, LineshapeError> {
        if points.is_empty() {
            return Err(LineshapeError::EmptyGrid);
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || (i > 0 && x <= points[i - 1].0) {
                return Err(LineshapeError::NotIncreasing(i));
            }
            if !y.is_finite() || y < 0.0 {
                return Err(LineshapeError::BadCounts(i));
            }
        }
        Ok(ScanData {
            points,
            label: label.into(),
            dwell: None,
            replicas: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    /// Point-by-point mean of sweeps taken on the same grid.
    pub fn average(scans: &[ScanData]) -> Result<ScanData, LineshapeError> {
        let first = scans.first().ok_or(LineshapeError::EmptyGrid)?;
        let mut sum: Vec<(f64, f64)> = first.points.iter().map(|&(x, _)| (x, 0.0)).collect();
        let mut replicas = 0;
        for s in scans {
            if s.len() != sum.len() || s.frequencies().zip(sum.iter()).any(|(a, b)| a != b.0) {
                return Err(LineshapeError::GridMismatch);
            }
            for (acc, p) in sum.iter_mut().zip(&s.points) {
                acc.1 += p.1;
            }
            replicas += s.replicas;
        }
        let n = scans.len() as f64;
        for p in &mut sum {
            p.1 /= n;
        }
        Ok(ScanData {
            points: sum,
            label: first.label.clone(),
            dwell: first.dwell,
            replicas,
        })
    }
}

/// Sample `line` on `grid` with additive Gaussian noise, floored at zero counts.
pub fn synth_scan(
    line: &Lorentzian,
    grid: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<ScanData, LineshapeError> {
    if grid.is_empty() {
        return Err(LineshapeError::EmptyGrid);
    }
    if !(line.fwhm > 0.0) {
        return Err(LineshapeError::BadWidth(line.fwhm));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(LineshapeError::BadNoise(noise_sigma));
    }
    let noise = Normal::new(0.0, noise_sigma).map_err(|_| LineshapeError::BadNoise(noise_sigma))?;
    let points = grid
        .iter()
        .map(|&x| {
            let y = line.eval(x) + if noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            (x, y.max(0.0))
        })
        .collect();
    ScanData::new(points, "synthetic")
}

/// Evenly spaced grid of `n` points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LorentzianFit {
    pub line: Lorentzian,
    /// One-sigma statistical uncertainties on (center, fwhm, amplitude, offset).
    pub stat_unc: Lorentzian,
    /// Systematic on frequency-valued parameters, MHz.
    pub systematic: f64,
    pub converged: bool,
    pub iterations: usize,
    /// sqrt of the residual sum of squares.
    pub residual_norm: f64,
    /// Largest residual-to-column cosine at the solution.
    pub gradient_cosine: f64,
    pub dof: usize,
    pub weighting: &'static str,
}

impl LorentzianFit {
    pub fn center(&self) -> f64 {
        self.line.center
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Starting point from the extremum, the half-maximum span and the edge median.
pub fn auto_seed(scan: &ScanData) -> Result<Lorentzian, LineshapeError> {
    let n = scan.len();
    if n < MIN_POINTS {
        return Err(LineshapeError::TooFewPoints(n));
    }
    let p = &scan.points;
    let (lo, hi) = p
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(q.1), hi.max(q.1)));
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return Err(LineshapeError::FlatData);
    }

    let k = (n / 10).max(2);
    let mut edges: Vec<f64> = p[..k].iter().chain(&p[n - k..]).map(|q| q.1).collect();
    let offset = median(&mut edges);

    let (imax, _) = p
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1 .1 - offset).abs().total_cmp(&(b.1 .1 - offset).abs()))
        .expect("non-empty");
    let amplitude = p[imax].1 - offset;
    let center = p[imax].0;

    let half = 0.5 * amplitude.abs();
    let excess = |i: usize| (p[i].1 - offset).abs();
    let crossing = |i: usize, j: usize| {
        // linear interpolation of the half-max crossing between i (above) and j (below)
        let (a, b) = (excess(i), excess(j));
        let t = if a > b { (a - half) / (a - b) } else { 0.5 };
        p[i].0 + t * (p[j].0 - p[i].0)
    };
    let mut l = imax;
    while l > 0 && excess(l - 1) >= half {
        l -= 1;
    }
    let left = if l > 0 { crossing(l, l - 1) } else { p[0].0 };
    let mut r = imax;
    while r + 1 < n && excess(r + 1) >= half {
        r += 1;
    }
    let right = if r + 1 < n { crossing(r, r + 1) } else { p[n - 1].0 };
    let spacing = (p[n - 1].0 - p[0].0) / (n - 1) as f64;
    let fwhm = (right - left).max(spacing);

    Ok(Lorentzian {
        center,
        fwhm,
        amplitude,
        offset,
    })
}

struct Linearization {
    jtj: [[f64; 4]; 4],
    jtr: [f64; 4],
    rss: f64,
    cosine: f64,
}

fn linearize(scan: &ScanData, line: &Lorentzian) -> Linearization {
    let mut jtj = [[0.0; 4]; 4];
    let mut jtr = [0.0; 4];
    let mut rss = 0.0;
    for &(x, y) in &scan.points {
        let (f, g) = line.eval_with_gradient(x);
        let r = y - f;
        rss += r * r;
        for i in 0..4 {
            jtr[i] += g[i] * r;
            for j in 0..4 {
                jtj[i][j] += g[i] * g[j];
            }
        }
    }
    let rnorm = libm::sqrt(rss);
    let mut cosine: f64 = 0.0;
    for i in 0..4 {
        let col = libm::sqrt(jtj[i][i]);
        if col > 0.0 && rnorm > 0.0 {
            cosine = cosine.max(jtr[i].abs() / (col * rnorm));
        }
    }
    Linearization { jtj, jtr, rss, cosine }
}

fn residual_sum(scan: &ScanData, line: &Lorentzian) -> f64 {
    scan.points
        .iter()
        .map(|&(x, y)| {
            let r = y - line.eval(x);
            r * r
        })
        .sum()
}

/// Levenberg-Marquardt fit of a single Lorentzian over all four parameters.
///
/// Hitting the iteration cap returns an unconverged fit rather than an error.
pub fn fit_lorentzian(
    scan: &ScanData,
    initial_guess: Option<Lorentzian>,
) -> Result<LorentzianFit, LineshapeError> {
    let n = scan.len();
    if n < MIN_POINTS {
        return Err(LineshapeError::TooFewPoints(n));
    }
    let mut line = match initial_guess {
        Some(g) if !(g.fwhm > 0.0) => return Err(LineshapeError::BadWidth(g.fwhm)),
        Some(g) => g,
        None => auto_seed(scan)?,
    };

    // Residuals at rounding level leave the cosine test meaningless.
    let exact = 1e-26 * scan.points.iter().map(|p| p.1 * p.1).sum::<f64>();
    let stationary = |lin: &Linearization| lin.rss <= exact || lin.cosine <= GRADIENT_TOLERANCE;

    let mut lambda = 1e-3;
    let mut lin = linearize(scan, &line);
    let mut converged = stationary(&lin);
    let mut iterations = 0;
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = lin.jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * lin.jtj[i][i].max(1e-300);
            }
            let Some(step) = solve(a, lin.jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut p = line.to_array();
            for (pi, si) in p.iter_mut().zip(step) {
                *pi += si;
            }
            let trial = Lorentzian::from_array(p);
            if trial.fwhm > 0.0 {
                let rss = residual_sum(scan, &trial);
                if rss < lin.rss {
                    line = trial;
                    lambda = (lambda * 0.1).max(1e-12);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        lin = linearize(scan, &line);
        converged = stationary(&lin);
        if !accepted {
            // No downhill step exists at any damping: this is as far as
            // floating point goes. Report what the gradient says.
            break;
        }
    }

    let dof = n - 4;
    let s2 = lin.rss / dof.max(1) as f64;
    let unc = match invert(&lin.jtj) {
        Some(cov) => {
            let mut u = [0.0; 4];
            for i in 0..4 {
                u[i] = libm::sqrt((s2 * cov[i][i]).max(0.0));
            }
            Lorentzian::from_array(u)
        }
        None => Lorentzian::from_array([f64::INFINITY; 4]),
    };

    Ok(LorentzianFit {
        line,
        stat_unc: unc,
        systematic: WAVEMETER_SYSTEMATIC_MHZ,
        converged,
        iterations,
        residual_norm: libm::sqrt(lin.rss),
        gradient_cosine: lin.cosine,
        dof,
        weighting: "uniform",
    })
}
