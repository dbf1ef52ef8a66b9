//! Experiment harness: grid-based sup-error measurement, convergence-rate
//! and diameter studies, bound validation, and study persistence.
//!
//! Every study is a pure function of its config: trial t draws its sample
//! from seed `base_seed + t` and nothing else, so runs are reproducible and
//! scheduling-independent (trials may run on any number of threads with
//! identical output). Records serialize to JSON with a schema_version field
//! and export flat CSV for plotting.

use crate::bounds::{self, BoundInputs, BoundReport};
use crate::error::{Error, Result};
use crate::oracle::KernelOracle;
use crate::spectral::{FrequencySample, MultiIndex, SpectralMeasure};
use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Uniform grid over the difference domain [-|S|, |S|]^d.
///
/// Axis points are |S| * (2i - (n-1)) / (n-1), which lands exactly on the
/// corners and, because n is required odd, exactly on 0. The sup over x, y in
/// S x S of any function of x - y equals the sup over the difference domain,
/// so gridding the difference domain halves the sweep dimension; the grid max
/// is a lower approximation of the true sup, which is the right direction for
/// checking an upper bound from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    diameter: f64,
    points_per_axis: usize,
    d: usize,
}

impl GridSpec {
    pub fn new(diameter: f64, points_per_axis: usize, d: usize) -> Result<Self> {
        if !(diameter.is_finite() && diameter >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid diameter must be finite and nonnegative, got {diameter}"
            )));
        }
        if d < 1 {
            return Err(Error::InvalidArgument("grid dimension must be >= 1".into()));
        }
        if points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "points_per_axis must be odd so 0 is a grid point, got {points_per_axis}"
            )));
        }
        if diameter > 0.0 && points_per_axis < 3 {
            return Err(Error::InvalidArgument(
                "a grid with positive diameter needs at least 3 points per axis".into(),
            ));
        }
        Ok(GridSpec {
            diameter,
            points_per_axis,
            d,
        })
    }

    /// Default resolution: 2001 points for d = 1, 101 per axis for d = 2.
    /// Higher dimensions have no default (the grid size explodes); construct
    /// explicitly via [`GridSpec::new`].
    pub fn default_for(diameter: f64, d: usize) -> Result<Self> {
        let points = match d {
            1 => 2001,
            2 => 101,
            _ => {
                return Err(Error::UnsupportedDimension(format!(
                    "no default grid for d = {d}; choose points_per_axis explicitly"
                )))
            }
        };
        Self::new(diameter, points, d)
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The axis values. A zero-diameter grid degenerates to the single
    /// point 0 regardless of points_per_axis.
    pub fn axis(&self) -> Vec<f64> {
        if self.diameter == 0.0 {
            return vec![0.0];
        }
        let n = self.points_per_axis;
        (0..n)
            .map(|i| self.diameter * (2.0 * i as f64 - (n - 1) as f64) / (n - 1) as f64)
            .collect()
    }

    pub fn num_points(&self) -> usize {
        self.axis_len().pow(self.d as u32)
    }

    fn axis_len(&self) -> usize {
        if self.diameter == 0.0 {
            1
        } else {
            self.points_per_axis
        }
    }

    /// All grid points, row-major with the last axis varying fastest. This
    /// enumeration order is shared by every curve evaluated on the grid.
    pub fn points(&self) -> Array2<f64> {
        let axis = self.axis();
        let n = axis.len();
        let total = self.num_points();
        let mut out = Array2::zeros((total, self.d));
        for (row, mut out_row) in out.rows_mut().into_iter().enumerate() {
            let mut idx = row;
            for k in (0..self.d).rev() {
                out_row[k] = axis[idx % n];
                idx /= n;
            }
        }
        out
    }

    /// Cartesian product over all axes but the last: the "outer" loop of the
    /// grid sweep. Shape (axis_len^(d-1), d-1).
    fn outer_points(&self) -> Array2<f64> {
        let axis = self.axis();
        let n = axis.len();
        let outer_d = self.d - 1;
        let total = n.pow(outer_d as u32);
        let mut out = Array2::zeros((total, outer_d));
        for (row, mut out_row) in out.rows_mut().into_iter().enumerate() {
            let mut idx = row;
            for k in (0..outer_d).rev() {
                out_row[k] = axis[idx % n];
                idx /= n;
            }
        }
        out
    }
}

/// The estimator (1/m) sum_j w_j^(p+q) (-1)^{|q|} c_{|p+q|}(w_j . z) at every
/// grid point, in grid enumeration order.
///
/// The inner loop walks the last axis with an incremental phase rotation:
/// with step delta, cos/sin at theta + i * w * delta follow from one sin_cos
/// per (frequency, outer point) and a two-term recurrence. That removes the
/// trig call from the m * points inner product, at the price of a rounding
/// drift on the order of points_per_axis * epsilon (about 1e-13 here), far
/// below the Monte-Carlo errors being measured.
fn estimator_curve(
    sample: &FrequencySample,
    p: &MultiIndex,
    q: &MultiIndex,
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    let d = sample.d();
    if grid.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: grid.d(),
        });
    }
    let total = p.add(q)?;
    if total.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: total.len(),
        });
    }
    let m = sample.m();
    if m == 0 {
        return Err(Error::InvalidArgument(
            "estimator needs at least one frequency".into(),
        ));
    }

    let sign_q = if q.order() % 2 == 1 { -1.0 } else { 1.0 };
    // c_n via the period-4 table, folded into a per-frequency weight and a
    // cos/sin branch selection.
    let (use_sin, tri_sign) = match total.order() % 4 {
        0 => (false, 1.0),
        1 => (true, -1.0),
        2 => (false, -1.0),
        _ => (true, 1.0),
    };

    let axis = grid.axis();
    let n_ax = axis.len();
    let delta = if n_ax > 1 { axis[1] - axis[0] } else { 0.0 };
    let outer = grid.outer_points();
    let n_outer = outer.nrows();
    let freqs = sample.frequencies();

    let mut acc = vec![0.0f64; n_outer * n_ax];
    for j in 0..m {
        let row = freqs.row(j);
        let mut w = sign_q * tri_sign;
        for k in 0..d {
            w *= row[k].powi(total[k] as i32);
        }
        let w_last = row[d - 1];
        let (sd, cd) = (w_last * delta).sin_cos();
        for oi in 0..n_outer {
            let mut theta = w_last * axis[0];
            for k in 0..d - 1 {
                theta += row[k] * outer[(oi, k)];
            }
            let (mut s, mut c) = theta.sin_cos();
            let base = oi * n_ax;
            if use_sin {
                for slot in &mut acc[base..base + n_ax] {
                    *slot += w * s;
                    let (c2, s2) = (c * cd - s * sd, s * cd + c * sd);
                    c = c2;
                    s = s2;
                }
            } else {
                for slot in &mut acc[base..base + n_ax] {
                    *slot += w * c;
                    let (c2, s2) = (c * cd - s * sd, s * cd + c * sd);
                    c = c2;
                    s = s2;
                }
            }
        }
    }
    let inv_m = 1.0 / m as f64;
    Ok(acc.into_iter().map(|v| v * inv_m).collect())
}

/// The exact derivative at every grid point, in grid enumeration order.
fn exact_curve(
    oracle: &KernelOracle,
    p: &MultiIndex,
    q: &MultiIndex,
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    let points = grid.points();
    let mut out = Vec::with_capacity(points.nrows());
    for row in points.rows() {
        let z = row.as_slice().expect("grid points are row-major");
        out.push(oracle.exact_derivative_at(p, q, z)?);
    }
    Ok(out)
}

/// Max over the grid of |exact derivative - estimator|: a grid lower
/// approximation of the sup-norm error over the difference domain.
pub fn sup_error(
    sample: &FrequencySample,
    p: &MultiIndex,
    q: &MultiIndex,
    grid: &GridSpec,
    oracle: &KernelOracle,
) -> Result<f64> {
    let exact = exact_curve(oracle, p, q, grid)?;
    let est = estimator_curve(sample, p, q, grid)?;
    Ok(sup_deviation(&exact, &est))
}

fn sup_deviation(exact: &[f64], est: &[f64]) -> f64 {
    exact
        .iter()
        .zip(est)
        .map(|(e, a)| (e - a).abs())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Rate study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudyConfig {
    pub measure: SpectralMeasure,
    pub p: MultiIndex,
    pub q: MultiIndex,
    pub grid: GridSpec,
    pub m_values: Vec<u64>,
    pub trials: u32,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialError {
    pub m: u64,
    pub trial: u32,
    pub seed: u64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub m: u64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Results of sweeping the feature count m: per-trial sup errors, per-m
/// quantile summaries, and the fitted log-log slope of median error vs m
/// (about -1/2 for a Monte-Carlo estimator), with a bootstrap standard error
/// over trial resamples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStudy {
    pub schema_version: u32,
    pub config: RateStudyConfig,
    pub results: Vec<TrialError>,
    pub summary: Vec<LevelSummary>,
    pub fitted_rate: f64,
    pub fitted_rate_stderr: f64,
}

const BOOTSTRAP_RESAMPLES: usize = 200;
/// XOR-folded into base_seed for the bootstrap stream, keeping it distinct
/// from every trial seed.
const BOOTSTRAP_SEED_SALT: u64 = 0x626f_6f74_7374_7261;

fn check_dims(measure: &SpectralMeasure, p: &MultiIndex, q: &MultiIndex, grid_d: usize) -> Result<()> {
    let d = measure.d();
    for got in [p.len(), q.len(), grid_d] {
        if got != d {
            return Err(Error::DimensionMismatch { expected: d, got });
        }
    }
    Ok(())
}

pub fn rate_study(config: &RateStudyConfig) -> Result<ErrorStudy> {
    check_dims(&config.measure, &config.p, &config.q, config.grid.d())?;
    let mut distinct = config.m_values.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != config.m_values.len() || distinct.len() < 3 {
        return Err(Error::InvalidArgument(
            "rate study needs at least 3 distinct m values".into(),
        ));
    }
    if config.m_values.iter().any(|&m| m < 1) {
        return Err(Error::InvalidArgument("every m must be >= 1".into()));
    }
    if config.trials < 10 {
        return Err(Error::InvalidArgument(format!(
            "rate study needs at least 10 trials, got {}",
            config.trials
        )));
    }

    let oracle = KernelOracle::new(config.measure.clone());
    let exact = exact_curve(&oracle, &config.p, &config.q, &config.grid)?;

    let mut results = Vec::with_capacity(config.m_values.len() * config.trials as usize);
    for &m in &config.m_values {
        let sups: Vec<f64> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let seed = config.base_seed + u64::from(t);
                let sample = config.measure.sample(m as usize, seed);
                let est = estimator_curve(&sample, &config.p, &config.q, &config.grid)
                    .expect("dimensions were validated");
                sup_deviation(&exact, &est)
            })
            .collect();
        for (t, sup) in sups.into_iter().enumerate() {
            results.push(TrialError {
                m,
                trial: t as u32,
                seed: config.base_seed + t as u64,
                sup_error: sup,
            });
        }
    }

    let summary: Vec<LevelSummary> = config
        .m_values
        .iter()
        .map(|&m| {
            let errs: Vec<f64> = results
                .iter()
                .filter(|r| r.m == m)
                .map(|r| r.sup_error)
                .collect();
            LevelSummary {
                m,
                median: quantile(&errs, 0.5),
                q25: quantile(&errs, 0.25),
                q75: quantile(&errs, 0.75),
            }
        })
        .collect();

    let ln_m: Vec<f64> = summary.iter().map(|s| (s.m as f64).ln()).collect();
    let ln_med: Vec<f64> = summary.iter().map(|s| s.median.ln()).collect();
    let (fitted_rate, _) = ols(&ln_m, &ln_med);

    // Bootstrap over trials: resample each m level with replacement, refit,
    // and report the spread of the slopes. Sequential and seeded, so the
    // stderr is part of the deterministic record.
    let trials = config.trials as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.base_seed ^ BOOTSTRAP_SEED_SALT);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let per_level: Vec<Vec<f64>> = config
        .m_values
        .iter()
        .map(|&m| {
            results
                .iter()
                .filter(|r| r.m == m)
                .map(|r| r.sup_error)
                .collect()
        })
        .collect();
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let meds: Vec<f64> = per_level
            .iter()
            .map(|errs| {
                let resampled: Vec<f64> = (0..trials)
                    .map(|_| errs[(rng.next_u64() % trials as u64) as usize])
                    .collect();
                quantile(&resampled, 0.5).ln()
            })
            .collect();
        slopes.push(ols(&ln_m, &meds).0);
    }
    let mean_slope = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let var = slopes
        .iter()
        .map(|s| (s - mean_slope) * (s - mean_slope))
        .sum::<f64>()
        / (slopes.len() - 1) as f64;

    Ok(ErrorStudy {
        schema_version: crate::SCHEMA_VERSION,
        config: config.clone(),
        results,
        summary,
        fitted_rate,
        fitted_rate_stderr: var.sqrt(),
    })
}

impl ErrorStudy {
    /// Flat export, one row per (m, trial).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,trial,seed,sup_error\n");
        for r in &self.results {
            writeln!(out, "{},{},{},{}", r.m, r.trial, r.seed, r.sup_error).unwrap();
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Diameter study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterStudyConfig {
    pub measure: SpectralMeasure,
    pub p: MultiIndex,
    pub q: MultiIndex,
    pub m: u64,
    pub diameters: Vec<f64>,
    pub trials: u32,
    pub base_seed: u64,
    pub points_per_axis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterTrial {
    pub diameter: f64,
    pub m: u64,
    pub trial: u32,
    pub seed: u64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterLevel {
    pub diameter: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Results of sweeping the evaluation-set diameter at fixed m. The bound
/// predicts sup error growing like sqrt(ln |S|), so `regression` fits
/// (median error)^2 * m against ln |S| over the positive diameters (None
/// when fewer than two are positive); trial t reuses seed base_seed + t at
/// every diameter, making per-trial growth curves meaningful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterStudy {
    pub schema_version: u32,
    pub config: DiameterStudyConfig,
    pub results: Vec<DiameterTrial>,
    pub medians: Vec<DiameterLevel>,
    pub regression: Option<RegressionFit>,
}

pub fn diameter_study(config: &DiameterStudyConfig) -> Result<DiameterStudy> {
    check_dims(&config.measure, &config.p, &config.q, config.measure.d())?;
    if config.diameters.is_empty() {
        return Err(Error::InvalidArgument("no diameters given".into()));
    }
    if !config
        .diameters
        .windows(2)
        .all(|w| w[0] < w[1] && w[0].is_finite())
        || !config.diameters.iter().all(|d| d.is_finite() && *d >= 0.0)
    {
        return Err(Error::InvalidArgument(
            "diameters must be finite, nonnegative, and strictly increasing".into(),
        ));
    }
    if config.m < 1 || config.trials < 1 {
        return Err(Error::InvalidArgument(
            "diameter study needs m >= 1 and trials >= 1".into(),
        ));
    }

    let d = config.measure.d();
    let oracle = KernelOracle::new(config.measure.clone());
    let mut results = Vec::new();
    let mut medians = Vec::new();
    for &diam in &config.diameters {
        let grid = GridSpec::new(diam, config.points_per_axis, d)?;
        let exact = exact_curve(&oracle, &config.p, &config.q, &grid)?;
        let sups: Vec<f64> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let seed = config.base_seed + u64::from(t);
                let sample = config.measure.sample(config.m as usize, seed);
                let est = estimator_curve(&sample, &config.p, &config.q, &grid)
                    .expect("dimensions were validated");
                sup_deviation(&exact, &est)
            })
            .collect();
        medians.push(DiameterLevel {
            diameter: diam,
            median: quantile(&sups, 0.5),
        });
        for (t, sup) in sups.into_iter().enumerate() {
            results.push(DiameterTrial {
                diameter: diam,
                m: config.m,
                trial: t as u32,
                seed: config.base_seed + t as u64,
                sup_error: sup,
            });
        }
    }

    let positive: Vec<&DiameterLevel> = medians.iter().filter(|l| l.diameter > 0.0).collect();
    let regression = if positive.len() >= 2 {
        let x: Vec<f64> = positive.iter().map(|l| l.diameter.ln()).collect();
        let y: Vec<f64> = positive
            .iter()
            .map(|l| l.median * l.median * config.m as f64)
            .collect();
        let (slope, intercept) = ols(&x, &y);
        Some(RegressionFit { slope, intercept })
    } else {
        None
    };

    Ok(DiameterStudy {
        schema_version: crate::SCHEMA_VERSION,
        config: config.clone(),
        results,
        medians,
        regression,
    })
}

impl DiameterStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("diameter,m,trial,sup_error\n");
        for r in &self.results {
            writeln!(out, "{},{},{},{}", r.diameter, r.m, r.trial, r.sup_error).unwrap();
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Bound validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub measure: SpectralMeasure,
    pub p: MultiIndex,
    pub q: MultiIndex,
    pub grid: GridSpec,
    pub m: u64,
    pub t: f64,
    pub trials: u32,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTrial {
    pub trial: u32,
    pub seed: u64,
    pub sup_error: f64,
    pub violated: bool,
}

/// Empirical check of the high-probability bound: fraction of independent
/// trials whose grid sup error exceeds the bound, compared against the
/// nominal failure probability 2 exp(-t) plus three binomial standard
/// deviations of slack at the given trial count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub schema_version: u32,
    pub config: ValidationConfig,
    /// Moment-growth constant resolved from the measure and orders.
    pub k: f64,
    pub sigma_pq: f64,
    pub c_pq: f64,
    pub bound: BoundReport,
    pub results: Vec<ValidationTrial>,
    pub violation_fraction: f64,
    pub allowed_fraction: f64,
    pub binomial_slack: f64,
    pub within_tolerance: bool,
}

pub fn validate_bound(config: &ValidationConfig) -> Result<ValidationRecord> {
    check_dims(&config.measure, &config.p, &config.q, config.grid.d())?;
    if config.trials < 50 {
        return Err(Error::InvalidArgument(format!(
            "bound validation needs at least 50 trials for a meaningful fraction, got {}",
            config.trials
        )));
    }
    if config.m < 1 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    // A certified constant is a precondition: this propagates
    // NoCertifiedConstant for unsupported (measure, p, q) combinations.
    let k = config.measure.certified_k(&config.p, &config.q)?;
    let sigma_pq = config.measure.sigma_pq(&config.p, &config.q)?;
    let c_pq = config.measure.c_pq(&config.p, &config.q)?;
    let bound = bounds::uniform_bound(&BoundInputs {
        m: config.m,
        diameter: config.grid.diameter(),
        d: config.measure.d(),
        sigma_pq,
        c_pq,
        k,
        t: config.t,
    })?;

    let oracle = KernelOracle::new(config.measure.clone());
    let exact = exact_curve(&oracle, &config.p, &config.q, &config.grid)?;
    let sups: Vec<f64> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = config.base_seed + u64::from(t);
            let sample = config.measure.sample(config.m as usize, seed);
            let est = estimator_curve(&sample, &config.p, &config.q, &config.grid)
                .expect("dimensions were validated");
            sup_deviation(&exact, &est)
        })
        .collect();

    let results: Vec<ValidationTrial> = sups
        .into_iter()
        .enumerate()
        .map(|(t, sup)| ValidationTrial {
            trial: t as u32,
            seed: config.base_seed + t as u64,
            sup_error: sup,
            violated: sup > bound.total,
        })
        .collect();
    let violations = results.iter().filter(|r| r.violated).count();
    let violation_fraction = violations as f64 / config.trials as f64;
    let allowed_fraction = bound.failure_probability;
    let binomial_slack =
        3.0 * (allowed_fraction * (1.0 - allowed_fraction) / config.trials as f64).sqrt();

    Ok(ValidationRecord {
        schema_version: crate::SCHEMA_VERSION,
        config: config.clone(),
        k,
        sigma_pq,
        c_pq,
        bound,
        violation_fraction,
        allowed_fraction,
        binomial_slack,
        within_tolerance: violation_fraction <= allowed_fraction + binomial_slack,
        results,
    })
}

impl ValidationRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,sup_error,bound,violated\n");
        for r in &self.results {
            writeln!(out, "{},{},{},{}", r.trial, r.sup_error, self.bound.total, r.violated)
                .unwrap();
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Statistics helpers
// ---------------------------------------------------------------------------

/// Linear-interpolation quantile (the "type 7" convention: position
/// q * (n - 1) in the sorted sample). q = 0.5 averages the middle pair for
/// even n.
fn quantile(xs: &[f64], q: f64) -> f64 {
    debug_assert!(!xs.is_empty() && (0.0..=1.0).contains(&q));
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Ordinary least squares of y on x; returns (slope, intercept).
fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    debug_assert!(x.len() == y.len() && x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// Records that carry the file schema version.
pub trait SchemaVersioned {
    fn schema_version(&self) -> u32;
}

impl SchemaVersioned for ErrorStudy {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

impl SchemaVersioned for DiameterStudy {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

impl SchemaVersioned for ValidationRecord {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

/// Writes bytes through a sibling temp file and a rename, so the destination
/// is never observable half-written. A crash between the two steps can leave
/// a `.tmp` file behind; it is overwritten on the next attempt.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp_path = path.with_file_name(tmp_name);
    std::fs::write(&tmp_path, bytes)?;
    std::fs::rename(&tmp_path, path)?;
    Ok(())
}

/// Serializes a record to pretty JSON (plus trailing newline) atomically.
/// Output bytes are a pure function of the value: field order is fixed and
/// floats print in shortest round-trip form.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serialize: {e}")))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// Loads a record, surfacing parse diagnostics (line and column from the
/// JSON parser) and rejecting schema versions this build does not read.
pub fn load_json<T: DeserializeOwned + SchemaVersioned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let value: T = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if value.schema_version() != crate::SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: value.schema_version(),
            supported: crate::SCHEMA_VERSION,
        });
    }
    Ok(value)
}
