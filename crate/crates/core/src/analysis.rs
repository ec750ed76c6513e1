//! Log-log slope fits and bound checks on computed resolvent families.
//!
//! Norms are exact operator norms in the diagonal model: the largest modulus
//! of the scalar multiplier over all modes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ab_kernel::ABSymbolParams;
use crate::error::{Error, Result};
use crate::operator_model::{SpectralOperator, StateVector};
use crate::quad::{integrate_breakpoints, QuadOptions};
use crate::resolvent_core::{ab_resolvent_norm, ml_family_apply, ResolventFamily, Variant};
use crate::special_functions::{ml_eval_real, MLParams};

pub const MIN_SAMPLES: usize = 10;
pub const MIN_R_SQUARED: f64 = 0.98;
/// A fit with smaller RMS residual in `ln value` is accepted whatever its `r^2`
/// (nearly flat curves explain almost no variance).
pub const MAX_FLAT_RESIDUAL: f64 = 0.05;
pub const SMALL_T_WINDOW: (f64, f64) = (1e-4, 1e-1);
pub const LARGE_T_WINDOW: (f64, f64) = (1e2, 1e4);
/// Allowed excess of the violation ratio over 1 in fit-then-check.
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// RMS of the residuals in `ln value`.
    pub residual_rms: f64,
}

impl DecayFit {
    pub fn is_power_law(&self) -> bool {
        self.r_squared >= MIN_R_SQUARED || self.residual_rms <= MAX_FLAT_RESIDUAL
    }
}

/// Least squares line through `(ln t, ln value)` for the samples with `t` in `window`.
pub fn fit_loglog_slope(samples: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    if !(window.0 < window.1) {
        return Err(Error::invalid(format!("empty window [{}, {}]", window.0, window.1)));
    }
    let inside: Vec<(f64, f64)> = samples.iter().copied().filter(|(t, _)| *t >= window.0 && *t <= window.1).collect();
    if inside.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_SAMPLES, got: inside.len() });
    }
    if let Some(&(t, _)) = inside.iter().find(|(t, _)| !(*t > 0.0)) {
        return Err(Error::NonPositiveSample(t));
    }
    if let Some(&(_, v)) = inside.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::NonPositiveSample(v));
    }
    let n = inside.len() as f64;
    let xs: Vec<f64> = inside.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = inside.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all samples share one abscissa"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let residual_rms = (ss_res / n).sqrt();
    Ok(DecayFit { slope, intercept, r_squared, window, samples: inside.len(), residual_rms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    WindowTooNarrow,
}

impl CheckStatus {
    pub fn passed(self) -> bool {
        self == CheckStatus::Pass
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::WindowTooNarrow => "window-too-narrow",
        }
    }
}

/// A fitted slope against the admissible interval `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub theorem_id: String,
    pub parameters: String,
    pub fit: DecayFit,
    pub expected: f64,
    pub lower: f64,
    pub upper: f64,
    pub status: CheckStatus,
}

impl SlopeCheck {
    pub fn new(theorem_id: &str, parameters: String, fit: DecayFit, expected: f64, lower: f64, upper: f64) -> Self {
        let status = if !fit.is_power_law() {
            CheckStatus::WindowTooNarrow
        } else if fit.slope >= lower && fit.slope <= upper {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        SlopeCheck { theorem_id: theorem_id.into(), parameters, fit, expected, lower, upper, status }
    }

    pub fn symmetric(theorem_id: &str, parameters: String, fit: DecayFit, expected: f64, tol: f64) -> Self {
        Self::new(theorem_id, parameters, fit, expected, expected - tol, expected + tol)
    }

    /// Half-width of the admissible interval around `expected` (the larger side).
    pub fn tolerance(&self) -> f64 {
        (self.expected - self.lower).max(self.upper - self.expected)
    }
}

/// Fit-then-check outcome for `||V(t)|| <= C E_{alpha,beta}(-c1 t^alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: String,
    pub parameters: String,
    pub fitted_constant: f64,
    pub c1: f64,
    pub max_violation_ratio: f64,
    pub grid: Vec<f64>,
    /// Points left out: a NaN value (unresolved) or an underflowing `E(-c1 t^alpha)`.
    pub skipped: usize,
    pub pass: bool,
}

/// `max_k |multiplier_k|` of the requested variant at each grid point.
pub fn family_norms(handle: &ResolventFamily, grid: &[f64], variant: Variant) -> Result<Vec<f64>> {
    let ones = StateVector(vec![Complex64::new(1.0, 0.0); handle.operator().dim()]);
    grid.iter()
        .map(|&t| {
            let v = handle.evaluate(t, &ones, variant)?.value;
            Ok(v.0.iter().map(|z| z.norm()).fold(0.0, f64::max))
        })
        .collect()
}

/// `max_k |E_{alpha,beta}(mu_k t^alpha)|` at each grid point.
pub fn ml_family_norms(op: &SpectralOperator, params: MLParams, grid: &[f64]) -> Result<Vec<f64>> {
    let ones = StateVector(vec![Complex64::new(1.0, 0.0); op.dim()]);
    grid.iter()
        .map(|&t| Ok(ml_family_apply(op, params, t, &ones)?.0.iter().map(|z| z.norm()).fold(0.0, f64::max)))
        .collect()
}

fn describe(handle: &ResolventFamily) -> String {
    let p = handle.params();
    format!("alpha={};beta={};c={};modes={}", p.alpha, p.beta, p.c, handle.operator().dim())
}

const RATE_STEPS: usize = 10;
const UNDERFLOW: f64 = 1e-300;
// the fitted ratio must have come down this far from its peak by the end of the fitting half
const TURNOVER: f64 = 0.9;

/// Fit-then-check of `values[i] <= C E_{alpha,beta}(-c1 t_i^alpha)` with
/// `c1 = c sigma`, `sigma` on a grid in `[0.1 omega, omega]`.
///
/// Using the first half of the grid only, the largest `sigma` is chosen for
/// which `values / E(-c1 t^alpha)` peaks strictly inside the half and has
/// fallen to at most 0.9 of the peak at its end (the smallest `sigma` if none
/// does), and `C` is that peak. The violation ratio is the maximum of
/// `values / (C E(-c1 t^alpha))` over the second half. NaN values and points
/// where `E(-c1 t^alpha)` underflows are left out and counted.
pub fn fit_then_check(
    theorem_id: &str,
    parameters: String,
    grid: &[f64],
    values: &[f64],
    ml: MLParams,
    c: f64,
    omega: f64,
) -> Result<BoundReport> {
    if grid.len() != values.len() {
        return Err(Error::invalid("grid and values differ in length"));
    }
    if grid.len() < 2 * MIN_SAMPLES {
        return Err(Error::InsufficientSamples { needed: 2 * MIN_SAMPLES, got: grid.len() });
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || !(grid[0] > 0.0) {
        return Err(Error::invalid("grid must be positive and increasing"));
    }
    if !(omega > 0.0) {
        return Err(Error::invalid("bound fit needs a positive spectral gap"));
    }
    let half = grid.len() / 2;
    let ratios = |c1: f64| -> Result<Vec<f64>> {
        grid.iter()
            .zip(values)
            .map(|(&t, &v)| {
                let e = ml_eval_real(ml, -c1 * t.powf(ml.alpha))?;
                Ok(if e.abs() > UNDERFLOW { v / e } else { f64::NAN })
            })
            .collect()
    };

    let mut chosen = None;
    for j in (0..RATE_STEPS).rev() {
        let sigma = omega * (0.1 + 0.9 * j as f64 / (RATE_STEPS - 1) as f64);
        let r = ratios(c * sigma)?;
        let first = &r[..half];
        let (imax, peak) =
            first.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        if imax + 1 < half && first[half - 1] <= TURNOVER * peak {
            chosen = Some((c * sigma, peak, r));
            break;
        }
    }
    let (c1, constant, r) = match chosen {
        Some(x) => x,
        None => {
            let c1 = 0.1 * c * omega;
            let r = ratios(c1)?;
            let peak = r[..half].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (c1, peak, r)
        }
    };
    let violation = r[half..].iter().map(|x| x / constant).fold(f64::NEG_INFINITY, f64::max);
    let skipped = r.iter().filter(|x| x.is_nan()).count();
    Ok(BoundReport {
        theorem_id: theorem_id.into(),
        parameters,
        fitted_constant: constant,
        c1,
        max_violation_ratio: violation,
        grid: grid.to_vec(),
        skipped,
        pass: violation.is_finite() && violation <= 1.0 + BOUND_SLACK,
    })
}

/// Norms below this multiple of the quadrature tolerance are not resolved.
pub const RESOLVED_FACTOR: f64 = 100.0;

/// Mittag-Leffler decay bound for `||V(t)||` on `t_grid` (at least three
/// decades), using only the points where `||V(t)||` is resolved.
pub fn check_ml_decay(handle: &ResolventFamily, t_grid: &[f64]) -> Result<BoundReport> {
    spans_decades(t_grid, 3.0)?;
    let floor = RESOLVED_FACTOR * handle.tolerance();
    let norms: Vec<f64> = family_norms(handle, t_grid, Variant::default())?
        .into_iter()
        .map(|n| if n >= floor { n } else { f64::NAN })
        .collect();
    let p = handle.params();
    fit_then_check("ml-decay-bound", describe(handle), t_grid, &norms, p.ml(), p.c, handle.operator().omega())
}

/// The same bound with the modal reference `E_{alpha,beta}(A t^alpha)` in place of `V(t)`.
pub fn check_ml_decay_reference(op: &SpectralOperator, params: &ABSymbolParams, t_grid: &[f64]) -> Result<BoundReport> {
    spans_decades(t_grid, 3.0)?;
    let norms = ml_family_norms(op, params.ml(), t_grid)?;
    let desc = format!("alpha={};beta={};c={};modes={}", params.alpha, params.beta, params.c, op.dim());
    fit_then_check("ml-decay-reference", desc, t_grid, &norms, params.ml(), params.c, op.omega())
}

/// Large-t slope of `||V(t)||` against `-alpha +- 0.05`.
pub fn check_ml_decay_slope(handle: &ResolventFamily, t_grid: &[f64]) -> Result<SlopeCheck> {
    let norms = family_norms(handle, t_grid, Variant::default())?;
    let fit = fit_loglog_slope(&zip(t_grid, &norms), bounds(t_grid)?)?;
    Ok(SlopeCheck::symmetric("ml-decay-slope", describe(handle), fit, -handle.params().alpha, 0.05))
}

/// Small-t slope of `||A^gamma V(t)||` against `-alpha gamma +- 0.1`.
pub fn check_weighted_stability(handle: &ResolventFamily, gamma: f64, t_grid: &[f64]) -> Result<SlopeCheck> {
    unit_interval(gamma, "gamma")?;
    let norms = family_norms(handle, t_grid, Variant::weighted(gamma, 0))?;
    let fit = fit_loglog_slope(&zip(t_grid, &norms), bounds(t_grid)?)?;
    let a = handle.params().alpha;
    Ok(SlopeCheck::symmetric("weighted-stability", format!("{};gamma={gamma}", describe(handle)), fit, -a * gamma, 0.1))
}

/// Small-t slope of `||d/dt V(t)||` against `[alpha - 1 - delta - 0.1, alpha - 1 + 0.1]`.
pub fn check_time_derivative(handle: &ResolventFamily, t_grid: &[f64], delta: f64) -> Result<SlopeCheck> {
    unit_interval(delta, "delta")?;
    let norms = family_norms(handle, t_grid, Variant::derivative(1))?;
    let fit = fit_loglog_slope(&zip(t_grid, &norms), bounds(t_grid)?)?;
    let e = handle.params().alpha - 1.0;
    Ok(SlopeCheck::new(
        "derivative-estimate",
        format!("{};delta={delta}", describe(handle)),
        fit,
        e,
        e - delta - 0.1,
        e + 0.1,
    ))
}

/// Largest relative gap over modes between the contour derivative and a
/// centred difference of `V` with step `h = 1e-4 t`, all evaluated at a
/// per-coefficient tolerance of `1e-13`.
pub fn derivative_fd_gap(handle: &ResolventFamily, t: f64) -> Result<f64> {
    let fine = handle.clone().with_tolerance(1e-13)?;
    let ones = StateVector(vec![Complex64::new(1.0, 0.0); fine.operator().dim()]);
    let h = 1e-4 * t;
    let d = fine.evaluate(t, &ones, Variant::derivative(1))?.value;
    let up = fine.v_apply(t + h, &ones)?;
    let down = fine.v_apply(t - h, &ones)?;
    let mut worst = 0.0f64;
    for ((dk, u), w) in d.0.iter().zip(&up.0).zip(&down.0) {
        let fd = (u - w) / (2.0 * h);
        worst = worst.max((dk - fd).norm() / dk.norm().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Small-t slope of `||A^gamma d^k/dt^k V(t)||` against `-alpha gamma + k (alpha - 1) +- 0.15`.
pub fn check_mixed_estimate(handle: &ResolventFamily, gamma: f64, k: u32, t_grid: &[f64]) -> Result<SlopeCheck> {
    unit_interval(gamma, "gamma")?;
    if !(1..=2).contains(&k) {
        return Err(Error::invalid(format!("derivative order {k} must be 1 or 2")));
    }
    let norms = family_norms(handle, t_grid, Variant::weighted(gamma, k))?;
    let fit = fit_loglog_slope(&zip(t_grid, &norms), bounds(t_grid)?)?;
    let a = handle.params().alpha;
    Ok(SlopeCheck::symmetric(
        "mixed-estimate",
        format!("{};gamma={gamma};k={k}", describe(handle)),
        fit,
        -a * gamma + k as f64 * (a - 1.0),
        0.15,
    ))
}

/// Slopes of `||R(s; A)||` along `arg s = angle` in a small-`|s|` and a
/// large-`|s|` window, against `1 - beta` and `-beta` (`+- 0.05`).
pub fn check_two_regime(
    op: &SpectralOperator,
    params: &ABSymbolParams,
    angle: f64,
    small: &[f64],
    large: &[f64],
) -> Result<(SlopeCheck, SlopeCheck)> {
    let norms = |rs: &[f64]| -> Result<Vec<f64>> {
        rs.iter().map(|&r| ab_resolvent_norm(op, params, Complex64::from_polar(r, angle))).collect()
    };
    let desc = format!("alpha={};beta={};c={};modes={};arg={angle}", params.alpha, params.beta, params.c, op.dim());
    let fs = fit_loglog_slope(&zip(small, &norms(small)?), bounds(small)?)?;
    let fl = fit_loglog_slope(&zip(large, &norms(large)?), bounds(large)?)?;
    Ok((
        SlopeCheck::symmetric("two-regime-small", desc.clone(), fs, 1.0 - params.beta, 0.05),
        SlopeCheck::symmetric("two-regime-large", desc, fl, -params.beta, 0.05),
    ))
}

/// Does the second mode stay at or below the first at every grid point
/// (strictly where `t > 0`)? Returns the largest ratio `|m_2| / |m_1|`.
pub fn check_modal_ordering(handle: &ResolventFamily, t_grid: &[f64]) -> Result<(bool, f64)> {
    let n = handle.operator().dim();
    if n < 2 {
        return Err(Error::invalid("modal ordering needs at least two modes"));
    }
    let ones = StateVector(vec![Complex64::new(1.0, 0.0); n]);
    let mut worst = 0.0f64;
    for &t in t_grid {
        let v = handle.v_apply(t, &ones)?;
        worst = worst.max(v.0[1].norm() / v.0[0].norm());
    }
    Ok((worst < 1.0, worst))
}

/// Largest relative gap over the modes of `v` between the numerical Laplace
/// transform of `t -> V(t) v` and `R(s; A) v`.
pub fn laplace_round_trip_error(handle: &ResolventFamily, s: Complex64, v: &StateVector) -> Result<f64> {
    if !(s.re > 0.0) {
        return Err(Error::invalid(format!("Re s = {} must be positive", s.re)));
    }
    let want = crate::resolvent_core::ab_resolvent_apply(handle.operator(), handle.params(), s, v)?;
    let t_end = 80.0 / s.re;
    let mut points = vec![0.0];
    points.extend((0..=12).map(|i| 10f64.powi(i - 12)));
    let mut t = 4.0;
    while t < t_end {
        points.push(t);
        t *= 4.0;
    }
    points.push(t_end);
    let opts = QuadOptions { abs_tol: 1e-10, rel_tol: 1e-8, max_intervals: 600 };
    let mut worst = 0.0f64;
    for (mode, w) in want.0.iter().enumerate() {
        if v.0[mode] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let f = |t: f64| match handle.v_apply(t, v) {
            Ok(x) => (-s * t).exp() * x.0[mode],
            Err(_) => Complex64::new(f64::NAN, 0.0),
        };
        let got = integrate_breakpoints(f, &points, opts)?.value;
        worst = worst.max((got - w).norm() / w.norm());
    }
    Ok(worst)
}

/// Largest coefficient gap of `V(t) 1` between two contour angles on `times`.
pub fn contour_independence_gap(handle: &ResolventFamily, other_gamma: f64, times: &[f64]) -> Result<f64> {
    let other = ResolventFamily::new(
        handle.operator().clone(),
        *handle.params(),
        crate::resolvent_core::ContourSpec { gamma: other_gamma, ..*handle.contour() },
    )?
    .with_tolerance(handle.tolerance())?;
    let ones = StateVector(vec![Complex64::new(1.0, 0.0); handle.operator().dim()]);
    let mut worst = 0.0f64;
    for &t in times {
        let a = handle.v_apply(t, &ones)?;
        let b = other.v_apply(t, &ones)?;
        worst = a.0.iter().zip(&b.0).map(|(x, y)| (x - y).norm()).fold(worst, f64::max);
    }
    Ok(worst)
}

/// Default contour direction for the two-regime check.
pub const TWO_REGIME_ANGLE: f64 = 0.75 * PI;

fn zip(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().copied().zip(ys.iter().copied()).collect()
}

fn bounds(grid: &[f64]) -> Result<(f64, f64)> {
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if grid.is_empty() || !(lo > 0.0) {
        return Err(Error::invalid("grid must be non-empty and positive"));
    }
    Ok((lo, hi))
}

fn spans_decades(grid: &[f64], decades: f64) -> Result<()> {
    let (lo, hi) = bounds(grid)?;
    if (hi / lo).log10() < decades - 1e-12 {
        return Err(Error::invalid(format!("grid [{lo}, {hi}] spans fewer than {decades} decades")));
    }
    Ok(())
}

fn unit_interval(x: f64, name: &str) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(format!("{name} = {x} must lie in (0, 1)")));
    }
    Ok(())
}

/// One row of the check table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub theorem_id: String,
    pub parameters: String,
    pub fitted_slope: Option<f64>,
    pub expected_slope: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl From<&SlopeCheck> for CheckRow {
    fn from(c: &SlopeCheck) -> Self {
        CheckRow {
            theorem_id: c.theorem_id.clone(),
            parameters: c.parameters.clone(),
            fitted_slope: Some(c.fit.slope),
            expected_slope: Some(c.expected),
            tolerance: c.tolerance(),
            pass: c.status.passed(),
        }
    }
}

impl From<&BoundReport> for CheckRow {
    fn from(b: &BoundReport) -> Self {
        CheckRow {
            theorem_id: b.theorem_id.clone(),
            parameters: format!("{};C={};c1={}", b.parameters, b.fitted_constant, b.c1),
            fitted_slope: None,
            expected_slope: None,
            tolerance: BOUND_SLACK,
            pass: b.pass,
        }
    }
}

pub const CSV_HEADER: &str = "theorem_id,parameters,fitted_slope,expected_slope,tolerance,pass";

impl CheckRow {
    pub fn to_csv(&self) -> String {
        let num = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{:.16e},{}",
            self.theorem_id,
            self.parameters,
            num(self.fitted_slope),
            num(self.expected_slope),
            self.tolerance,
            self.pass
        )
    }
}
