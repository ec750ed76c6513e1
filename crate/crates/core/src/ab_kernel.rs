//! The Atangana-Baleanu kernel `k(t) = t^{beta-1} E_{alpha,beta}(-c t^alpha)` and its
//! Laplace symbol `s^{alpha-beta} / (s^alpha + c)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate_breakpoints, QuadOptions};
use crate::special_functions::{check_finite, ml_eval_real, MLParams};

/// Evaluations closer than this to a root of `s^alpha + c` are refused.
pub const POLE_GUARD: f64 = 1.0e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ABSymbolParams {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

impl ABSymbolParams {
    pub fn new(alpha: f64, beta: f64, c: f64) -> Result<Self> {
        let p = ABSymbolParams { alpha, beta, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha = {} must lie in (0, 1]", self.alpha)));
        }
        if !(self.beta >= 1.0) || !self.beta.is_finite() {
            return Err(Error::invalid(format!("beta = {} must be at least 1", self.beta)));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::invalid(format!("c = {} must be positive", self.c)));
        }
        Ok(())
    }

    pub fn ml(&self) -> MLParams {
        MLParams { alpha: self.alpha, beta: self.beta }
    }

    /// Roots of `s^alpha + c` with `|arg s| < pi`. Empty for `alpha <= 1`; the
    /// candidates `c^{1/alpha} e^{+-i pi/alpha}` fall off the principal sheet.
    pub fn symbol_poles(&self) -> Vec<Complex64> {
        let r = self.c.powf(1.0 / self.alpha);
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let ang = (2 * k + 1) as f64 * PI / self.alpha;
            if ang >= PI {
                break;
            }
            out.push(Complex64::from_polar(r, ang));
            out.push(Complex64::from_polar(r, -ang));
            k += 1;
        }
        out
    }
}

pub(crate) fn on_branch_cut(s: Complex64) -> bool {
    s.im == 0.0 && s.re <= 0.0
}

/// `k(t) = t^{beta-1} E_{alpha,beta}(-c t^alpha)`, `t > 0`.
pub fn kernel_eval(params: ABSymbolParams, t: f64) -> Result<f64> {
    params.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("t = {t} must be positive")));
    }
    let e = ml_eval_real(params.ml(), -params.c * t.powf(params.alpha))?;
    Ok(if params.beta == 1.0 { e } else { t.powf(params.beta - 1.0) * e })
}

/// `s^{alpha-beta} / (s^alpha + c)` on the principal branch.
pub fn laplace_symbol(params: ABSymbolParams, s: Complex64) -> Result<Complex64> {
    params.validate()?;
    check_finite(s)?;
    if on_branch_cut(s) {
        return Err(Error::BranchCut(s));
    }
    for p in params.symbol_poles() {
        let d = (s - p).norm();
        if d <= POLE_GUARD {
            return Err(Error::SymbolPole { s, distance: d });
        }
    }
    let sa = s.powf(params.alpha);
    let den = sa + params.c;
    if den.norm() <= POLE_GUARD * params.c {
        return Err(Error::SymbolPole { s, distance: den.norm() });
    }
    Ok(s.powf(params.alpha - params.beta) / den)
}

/// Relative gap between `int_0^{t_max} e^{-st} k(t) dt` and `laplace_symbol(s)`.
///
/// The integral is split into geometrically graded panels towards `t = 0`,
/// a break at `t = 1` and decades beyond it.
pub fn laplace_check(params: ABSymbolParams, s: Complex64, t_max: f64, tol: f64) -> Result<f64> {
    params.validate()?;
    check_finite(s)?;
    if !(s.re > 0.0) {
        return Err(Error::invalid(format!("Re s = {} must be positive", s.re)));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::invalid("t_max must be positive and finite"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let symbol = laplace_symbol(params, s)?;

    let mut points = vec![0.0];
    let mut x = 1.0e-14;
    while x < 1.0 && x < t_max {
        points.push(x);
        x *= 10.0;
    }
    let mut x = 1.0;
    while x < t_max {
        points.push(x);
        x *= 4.0;
    }
    points.push(t_max);

    let integrand = |t: f64| {
        if t <= 0.0 {
            return Complex64::new(if params.beta == 1.0 { 1.0 } else { 0.0 }, 0.0);
        }
        let k = kernel_eval(params, t).unwrap_or(f64::NAN);
        (-s * t).exp() * k
    };
    let opts = QuadOptions { abs_tol: 0.1 * tol * symbol.norm(), rel_tol: 0.1 * tol, max_intervals: 4000 };
    let r = integrate_breakpoints(integrand, &points, opts)?;
    Ok((r.value - symbol).norm() / symbol.norm())
}
