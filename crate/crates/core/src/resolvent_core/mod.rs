//! The fractional resolvent
//! `R(s; A) = s^{alpha-beta} / (s^alpha + c) (s^{alpha-1} I - A)^{-1}` and the
//! family `V(t) = (1/2 pi i) int e^{st} R(s; A) ds` over the two-ray contour.
//!
//! `V(t)` is computed by quadrature in `u = ln r` on both rays with radii
//! scaled by `1/t`. The inner radius is pushed down until the neglected piece
//! near `s = 0` (estimated from the local power law of the integrand) is
//! below a hundredth of the tolerance, the outer radius until the exponential
//! tail is, and the node count is doubled until two successive results agree
//! to the tolerance.

mod contour;

pub use contour::{admissible_angle, build_contour, resolvent_poles, ContourNode, ContourSpec, Spacing};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ab_kernel::{laplace_symbol, ABSymbolParams};
use crate::error::{Error, Result};
use crate::operator_model::{frac_power_factors, SpectralOperator, StateVector};
use crate::special_functions::{ml_eval, ml_eval_real, MLParams};
use contour::{nodes_from_radial, radial_rule};

/// Default absolute tolerance per coefficient for [`ResolventFamily::v_apply`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const MAX_DOUBLINGS: usize = 8;
const MIN_RADIUS: f64 = 1e-280;
// e^{-r t |cos gamma|} at the outer radius, at least
const OUTER_DECAY: f64 = 80.0;

struct Powers {
    sab_over: Complex64,
    sa1: Complex64,
}

fn powers(params: &ABSymbolParams, s: Complex64) -> Result<Powers> {
    let k = laplace_symbol(*params, s)?;
    Ok(Powers { sab_over: k, sa1: s.powf(params.alpha - 1.0) })
}

fn mode_factor(p: &Powers, mu: Complex64, s: Complex64) -> Result<Complex64> {
    let d = p.sa1 - mu;
    if d.norm() <= 1.0e-14 * (1.0 + p.sa1.norm()) {
        return Err(Error::SpectralCollision { z: s, eigenvalue: mu });
    }
    Ok(p.sab_over / d)
}

/// `R(s; A) v`, coefficients `k(s) v_k / (s^{alpha-1} - mu_k)`.
pub fn ab_resolvent_apply(
    op: &SpectralOperator,
    params: &ABSymbolParams,
    s: Complex64,
    v: &StateVector,
) -> Result<StateVector> {
    op.check_state(v)?;
    let p = powers(params, s)?;
    let out = op
        .eigenvalues()
        .iter()
        .zip(v.coefficients())
        .map(|(mu, c)| mode_factor(&p, *mu, s).map(|f| f * c))
        .collect::<Result<Vec<_>>>()?;
    Ok(StateVector(out))
}

/// `||R(s; A)|| = max_k |k(s) / (s^{alpha-1} - mu_k)|`.
pub fn ab_resolvent_norm(op: &SpectralOperator, params: &ABSymbolParams, s: Complex64) -> Result<f64> {
    let p = powers(params, s)?;
    op.eigenvalues().iter().try_fold(0.0f64, |m, mu| Ok(m.max(mode_factor(&p, *mu, s)?.norm())))
}

/// Solves `k(s) (s^{alpha-1} u - v) = A u` for `u` componentwise:
/// `u_k = k(s) v_k / (k(s) s^{alpha-1} - mu_k)`.
pub fn solved_symbol_resolvent_apply(
    op: &SpectralOperator,
    params: &ABSymbolParams,
    s: Complex64,
    v: &StateVector,
) -> Result<StateVector> {
    op.check_state(v)?;
    let k = laplace_symbol(*params, s)?;
    let ks = k * s.powf(params.alpha - 1.0);
    let out = op
        .eigenvalues()
        .iter()
        .zip(v.coefficients())
        .map(|(mu, c)| {
            let d = ks - mu;
            if d.norm() <= 1.0e-14 * (1.0 + ks.norm()) {
                Err(Error::SpectralCollision { z: s, eigenvalue: *mu })
            } else {
                Ok(k * c / d)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StateVector(out))
}

/// Modal reference `E_{alpha,beta}(mu_k t^alpha) v_k`, i.e. `E(-lambda_k t^alpha)` with `lambda_k = -mu_k`.
pub fn ml_family_apply(op: &SpectralOperator, params: MLParams, t: f64, v: &StateVector) -> Result<StateVector> {
    op.check_state(v)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("t = {t} must be positive")));
    }
    let ta = t.powf(params.alpha);
    let out = op
        .eigenvalues()
        .iter()
        .zip(v.coefficients())
        .map(|(mu, c)| {
            let e = if mu.im == 0.0 {
                Complex64::new(ml_eval_real(params, mu.re * ta)?, 0.0)
            } else {
                ml_eval(params, mu * ta)?
            };
            Ok(e * c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StateVector(out))
}

/// What to integrate against `e^{st} R(s; A)`: a factor `s^k` (the `k`-th time
/// derivative) and optionally `A^gamma`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub time_derivative: u32,
    pub frac_power: Option<f64>,
}

impl Variant {
    pub fn derivative(k: u32) -> Self {
        Variant { time_derivative: k, frac_power: None }
    }

    pub fn weighted(gamma: f64, k: u32) -> Self {
        Variant { time_derivative: k, frac_power: Some(gamma) }
    }
}

/// Error contributions reported with every family evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Difference between the last two node doublings (max over coefficients).
    pub discretization: f64,
    /// Estimated size of the neglected piece `|s| < r_min`.
    pub inner_truncation: f64,
    /// Estimated size of the neglected piece `|s| > r_max`.
    pub outer_truncation: f64,
    pub nodes_per_ray: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub gamma: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.discretization + self.inner_truncation + self.outer_truncation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyValue {
    pub value: StateVector,
    pub budget: ErrorBudget,
}

/// `V(t)` for a fixed operator, kernel and contour. Construction refuses
/// `beta >= 1 + alpha`, where the integrand is not integrable at `s = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventFamily {
    operator: SpectralOperator,
    params: ABSymbolParams,
    contour: ContourSpec,
    tolerance: f64,
    gamma: f64,
}

impl ResolventFamily {
    pub fn new(operator: SpectralOperator, params: ABSymbolParams, contour: ContourSpec) -> Result<Self> {
        params.validate()?;
        if params.beta >= 1.0 + params.alpha {
            return Err(Error::IllPosed { alpha: params.alpha, beta: params.beta });
        }
        contour.validate(&operator)?;
        let gamma = admissible_angle(&operator, &params, contour.gamma)?;
        Ok(ResolventFamily { operator, params, contour, tolerance: DEFAULT_TOLERANCE, gamma })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(Error::invalid("tolerance must be positive"));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn operator(&self) -> &SpectralOperator {
        &self.operator
    }

    pub fn params(&self) -> &ABSymbolParams {
        &self.params
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Contour angle after pole avoidance.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `V(t) v`.
    pub fn v_apply(&self, t: f64, v: &StateVector) -> Result<StateVector> {
        Ok(self.evaluate(t, v, Variant::default())?.value)
    }

    /// `V(t) v - E_{alpha,beta}(A t^alpha) v`.
    pub fn decomposition_residual(&self, t: f64, v: &StateVector) -> Result<StateVector> {
        let full = self.v_apply(t, v)?;
        let ml = ml_family_apply(&self.operator, self.params.ml(), t, v)?;
        Ok(StateVector(full.0.iter().zip(&ml.0).map(|(a, b)| a - b).collect()))
    }

    /// `d^k/dt^k [A^gamma] V(t) v` with its error budget.
    pub fn evaluate(&self, t: f64, v: &StateVector, variant: Variant) -> Result<FamilyValue> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("t = {t} must be positive")));
        }
        self.operator.check_state(v)?;
        let weights: Vec<Complex64> = match variant.frac_power {
            Some(g) => {
                frac_power_factors(&self.operator, g)?.iter().zip(v.coefficients()).map(|(f, c)| f * c).collect()
            }
            None => v.coefficients().to_vec(),
        };
        let integrand = Integrand { family: self, t, weights: &weights, k: variant.time_derivative };

        let cos_g = self.gamma.cos().abs();
        let tol = self.tolerance;
        let ref_span = (self.contour.r_max / self.contour.r_min).ln();

        let mut r_min = self.contour.r_min / t;
        let mut inner = integrand.inner_tail(r_min)?;
        while inner > 0.01 * tol && r_min > MIN_RADIUS {
            r_min /= 100.0;
            inner = integrand.inner_tail(r_min)?;
        }
        let mut r_max = self.contour.r_max.max(OUTER_DECAY / cos_g) / t;
        let mut outer = integrand.outer_tail(r_max, cos_g)?;
        while outer > 0.01 * tol && r_max * t < 1e6 {
            r_max *= 2.0;
            outer = integrand.outer_tail(r_max, cos_g)?;
        }

        let span = (r_max / r_min).ln();
        let mut n = ((self.contour.n_nodes as f64) * (span / ref_span).max(1.0)).ceil() as usize;
        let mut prev = integrand.sum(r_min, r_max, n, self.contour.spacing)?;
        let mut last_diff = f64::INFINITY;
        for _ in 0..MAX_DOUBLINGS {
            n = match self.contour.spacing {
                Spacing::LogUniform => 2 * n - 1,
                Spacing::Geometric => 2 * n,
            };
            let next = integrand.sum(r_min, r_max, n, self.contour.spacing)?;
            let diff = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prev = next;
            last_diff = diff;
            if diff <= tol {
                let budget = ErrorBudget {
                    discretization: diff,
                    inner_truncation: inner,
                    outer_truncation: outer,
                    nodes_per_ray: n,
                    r_min,
                    r_max,
                    gamma: self.gamma,
                };
                return Ok(FamilyValue { value: StateVector(prev), budget });
            }
        }
        Err(Error::no_convergence(
            "contour quadrature",
            format!("successive refinements differ by {last_diff:e} > {tol:e} at t = {t} with {n} nodes per ray"),
        ))
    }
}

/// `V(t) v` on a handle; free-function form.
pub fn v_apply(handle: &ResolventFamily, t: f64, v: &StateVector) -> Result<StateVector> {
    handle.v_apply(t, v)
}

/// `K(t) v = V(t) v - E_{alpha,beta}(A t^alpha) v`; free-function form.
pub fn decomposition_residual(handle: &ResolventFamily, t: f64, v: &StateVector) -> Result<StateVector> {
    handle.decomposition_residual(t, v)
}

struct Integrand<'a> {
    family: &'a ResolventFamily,
    t: f64,
    weights: &'a [Complex64],
    k: u32,
}

impl Integrand<'_> {
    /// `e^{st} s^k R_j(s) w_j` for every mode `j`.
    fn at(&self, s: Complex64) -> Result<Vec<Complex64>> {
        let p = powers(&self.family.params, s)?;
        let pre = (s * self.t).exp() * s.powu(self.k);
        self.family
            .operator
            .eigenvalues()
            .iter()
            .zip(self.weights)
            .map(|(mu, w)| Ok(pre * mode_factor(&p, *mu, s)? * w))
            .collect()
    }

    /// `max_j |integrand|` at radius `r` on both rays, per unit `|ds| / (2 pi)`.
    fn magnitude(&self, r: f64) -> Result<f64> {
        let e = Complex64::from_polar(r, self.family.gamma);
        let up = self.at(e)?;
        let down = self.at(e.conj())?;
        Ok(up.iter().chain(&down).map(|z| z.norm()).fold(0.0, f64::max) / (2.0 * std::f64::consts::PI))
    }

    /// Both rays' contribution from `|s| < r`, assuming the power law seen
    /// over the decade above `r` continues down to 0.
    fn inner_tail(&self, r: f64) -> Result<f64> {
        let g0 = self.magnitude(r)?;
        if g0 == 0.0 {
            return Ok(0.0);
        }
        let g1 = self.magnitude(10.0 * r)?;
        let p = (g1 / g0).log10();
        if p + 1.0 <= 0.01 {
            return Ok(f64::INFINITY);
        }
        Ok(2.0 * g0 * r / (p + 1.0))
    }

    /// Both rays' contribution from `|s| > r`: the integrand decays like
    /// `e^{-r t |cos gamma|}` times a power.
    fn outer_tail(&self, r: f64, cos_g: f64) -> Result<f64> {
        Ok(2.0 * self.magnitude(r)? / (self.t * cos_g))
    }

    fn sum(&self, r_min: f64, r_max: f64, n: usize, spacing: Spacing) -> Result<Vec<Complex64>> {
        let radial = radial_rule(r_min, r_max, n, spacing);
        let nodes = nodes_from_radial(self.family.gamma, &radial);
        let terms = evaluate_nodes(&nodes, |node| {
            let f = self.at(node.s)?;
            Ok(f.into_iter().map(|x| x * node.w).collect::<Vec<_>>())
        })?;
        // fixed summation order: ascending |s|, upper before lower
        let mut acc = vec![Complex64::new(0.0, 0.0); self.weights.len()];
        for term in &terms {
            for (a, x) in acc.iter_mut().zip(term) {
                *a += x;
            }
        }
        Ok(acc)
    }
}

#[cfg(feature = "parallel")]
fn evaluate_nodes<F>(nodes: &[ContourNode], f: F) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(&ContourNode) -> Result<Vec<Complex64>> + Sync,
{
    use rayon::prelude::*;
    nodes.par_iter().with_min_len(64).map(&f).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_nodes<F>(nodes: &[ContourNode], f: F) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(&ContourNode) -> Result<Vec<Complex64>>,
{
    nodes.iter().map(f).collect()
}
