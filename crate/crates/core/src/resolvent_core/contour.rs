use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::ab_kernel::ABSymbolParams;
use crate::error::{Error, Result};
use crate::operator_model::SpectralOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    /// Trapezoidal rule in `u = ln r` on equally spaced `u`.
    LogUniform,
    /// Composite 8-point Gauss-Legendre in `u = ln r` on geometrically graded
    /// radial panels; `n_nodes` is rounded up to a multiple of 8.
    Geometric,
}

/// The two rays `r e^{-i gamma}` (inward) and `r e^{+i gamma}` (outward),
/// truncated to `r_min <= r <= r_max`.
///
/// When used by a [`super::ResolventFamily`] the radii are reference values at
/// `t = 1` and are divided by `t` at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub gamma: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_nodes: usize,
    pub spacing: Spacing,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec { gamma: 0.75 * PI, r_min: 1e-8, r_max: 200.0, n_nodes: 64, spacing: Spacing::LogUniform }
    }
}

impl ContourSpec {
    pub fn with_gamma(gamma: f64) -> Self {
        ContourSpec { gamma, ..Default::default() }
    }

    pub fn validate(&self, op: &SpectralOperator) -> Result<()> {
        if !(self.gamma > FRAC_PI_2 && self.gamma < PI) {
            return Err(Error::invalid(format!("contour angle {} must lie in (pi/2, pi)", self.gamma)));
        }
        if !(self.gamma > op.theta()) {
            return Err(Error::invalid(format!(
                "contour angle {} must exceed the sectoriality angle {}",
                self.gamma,
                op.theta()
            )));
        }
        if !(self.r_min > 0.0 && self.r_min < 1.0 && self.r_max > 1.0 && self.r_max.is_finite()) {
            return Err(Error::invalid("contour radii must satisfy 0 < r_min < 1 < r_max"));
        }
        if self.n_nodes < 8 {
            return Err(Error::invalid("need at least 8 nodes per ray"));
        }
        Ok(())
    }
}

/// A quadrature node on the contour. The weight includes `ds` along the
/// oriented contour and the factor `1/(2 pi i)`, so that
/// `(1/2 pi i) int f(s) ds ~ sum_j w_j f(s_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourNode {
    pub s: Complex64,
    pub w: Complex64,
}

const GL8_X: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329_0, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] =
    [0.362_683_783_378_362_0, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Radial nodes `(r_j, dr_j)` on `[r_min, r_max]`, ascending.
pub(crate) fn radial_rule(r_min: f64, r_max: f64, n: usize, spacing: Spacing) -> Vec<(f64, f64)> {
    let (u0, u1) = (r_min.ln(), r_max.ln());
    match spacing {
        Spacing::LogUniform => {
            let h = (u1 - u0) / (n - 1) as f64;
            (0..n)
                .map(|j| {
                    let r = (u0 + h * j as f64).exp();
                    let end = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                    (r, end * h * r)
                })
                .collect()
        }
        Spacing::Geometric => {
            let panels = n.div_ceil(8);
            let hp = (u1 - u0) / panels as f64;
            let mut out = Vec::with_capacity(8 * panels);
            for p in 0..panels {
                let mid = u0 + hp * (p as f64 + 0.5);
                for i in (0..4).rev() {
                    let u = mid - 0.5 * hp * GL8_X[i];
                    out.push((u.exp(), 0.5 * hp * GL8_W[i] * u.exp()));
                }
                for i in 0..4 {
                    let u = mid + 0.5 * hp * GL8_X[i];
                    out.push((u.exp(), 0.5 * hp * GL8_W[i] * u.exp()));
                }
            }
            out
        }
    }
}

/// Nodes on both rays, ordered by ascending `|s|`, each radius contributing the
/// upper node followed by its conjugate.
pub(crate) fn nodes_from_radial(gamma: f64, radial: &[(f64, f64)]) -> Vec<ContourNode> {
    let e = Complex64::from_polar(1.0, gamma);
    let scale = e / Complex64::new(0.0, 2.0 * PI);
    let mut out = Vec::with_capacity(2 * radial.len());
    for &(r, dr) in radial {
        let w = scale * dr;
        out.push(ContourNode { s: e * r, w });
        out.push(ContourNode { s: e.conj() * r, w: w.conj() });
    }
    out
}

/// Points `s` with `|arg s| < pi` and `s^{alpha-1} = mu_k` for some eigenvalue:
/// the poles of `(s^{alpha-1} I - A)^{-1}` on the principal sheet.
pub fn resolvent_poles(op: &SpectralOperator, alpha: f64) -> Vec<Complex64> {
    let mut out = Vec::new();
    if alpha == 1.0 {
        return out;
    }
    let e = alpha - 1.0;
    for mu in op.eigenvalues() {
        let (lr, th) = (mu.norm().ln(), mu.arg());
        // arg s = (th + 2 pi m) / e must lie in (-pi, pi)
        let lim = PI * e.abs();
        let m_lo = ((-lim - th) / (2.0 * PI)).floor() as i64 - 1;
        let m_hi = ((lim - th) / (2.0 * PI)).ceil() as i64 + 1;
        for m in m_lo..=m_hi {
            let ang = (th + 2.0 * PI * m as f64) / e;
            if ang.abs() < PI {
                out.push(Complex64::from_polar((lr / e).exp(), ang));
            }
        }
    }
    out
}

fn distance_to_rays(p: Complex64, gamma: f64) -> f64 {
    let a = p.arg();
    let r = p.norm();
    [gamma, -gamma]
        .iter()
        .map(|g| {
            let d = (a - g).abs();
            if d <= FRAC_PI_2 {
                r * d.sin()
            } else {
                r
            }
        })
        .fold(f64::INFINITY, f64::min)
}

const POLE_CLEARANCE: f64 = 1.0e-6;
const ROTATION: f64 = 0.05;

/// Contour angle actually used: `gamma` itself, or `gamma` rotated by up to
/// `+-0.05` rad when a pole of the integrand sits on one of the rays.
pub fn admissible_angle(op: &SpectralOperator, params: &ABSymbolParams, gamma: f64) -> Result<f64> {
    let mut poles = resolvent_poles(op, params.alpha);
    poles.extend(params.symbol_poles());
    let clear = |g: f64| poles.iter().all(|p| distance_to_rays(*p, g) > POLE_CLEARANCE * p.norm().max(1e-300));
    let lo = FRAC_PI_2.max(op.theta());
    for g in [gamma, gamma + ROTATION, gamma - ROTATION, gamma + 0.5 * ROTATION, gamma - 0.5 * ROTATION] {
        if g > lo && g < PI && clear(g) {
            return Ok(g);
        }
    }
    let p = poles
        .iter()
        .copied()
        .min_by(|a, b| distance_to_rays(*a, gamma).total_cmp(&distance_to_rays(*b, gamma)))
        .unwrap_or_default();
    Err(Error::SymbolPole { s: p, distance: distance_to_rays(p, gamma) })
}

/// Quadrature nodes for `spec` taken literally (no `t` scaling), after the
/// pole-avoidance check.
pub fn build_contour(op: &SpectralOperator, params: &ABSymbolParams, spec: &ContourSpec) -> Result<Vec<ContourNode>> {
    spec.validate(op)?;
    params.validate()?;
    let gamma = admissible_angle(op, params, spec.gamma)?;
    let radial = radial_rule(spec.r_min, spec.r_max, spec.n_nodes, spec.spacing);
    Ok(nodes_from_radial(gamma, &radial))
}
