use num_complex::Complex64;
use std::f64::consts::PI;

use super::gamma::{ln_gamma_abs, rgamma};

const MAX_TERMS: usize = 400;
const REL_TOL: f64 = 1.0e-17;
// poles closer than this (in argument) to the branch cut are not summed
const CUT_MARGIN: f64 = 1.0e-6;

/// Large-|z| expansion
/// `E(z) = sum_j s_j^{1-beta} e^{s_j} / alpha - sum_{n>=1} z^{-n} / Gamma(beta - alpha n)`
/// with `s_j` the principal-sheet poles of `s^{alpha-beta}/(s^alpha - z)`.
///
/// Returns `None` when the algebraic tail cannot be truncated below the
/// target relative accuracy, or a pole sits on the branch cut with a
/// non-negligible residue; the caller then falls back to the contour.
pub(crate) fn ml_asymptotic(alpha: f64, beta: f64, z: Complex64) -> Option<Complex64> {
    let theta = z.arg();
    let r = z.norm();
    let rad = r.powf(1.0 / alpha);

    let mut exp_part = Complex64::new(0.0, 0.0);
    let mut on_cut = Complex64::new(0.0, 0.0);
    let kmin = (-alpha / 2.0 - theta / (2.0 * PI)).ceil() as i64 - 1;
    let kmax = (alpha / 2.0 - theta / (2.0 * PI)).floor() as i64 + 1;
    for k in kmin..=kmax {
        let ang = (theta + 2.0 * PI * k as f64) / alpha;
        if ang.abs() > PI + CUT_MARGIN {
            continue;
        }
        let s = Complex64::from_polar(rad, ang);
        let res = s.powf(1.0 - beta) * s.exp() / alpha;
        if (ang.abs() - PI).abs() <= CUT_MARGIN {
            on_cut += res;
        } else {
            exp_part += res;
        }
    }

    let zinv = 1.0 / z;
    let mut pw = Complex64::new(1.0, 0.0);
    let mut alg = Complex64::new(0.0, 0.0);
    let mut converged = false;
    let mut last_env = f64::INFINITY;
    for n in 1..=MAX_TERMS {
        pw *= zinv;
        let arg = beta - alpha * n as f64;
        alg -= pw * rgamma(arg);
        // |1/Gamma(arg)| <= Gamma(1 - arg) / pi by reflection; use that envelope
        let env = if 1.0 - arg > 0.0 {
            (ln_gamma_abs(1.0 - arg) - n as f64 * r.ln()).exp() / PI
        } else {
            pw.norm() * rgamma(arg).abs()
        };
        let total = (exp_part + alg).norm();
        if env <= REL_TOL * total && 1.0 - arg > 0.0 {
            converged = true;
            break;
        }
        if env > last_env && 1.0 - arg > 1.0 {
            // past the smallest term of the divergent tail
            break;
        }
        last_env = env;
    }
    let value = exp_part + alg;
    if !converged && value.norm() > 0.0 {
        return None;
    }
    if on_cut.norm() > REL_TOL * value.norm() {
        return None;
    }
    Some(value)
}
