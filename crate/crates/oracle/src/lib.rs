//! Slow, extended-precision reference evaluations.
//!
//! Nothing in here shares code with `ab-resolvent`: the series oracle sums the
//! defining Taylor series in MPFR arithmetic, the Talbot oracle inverts the
//! Laplace transform of the Mittag-Leffler function on a fixed Talbot contour
//! at high precision, and [`talbot`] is a double-precision inverse Laplace
//! rule on a contour geometry unrelated to the sectorial rays used by the
//! library. These are meant to be used from tests only.

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("series did not converge within {0} terms")]
    SeriesBudget(usize),
    #[error("required working precision {0} bits exceeds the oracle limit")]
    PrecisionLimit(u32),
    #[error("argument outside the oracle's domain: {0}")]
    Domain(&'static str),
}

/// Maximum number of Taylor terms the series oracle will sum.
pub const SERIES_TERM_BUDGET: usize = 100_000;

const MAX_PREC: u32 = 1 << 16;

fn to_c64(z: &Complex) -> Complex64 {
    Complex64::new(z.real().to_f64(), z.imag().to_f64())
}

fn log2_abs(x: &Complex) -> f64 {
    let a = Float::with_val(64, x.abs_ref());
    if a.is_zero() {
        f64::NEG_INFINITY
    } else {
        a.log2().to_f64()
    }
}

/// `E_{alpha,beta}(z)` by direct summation of `sum z^k / Gamma(alpha k + beta)`.
///
/// The working precision is raised until the observed cancellation (the ratio
/// between the largest term and the sum) leaves at least `digits` significant
/// decimal digits. Terms whose Gamma argument is a nonpositive integer vanish.
pub fn ml_series(alpha: f64, beta: f64, z: Complex64, digits: u32) -> Result<Complex64, OracleError> {
    if !(alpha > 0.0) || !beta.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
        return Err(OracleError::Domain("alpha must be positive and inputs finite"));
    }
    let want_bits = (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 32;
    // start from the cancellation expected for arguments off the positive axis
    let expected = (z.norm().powf(1.0 / alpha) * std::f64::consts::LOG2_E) as u32;
    let mut prec = want_bits + 64 + expected.min(MAX_PREC / 2);
    loop {
        let (sum, max_log2) = series_sum(alpha, beta, z, digits, prec)?;
        let cancel = (max_log2 - log2_abs(&sum)).max(0.0);
        if cancel.is_finite() && (cancel as u32) + want_bits <= prec {
            return Ok(to_c64(&sum));
        }
        let needed = if cancel.is_finite() { cancel as u32 + want_bits + 64 } else { prec * 2 };
        prec = needed.max(prec + 64);
        if prec > MAX_PREC {
            return Err(OracleError::PrecisionLimit(prec));
        }
    }
}

fn series_sum(alpha: f64, beta: f64, z: Complex64, digits: u32, prec: u32) -> Result<(Complex, f64), OracleError> {
    let za = Complex::with_val(prec, (z.re, z.im));
    let a = Float::with_val(prec, alpha);
    let b = Float::with_val(prec, beta);
    let mut power = Complex::with_val(prec, (1, 0));
    let mut sum = Complex::with_val(prec, (0, 0));
    let mut max_log2 = f64::NEG_INFINITY;
    let stop_log2 = -(f64::from(digits) + 10.0) * std::f64::consts::LOG2_10;
    let mut small_run = 0;
    for k in 0..SERIES_TERM_BUDGET {
        let arg = Float::with_val(prec, &a * k as u32) + &b;
        let pole = arg <= 0 && arg.is_integer();
        if !pole {
            let g = arg.gamma();
            let term = Complex::with_val(prec, &power / &g);
            let tl = log2_abs(&term);
            max_log2 = max_log2.max(tl);
            sum += &term;
            let sl = log2_abs(&sum);
            // the series is past its peak once alpha*k + beta exceeds |z|^{1/alpha}
            let past_peak = alpha * k as f64 + beta > z.norm().powf(1.0 / alpha) + 1.0;
            if past_peak && (tl - sl < stop_log2 || tl == f64::NEG_INFINITY) {
                small_run += 1;
                if small_run >= 3 {
                    return Ok((sum, max_log2));
                }
            } else {
                small_run = 0;
            }
        }
        power *= &za;
        if za.real().is_zero() && za.imag().is_zero() && k > 0 {
            return Ok((sum, max_log2));
        }
    }
    Err(OracleError::SeriesBudget(SERIES_TERM_BUDGET))
}

/// `E_{alpha,beta}(z)` to `digits` significant digits: the series oracle under
/// the name used by the library's documentation.
pub fn ml_eval_oracle(alpha: f64, beta: f64, z: Complex64, digits: u32) -> Result<Complex64, OracleError> {
    ml_series(alpha, beta, z, digits)
}

/// Number of series terms (and an estimate of the working precision in bits)
/// the series oracle would need at `z`. Used by tests to decide which oracle
/// applies at a sample point.
pub fn series_cost(alpha: f64, beta: f64, x_abs: f64) -> (f64, f64) {
    // terms: alpha k + beta must exceed roughly e*|z|^{1/alpha}
    let peak = x_abs.powf(1.0 / alpha);
    let terms = ((std::f64::consts::E * peak + 60.0 - beta) / alpha).max(1.0);
    let bits = peak * std::f64::consts::LOG2_E;
    (terms, bits)
}

/// `E_{alpha,beta}(-x)` for `x >= 0` and `0 < alpha <= 1` by inverting
/// `s^{alpha-beta} / (s^alpha + x)` at `t = 1` on the fixed Talbot contour
/// `s(theta) = r theta (cot theta + i)`, `r = 2M/5`, in MPFR arithmetic.
pub fn ml_talbot_neg_real(alpha: f64, beta: f64, x: f64, digits: u32) -> Result<f64, OracleError> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(x >= 0.0) || !beta.is_finite() || !x.is_finite() {
        return Err(OracleError::Domain("requires 0 < alpha <= 1 and x >= 0"));
    }
    let m = (digits as usize * 19 / 10).max(40);
    let prec = (m as f64 * std::f64::consts::LOG2_10 * 1.2) as u32 + 64;
    let pi = Float::with_val(prec, Constant::Pi);
    let r = Float::with_val(prec, 2 * m as u32) / 5u32;
    let a = Float::with_val(prec, alpha);
    // alpha - beta formed in working precision from the binary inputs
    let mut ab = Float::with_val(prec, alpha);
    ab -= Float::with_val(prec, beta);
    let xx = Float::with_val(prec, x);
    let transform = |s: &Complex| -> Complex {
        let num = Complex::with_val(prec, s.pow(&ab));
        let den = Complex::with_val(prec, s.pow(&a)) + &xx;
        num / den
    };
    // theta = 0 term: s = r
    let s0 = Complex::with_val(prec, (&r, 0));
    let f0 = transform(&s0);
    let mut acc = Float::with_val(prec, f0.real()) * Float::with_val(prec, r.exp_ref()) / 2u32;
    for k in 1..m {
        let theta = Float::with_val(prec, &pi * k as u32) / m as u32;
        let cot = Float::with_val(prec, theta.tan_ref()).recip();
        let re = Float::with_val(prec, &r * &theta) * &cot;
        let im = Float::with_val(prec, &r * &theta);
        let s = Complex::with_val(prec, (&re, &im));
        let tc = Float::with_val(prec, &theta * &cot);
        let sigma = Float::with_val(prec, &theta + Float::with_val(prec, &tc - 1u32) * &cot);
        let one_i_sigma = Complex::with_val(prec, (1, &sigma));
        let val = Complex::with_val(prec, s.exp_ref()) * transform(&s) * one_i_sigma;
        acc += val.real();
    }
    let out = acc * r / m as u32;
    Ok(out.to_f64())
}

/// `s^{alpha-beta} / (s^alpha + c) / (s^{alpha-1} - mu)` in 256-bit arithmetic
/// with principal branches.
pub fn ab_resolvent_scalar_hp(alpha: f64, beta: f64, c: f64, mu: Complex64, s: Complex64) -> Complex64 {
    let prec = 256;
    let s = Complex::with_val(prec, (s.re, s.im));
    let mut ab = Float::with_val(prec, alpha);
    ab -= Float::with_val(prec, beta);
    let mut am1 = Float::with_val(prec, alpha);
    am1 -= 1u32;
    let num = Complex::with_val(prec, (&s).pow(&ab));
    let den1 = Complex::with_val(prec, (&s).pow(&Float::with_val(prec, alpha))) + Float::with_val(prec, c);
    let den2 = Complex::with_val(prec, (&s).pow(&am1)) - Complex::with_val(prec, (mu.re, mu.im));
    to_c64(&(num / den1 / den2))
}

/// Double-precision inverse Laplace transform on Weideman's optimised Talbot
/// contour `s(th) = (N/t)(0.5017 th cot(0.6407 th) - 0.6122 + 0.2645 i th)`,
/// `th` in `(-pi, pi)`, midpoint rule with `n` nodes. The transform must
/// satisfy `F(conj s) = conj F(s)` and be analytic to the right of the contour.
pub fn talbot<F>(transform: F, t: f64, n: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let scale = n as f64 / t;
    let mut acc = 0.0;
    // conjugate symmetry: sum the upper half and double the real part
    for k in 0..n / 2 {
        let th = -std::f64::consts::PI + (k as f64 + 0.5) * h;
        let th = -th; // upper half: th in (0, pi)
        let ct = 1.0 / (0.6407 * th).tan();
        let s = Complex64::new(0.5017 * th * ct - 0.6122, 0.2645 * th) * scale;
        let csc2 = 1.0 + ct * ct;
        let ds = Complex64::new(0.5017 * (ct - 0.6407 * th * csc2), 0.2645) * scale;
        acc += ((s * t).exp() * transform(s) * ds).im;
    }
    acc * h / std::f64::consts::PI
}
