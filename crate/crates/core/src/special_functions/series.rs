use num_complex::Complex64;

use super::gamma::rgamma;

const MAX_TERMS: usize = 2000;

/// Taylor summation of `sum z^k / Gamma(alpha k + beta)`, compensated.
/// Intended for `|z|` of order one.
pub(crate) fn ml_series(alpha: f64, beta: f64, z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut pw = Complex64::new(1.0, 0.0);
    let peak = z.norm().powf(1.0 / alpha);
    let mut quiet = 0;
    for k in 0..MAX_TERMS {
        let term = pw * rgamma(alpha * k as f64 + beta);
        // Kahan-Babuska summation, componentwise
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if alpha * k as f64 + beta > peak + 1.0 && term.norm() <= 1.0e-18 * sum.norm() {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        pw *= z;
    }
    sum
}
