/// `1 / Gamma(x)`, continued analytically: zero at the nonpositive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 171.0 {
        return (-libm::lgamma(x)).exp();
    }
    let g = libm::tgamma(x);
    if g.is_infinite() {
        0.0
    } else {
        1.0 / g
    }
}

/// `Gamma(x)` for real `x`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln |Gamma(x)|`.
pub fn ln_gamma_abs(x: f64) -> f64 {
    libm::lgamma_r(x).0
}
