//! Inverse-Laplace evaluation of `E_{alpha,beta}(z)`.
//!
//! `E_{alpha,beta}(z)` is the inverse Laplace transform of
//! `s^{alpha-beta} / (s^alpha - z)` at `t = 1`. The Bromwich line is deformed
//! onto a parabola `s(u) = mu (1 + i u)^2` that keeps the branch cut on the
//! negative axis to its left; poles `s_j = |z|^{1/alpha} e^{i(arg z + 2 pi j)/alpha}`
//! on the principal sheet that end up to the right of the parabola enter
//! through their residues `s_j^{1-beta} e^{s_j} / alpha`. The parabola and the
//! trapezoidal step are chosen per region between consecutive singularities
//! by balancing discretisation against truncation and round-off (optimal
//! parabolic contour of Garrappa, SIAM J. Numer. Anal. 53 (2015)); the
//! region needing the fewest nodes wins.

use num_complex::Complex64;
use std::f64::consts::PI;

const LOG_MACH_EPS: f64 = -36.043_653_389_117_154;
const MAX_NODES: f64 = 200.0;

struct Params {
    mu: f64,
    h: f64,
    n: f64,
}

/// `E_{alpha,beta}(z)` with target absolute accuracy `exp(log_eps)` relative
/// to the scale of the integrand.
pub(crate) fn ml_inverse_laplace(alpha: f64, beta: f64, z: Complex64, log_eps: f64) -> Complex64 {
    let t = 1.0;
    let theta = z.arg();
    let kmin = (-alpha / 2.0 - theta / (2.0 * PI)).ceil() as i64;
    let kmax = (alpha / 2.0 - theta / (2.0 * PI)).floor() as i64;
    let rad = z.norm().powf(1.0 / alpha);

    let mut poles: Vec<(f64, Complex64)> = (kmin..=kmax)
        .map(|k| {
            let s = Complex64::from_polar(rad, (theta + 2.0 * PI * k as f64) / alpha);
            ((s.re + s.norm()) / 2.0, s)
        })
        .filter(|(phi, _)| *phi > 1.0e-15)
        .collect();
    poles.sort_by(|a, b| a.0.total_cmp(&b.0));

    // singularities: origin first, then poles by increasing Re sqrt(s)^2
    let mut s_star = vec![Complex64::new(0.0, 0.0)];
    let mut phi = vec![0.0];
    for (p, s) in &poles {
        s_star.push(*s);
        phi.push(*p);
    }
    let j1 = s_star.len();
    phi.push(f64::INFINITY);

    let mut p = vec![(-2.0 * (alpha - beta + 1.0)).max(0.0)];
    p.extend(std::iter::repeat_n(1.0, j1 - 1));
    let mut q = vec![1.0; j1 - 1];
    q.push(f64::INFINITY);

    let mut log_eps = log_eps;
    let admissible: Vec<usize> =
        (0..j1).filter(|&j| phi[j] < (log_eps - LOG_MACH_EPS) / t && phi[j] < phi[j + 1]).collect();

    let mut best: Option<(usize, Params)> = None;
    for _ in 0..8 {
        best = None;
        for &j in &admissible {
            let par = if j + 1 < j1 {
                optimal_param_rb(t, phi[j], phi[j + 1], p[j], q[j], log_eps)
            } else {
                optimal_param_ru(t, phi[j], p[j], log_eps)
            };
            if let Some(par) = par {
                let better = match &best {
                    None => true,
                    Some((_, b)) => par.n < b.n,
                };
                if better {
                    best = Some((j, par));
                }
            }
        }
        match &best {
            Some((_, b)) if b.n <= MAX_NODES => break,
            _ => log_eps += std::f64::consts::LN_10,
        }
    }
    let (region, par) = best.expect("the unbounded region is always admissible");

    let n = par.n as i64;
    let mut integral = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    for k in -n..=n {
        let u = par.h * k as f64;
        let s = par.mu * (i * u + 1.0).powi(2);
        let ds = Complex64::new(-2.0 * par.mu * u, 2.0 * par.mu);
        let f = s.powf(alpha - beta) / (s.powf(alpha) - z);
        integral += (s * t).exp() * f * ds;
    }
    integral *= par.h / (2.0 * PI * i);

    let residues: Complex64 = s_star[region + 1..].iter().map(|s| s.powf(1.0 - beta) * (s * t).exp() / alpha).sum();
    integral + residues
}

fn optimal_param_rb(t: f64, phi_j: f64, phi_j1: f64, pj: f64, qj: f64, log_eps: f64) -> Option<Params> {
    let fac = 1.01;
    let f_max = (log_eps - LOG_MACH_EPS).exp();
    let sq_phi_j = phi_j.sqrt();
    let threshold = 2.0 * ((log_eps - LOG_MACH_EPS) / t).sqrt();
    let sq_phi_j1 = phi_j1.sqrt().min(threshold - sq_phi_j);

    let (sq_bar_j, sq_bar_j1, f_bar);
    if pj < 1.0e-14 && qj < 1.0e-14 {
        sq_bar_j = sq_phi_j;
        sq_bar_j1 = sq_phi_j1;
        f_bar = 1.0;
    } else if pj < 1.0e-14 {
        sq_bar_j = sq_phi_j;
        let f_min = if sq_phi_j > 0.0 { fac * (sq_phi_j / (sq_phi_j1 - sq_phi_j)).powf(qj) } else { fac };
        if f_min >= f_max {
            return None;
        }
        f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fq = f_bar.powf(-1.0 / qj);
        sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
    } else if qj < 1.0e-14 {
        sq_bar_j1 = sq_phi_j1;
        let f_min = fac * (sq_phi_j1 / (sq_phi_j1 - sq_phi_j)).powf(pj);
        if f_min >= f_max {
            return None;
        }
        f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-1.0 / pj);
        sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
    } else {
        let mut f_min = fac * (sq_phi_j + sq_phi_j1) / (sq_phi_j1 - sq_phi_j).powf(pj.max(qj));
        if f_min >= f_max {
            return None;
        }
        f_min = f_min.max(1.5);
        f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-1.0 / pj);
        let fq = f_bar.powf(-1.0 / qj);
        let w = -phi_j1 * t / log_eps;
        let den = 2.0 + w - (1.0 + w) * fp + fq;
        sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
        sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
    }
    if !(sq_bar_j1 > sq_bar_j) {
        return None;
    }
    let log_eps = log_eps - f_bar.ln();
    let w = -sq_bar_j1 * sq_bar_j1 * t / log_eps;
    let mu = (((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w)).powi(2);
    let h = -2.0 * PI / log_eps * (sq_bar_j1 - sq_bar_j) / ((1.0 + w) * sq_bar_j + sq_bar_j1);
    let n = ((1.0 - log_eps / t / mu).sqrt() / h).ceil();
    (mu.is_finite() && h > 0.0 && n.is_finite()).then_some(Params { mu, h, n })
}

fn optimal_param_ru(t: f64, phi_j: f64, pj: f64, log_eps: f64) -> Option<Params> {
    let sq_phi_j = phi_j.sqrt();
    let mut phibar = if phi_j > 0.0 { phi_j * 1.01 } else { 0.01 };
    let mut sq_phibar = phibar.sqrt();
    let (f_min, f_max, f_tar): (f64, f64, f64) = (1.0, 10.0, 5.0);

    let mut n;
    let mut a;
    let mut sq_mu;
    let mut iter = 0;
    loop {
        let phi_t = phibar * t;
        let log_eps_phi_t = log_eps / phi_t;
        n = (phi_t / PI * (1.0 - 3.0 * log_eps_phi_t / 2.0 + (1.0 - 2.0 * log_eps_phi_t).sqrt())).ceil();
        a = PI * n / phi_t;
        sq_mu = sq_phibar * (4.0 - a).abs() / (7.0 - (1.0 + 12.0 * a).sqrt()).abs();
        let fbar = ((sq_phibar - sq_phi_j) / sq_mu).powf(-pj);
        let stop = pj < 1.0e-14 || (f_min < fbar && fbar < f_max);
        iter += 1;
        if stop || iter > 50 {
            break;
        }
        sq_phibar = f_tar.powf(-1.0 / pj) * sq_mu + sq_phi_j;
        phibar = sq_phibar * sq_phibar;
    }
    let mut mu = sq_mu * sq_mu;
    let mut h = (-3.0 * a - 2.0 + 2.0 * (1.0 + 12.0 * a).sqrt()) / (4.0 - a) / n;

    let threshold = (log_eps - LOG_MACH_EPS) / t;
    if mu > threshold {
        let q = if pj.abs() < 1.0e-14 { 0.0 } else { f_tar.powf(-1.0 / pj) * mu.sqrt() };
        let phibar = (q + phi_j.sqrt()).powi(2);
        if phibar < threshold {
            let w = (LOG_MACH_EPS / (LOG_MACH_EPS - log_eps)).sqrt();
            let u = (-phibar * t / LOG_MACH_EPS).sqrt();
            mu = threshold;
            n = (w * log_eps / 2.0 / PI / (u * w - 1.0)).ceil();
            h = (LOG_MACH_EPS / (LOG_MACH_EPS - log_eps)).sqrt() / n;
        } else {
            return None;
        }
    }
    (mu.is_finite() && h > 0.0 && n.is_finite() && n > 0.0).then_some(Params { mu, h, n })
}
