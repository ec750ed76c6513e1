//! Diagonal sectorial operators, their resolvents and fractional powers, and
//! the sine basis of the Dirichlet Laplacian on `(0, pi)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_breakpoints, QuadOptions};

/// Function space attached to the eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Basis {
    AbstractDiagonal,
    /// `sin(k x)`, `k = 1..=modes`, on `(0, length)`; `length` is always pi.
    DirichletSine {
        length: f64,
        modes: usize,
    },
}

mod pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// A diagonal operator `A = diag(mu_k)` with `Re mu_k <= -omega` and
/// `mu_k + omega` inside the sector `|arg(-z)| <= theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralOperator {
    #[serde(with = "pairs")]
    eigenvalues: Vec<Complex64>,
    omega: f64,
    theta: f64,
    basis: Basis,
}

const SECTOR_SLACK: f64 = 1.0e-12;

impl SpectralOperator {
    pub fn new(eigenvalues: Vec<Complex64>, omega: f64, theta: f64, basis: Basis) -> Result<Self> {
        let op = SpectralOperator { eigenvalues, omega, theta, basis };
        op.validated()
    }

    /// Checks the invariants, also on deserialized values, and canonicalizes
    /// `-0.0` imaginary parts so that principal powers of negative reals are
    /// taken from above the cut.
    pub fn validated(mut self) -> Result<Self> {
        if self.eigenvalues.is_empty() {
            return Err(Error::invalid("operator needs at least one eigenvalue"));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::invalid(format!("omega = {} must be positive", self.omega)));
        }
        if !(self.theta > 0.0 && self.theta < FRAC_PI_2) {
            return Err(Error::invalid(format!("theta = {} must lie in (0, pi/2)", self.theta)));
        }
        for mu in &mut self.eigenvalues {
            if !mu.re.is_finite() || !mu.im.is_finite() {
                return Err(Error::NonFinite);
            }
            if mu.im == 0.0 {
                mu.im = 0.0;
            }
            if mu.re == 0.0 && mu.im == 0.0 {
                return Err(Error::invalid("0 must not be an eigenvalue"));
            }
            if mu.re > -self.omega * (1.0 - SECTOR_SLACK) {
                return Err(Error::invalid(format!("eigenvalue {mu} violates Re mu <= -omega = {}", -self.omega)));
            }
            let shifted = -(*mu + self.omega);
            if shifted.norm() > SECTOR_SLACK * self.omega && shifted.arg().abs() > self.theta + SECTOR_SLACK {
                return Err(Error::invalid(format!("eigenvalue {mu} lies outside the sector of angle {}", self.theta)));
            }
        }
        if let Basis::DirichletSine { length, modes } = self.basis {
            if length != PI {
                return Err(Error::invalid("the sine basis is fixed to (0, pi)"));
            }
            if modes != self.eigenvalues.len() {
                return Err(Error::invalid("mode count does not match the number of eigenvalues"));
            }
            for (k, mu) in self.eigenvalues.iter().enumerate() {
                let want = -(((k + 1) * (k + 1)) as f64);
                if *mu != Complex64::new(want, 0.0) {
                    return Err(Error::invalid(format!("sine mode {} must have eigenvalue {want}", k + 1)));
                }
            }
        }
        Ok(self)
    }

    /// Diagonal operator without an attached function space.
    pub fn diagonal(eigenvalues: Vec<Complex64>, omega: f64, theta: f64) -> Result<Self> {
        Self::new(eigenvalues, omega, theta, Basis::AbstractDiagonal)
    }

    /// Diagonal operator with real negative spectrum; `omega = min |mu_k|`.
    pub fn real_diagonal(eigenvalues: &[f64]) -> Result<Self> {
        let omega = eigenvalues.iter().map(|m| -m).fold(f64::INFINITY, f64::min);
        Self::diagonal(eigenvalues.iter().map(|&m| Complex64::new(m, 0.0)).collect(), omega, FRAC_PI_4)
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_real_negative(&self) -> bool {
        self.eigenvalues.iter().all(|m| m.im == 0.0 && m.re < 0.0)
    }

    /// Norm of a coefficient vector: the `L^2(0, pi)` norm of the synthesized
    /// field for the sine basis, the Euclidean norm otherwise.
    pub fn norm(&self, v: &StateVector) -> f64 {
        let l2 = v.l2();
        match self.basis {
            Basis::DirichletSine { .. } => (PI / 2.0).sqrt() * l2,
            Basis::AbstractDiagonal => l2,
        }
    }

    pub fn check_state(&self, v: &StateVector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::invalid(format!("state has {} coefficients, operator has {}", v.len(), self.dim())));
        }
        if v.0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("operator serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let op: SpectralOperator =
            serde_json::from_str(s).map_err(|e| Error::invalid(format!("operator JSON: {e}")))?;
        op.validated()
    }
}

/// Coefficients in the eigenbasis of a [`SpectralOperator`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector(#[serde(with = "pairs")] pub Vec<Complex64>);

impl StateVector {
    pub fn from_real(values: &[f64]) -> Self {
        StateVector(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `k`-th unit vector (0-based) of length `n`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        StateVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l2(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.0
    }
}

/// `(zI - A)^{-1} v`.
pub fn resolvent_apply(op: &SpectralOperator, z: Complex64, v: &StateVector) -> Result<StateVector> {
    op.check_state(v)?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut out = Vec::with_capacity(v.len());
    for (mu, c) in op.eigenvalues.iter().zip(&v.0) {
        let d = z - mu;
        if d.norm() <= 1.0e-14 * (1.0 + z.norm()) {
            return Err(Error::SpectralCollision { z, eigenvalue: *mu });
        }
        out.push(c / d);
    }
    Ok(StateVector(out))
}

/// `||(zI - A)^{-1}|| = max_k 1/|z - mu_k|` for a diagonal operator.
pub fn resolvent_norm(op: &SpectralOperator, z: Complex64) -> Result<f64> {
    op.eigenvalues
        .iter()
        .map(|mu| {
            let d = (z - mu).norm();
            if d <= 1.0e-14 * (1.0 + z.norm()) {
                Err(Error::SpectralCollision { z, eigenvalue: *mu })
            } else {
                Ok(1.0 / d)
            }
        })
        .try_fold(0.0f64, |m, r| r.map(|x| m.max(x)))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    Ok(())
}

/// `b^gamma` for `b > 0` from the Balakrishnan integral
/// `(sin(pi gamma)/pi) int_0^inf lambda^{gamma-1} b / (lambda + b) dlambda`.
///
/// The integral is split at `lambda = b`; on both halves a power substitution
/// removes the endpoint singularity before quadrature.
pub fn balakrishnan_power(b: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::invalid("Balakrishnan integral needs a positive argument"));
    }
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 200 };
    // lambda = b y^{1/gamma} on [0, b]
    let lower = integrate(|y| Complex64::new(1.0 / (gamma * (1.0 + y.powf(1.0 / gamma))), 0.0), 0.0, 1.0, opts)?;
    // lambda = b / x, x = y^{1/(1-gamma)} on [b, inf)
    let g1 = 1.0 - gamma;
    let upper = integrate(|y| Complex64::new(1.0 / (g1 * (1.0 + y.powf(1.0 / g1))), 0.0), 0.0, 1.0, opts)?;
    Ok(b.powf(gamma) * (PI * gamma).sin() / PI * (lower.value.re + upper.value.re))
}

/// Per-mode factors `mu_k^gamma` (principal branch). On real negative spectra
/// the moduli are cross-checked against [`balakrishnan_power`] applied to `-mu_k`.
pub fn frac_power_factors(op: &SpectralOperator, gamma: f64) -> Result<Vec<Complex64>> {
    check_gamma(gamma)?;
    let factors: Vec<Complex64> = op.eigenvalues.iter().map(|mu| mu.powf(gamma)).collect();
    if op.is_real_negative() {
        for (mu, f) in op.eigenvalues.iter().zip(&factors) {
            let b = balakrishnan_power(-mu.re, gamma)?;
            if ((f.norm() - b) / b).abs() > 1.0e-8 {
                return Err(Error::no_convergence(
                    "fractional power",
                    format!("|mu^gamma| = {} but the Balakrishnan integral gives {b} at mu = {mu}", f.norm()),
                ));
            }
        }
    }
    Ok(factors)
}

/// `A^gamma v` with principal powers `mu_k^gamma`; for `mu_k < 0` the factor is
/// `|mu_k|^gamma e^{i pi gamma}`.
pub fn frac_power_apply(op: &SpectralOperator, gamma: f64, v: &StateVector) -> Result<StateVector> {
    op.check_state(v)?;
    let f = frac_power_factors(op, gamma)?;
    Ok(StateVector(v.0.iter().zip(&f).map(|(c, m)| c * m).collect()))
}

/// `-Delta` with Dirichlet conditions on `(0, pi)`, truncated to `K` sine modes:
/// eigenvalues `-k^2`, `omega = 1`, `theta = pi/4`.
pub fn dirichlet_laplacian(k: usize) -> Result<SpectralOperator> {
    if k < 1 {
        return Err(Error::invalid("need at least one mode"));
    }
    let eig = (1..=k).map(|j| Complex64::new(-((j * j) as f64), 0.0)).collect();
    SpectralOperator::new(eig, 1.0, FRAC_PI_4, Basis::DirichletSine { length: PI, modes: k })
}

/// Initial data for the sine basis.
pub enum InitialDatum<'a> {
    /// Finite sums of sines such as `"sin x"`, `"sin x + sin 2x"` or `"0.5 sin(3x) - 2*sin 4x"`.
    Named(&'a str),
    /// Any function on `[0, pi]`, projected by quadrature.
    Function(&'a dyn Fn(f64) -> f64),
}

/// Parses a finite sine sum into `(mode, coefficient)` pairs.
pub fn parse_sine_sum(text: &str) -> Result<Vec<(usize, f64)>> {
    let bad = || Error::invalid(format!("cannot parse initial datum {text:?}"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')' && *c != '*').collect();
    if compact.is_empty() {
        return Err(bad());
    }
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = compact.as_bytes();
    for i in 1..=bytes.len() {
        let split =
            i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'+' | b'-'));
        if split {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    let mut out = Vec::new();
    for term in terms {
        let (sign, body) = match term.as_bytes()[0] {
            b'+' => (1.0, &term[1..]),
            b'-' => (-1.0, &term[1..]),
            _ => (1.0, term),
        };
        let pos = body.find("sin").ok_or_else(bad)?;
        let coef = if pos == 0 { 1.0 } else { body[..pos].parse::<f64>().map_err(|_| bad())? };
        let rest = body[pos + 3..].strip_suffix('x').ok_or_else(bad)?;
        let mode = if rest.is_empty() { 1 } else { rest.parse::<usize>().map_err(|_| bad())? };
        if mode == 0 {
            return Err(bad());
        }
        out.push((mode, sign * coef));
    }
    Ok(out)
}

/// Sine coefficients `(2/pi) int_0^pi u0(x) sin(kx) dx`, `k = 1..=K`.
pub fn project_initial_datum(op: &SpectralOperator, datum: InitialDatum<'_>) -> Result<StateVector> {
    let modes = match op.basis {
        Basis::DirichletSine { modes, .. } => modes,
        Basis::AbstractDiagonal => return Err(Error::BasisMismatch("projecting a function")),
    };
    let mut coef = vec![0.0; modes];
    match datum {
        InitialDatum::Named(text) => {
            for (k, a) in parse_sine_sum(text)? {
                if k <= modes {
                    coef[k - 1] += a;
                }
            }
        }
        InitialDatum::Function(f) => {
            let pieces = 4 * modes;
            let points: Vec<f64> = (0..=pieces).map(|i| PI * i as f64 / pieces as f64).collect();
            let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 4000 };
            for (k, slot) in coef.iter_mut().enumerate() {
                let kk = (k + 1) as f64;
                let r = integrate_breakpoints(|x| Complex64::new(f(x) * (kk * x).sin(), 0.0), &points, opts)?;
                *slot = 2.0 / PI * r.value.re;
            }
        }
    }
    Ok(StateVector::from_real(&coef))
}

/// `sum_k Re(c_k) sin(k x)`; exactly zero at `x = 0` and `x = pi`.
pub fn evaluate_field(op: &SpectralOperator, v: &StateVector, x: f64) -> Result<f64> {
    if !matches!(op.basis, Basis::DirichletSine { .. }) {
        return Err(Error::BasisMismatch("field synthesis"));
    }
    op.check_state(v)?;
    if x == 0.0 || x == PI {
        return Ok(0.0);
    }
    Ok(v.0.iter().enumerate().map(|(k, c)| c.re * ((k + 1) as f64 * x).sin()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn resolvent_examples() {
        let op = SpectralOperator::real_diagonal(&[-1.0]).unwrap();
        let r = resolvent_apply(&op, c(1.0, 0.0), &StateVector::from_real(&[1.0])).unwrap();
        assert_eq!(r.0, vec![c(0.5, 0.0)]);

        let op = SpectralOperator::real_diagonal(&[-1.0, -4.0]).unwrap();
        let r = resolvent_apply(&op, c(0.0, 0.0), &StateVector::from_real(&[1.0, 1.0])).unwrap();
        assert_eq!(r.0, vec![c(1.0, 0.0), c(0.25, 0.0)]);

        let op = SpectralOperator::real_diagonal(&[-1.0, -4.0, -9.0]).unwrap();
        let r = resolvent_apply(&op, c(0.0, 2.0), &StateVector::unit(3, 1)).unwrap();
        assert_eq!(r.0[0], c(0.0, 0.0));
        assert!((r.0[1] - 1.0 / c(4.0, 2.0)).norm() < 1e-16);
        assert_eq!(r.0[2], c(0.0, 0.0));

        assert!(matches!(
            resolvent_apply(&op, c(-4.0, 0.0), &StateVector::unit(3, 0)),
            Err(Error::SpectralCollision { .. })
        ));
    }

    #[test]
    fn invariants_enforced() {
        assert!(SpectralOperator::diagonal(vec![c(-0.5, 0.0)], 1.0, 0.5).is_err());
        assert!(SpectralOperator::diagonal(vec![c(-2.0, 5.0)], 1.0, 0.5).is_err());
        assert!(SpectralOperator::diagonal(vec![c(-2.0, 0.5)], 1.0, 0.5).is_ok());
        assert!(SpectralOperator::diagonal(vec![c(-2.0, 0.0)], 1.0, 1.7).is_err());
        assert!(SpectralOperator::diagonal(vec![], 1.0, 0.5).is_err());
        let op = SpectralOperator::diagonal(vec![c(-3.0, -0.0)], 1.0, 0.5).unwrap();
        assert!(op.eigenvalues()[0].im.is_sign_positive());
    }

    #[test]
    fn fractional_power_examples() {
        let v = StateVector::from_real(&[1.0]);
        for &(mu, g, m) in &[(-4.0, 0.5, 2.0), (-1.0, 0.3, 1.0), (-9.0, 0.5, 3.0)] {
            let op = SpectralOperator::real_diagonal(&[mu]).unwrap();
            let r = frac_power_apply(&op, g, &v).unwrap();
            assert!((r.0[0].norm() - m).abs() < 1e-14);
            assert!((r.0[0].arg() - PI * g).abs() < 1e-14);
        }
        assert!((balakrishnan_power(9.0, 0.5).unwrap() - 3.0).abs() < 1e-10);
        let op = SpectralOperator::real_diagonal(&[-1.0]).unwrap();
        assert!(frac_power_apply(&op, 1.0, &v).is_err());
        assert!(frac_power_apply(&op, 0.0, &v).is_err());
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(dirichlet_laplacian(1).unwrap().eigenvalues(), &[c(-1.0, 0.0)]);
        assert_eq!(dirichlet_laplacian(2).unwrap().eigenvalues(), &[c(-1.0, 0.0), c(-4.0, 0.0)]);
        let op = dirichlet_laplacian(20).unwrap();
        assert_eq!(op.eigenvalues()[19], c(-400.0, 0.0));
        assert!(dirichlet_laplacian(0).is_err());
    }

    #[test]
    fn named_data() {
        let op = dirichlet_laplacian(2).unwrap();
        let p = |s| project_initial_datum(&op, InitialDatum::Named(s)).unwrap();
        assert_eq!(p("sin x"), StateVector::from_real(&[1.0, 0.0]));
        assert_eq!(p("sin x + sin 2x"), StateVector::from_real(&[1.0, 1.0]));
        assert_eq!(p("sin 3x"), StateVector::from_real(&[0.0, 0.0]));
        assert_eq!(p("0.5*sin(2x) - 2 sin x"), StateVector::from_real(&[-2.0, 0.5]));
        assert!(project_initial_datum(&op, InitialDatum::Named("cos x")).is_err());
        assert!(project_initial_datum(&op, InitialDatum::Named("sin 0x")).is_err());
        let abs = SpectralOperator::real_diagonal(&[-1.0]).unwrap();
        assert!(matches!(project_initial_datum(&abs, InitialDatum::Named("sin x")), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn function_projection() {
        let op = dirichlet_laplacian(4).unwrap();
        let f = |x: f64| x.sin() - 0.25 * (3.0 * x).sin();
        let v = project_initial_datum(&op, InitialDatum::Function(&f)).unwrap();
        let want = [1.0, 0.0, -0.25, 0.0];
        for (a, b) in v.0.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let op = dirichlet_laplacian(3).unwrap();
        let text = op.to_json();
        assert!(text.contains("dirichlet-sine"));
        assert_eq!(SpectralOperator::from_json(&text).unwrap(), op);
        let bad =
            r#"{"eigenvalues": [[0.5, 0.0]], "omega": 1.0, "theta": 0.5, "basis": {"kind": "abstract-diagonal"}}"#;
        assert!(SpectralOperator::from_json(bad).is_err());
    }
}
