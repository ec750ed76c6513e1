//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ab_oracle::{ml_eval_oracle, ml_talbot_neg_real, series_cost};
use ab_resolvent::ab_kernel::{laplace_check, ABSymbolParams};
use ab_resolvent::analysis::{
    check_ml_decay, check_ml_decay_slope, check_time_derivative, check_two_regime, check_weighted_stability,
    contour_independence_gap, derivative_fd_gap, laplace_round_trip_error, TWO_REGIME_ANGLE,
};
use ab_resolvent::experiments::*;
use ab_resolvent::operator_model::{dirichlet_laplacian, SpectralOperator, StateVector};
use ab_resolvent::resolvent_core::{ContourSpec, ResolventFamily};
use ab_resolvent::special_functions::{ml_eval, ml_eval_real, MLParams};
use ab_resolvent::Error;
use common::{loglog_slope, logspace};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

const ML_TOL: f64 = 1e-12;
const ML_BUDGET: Duration = Duration::from_secs(30);
const SYMBOL_TOL: f64 = 1e-6;
const SYMBOL_BUDGET: Duration = Duration::from_secs(60);
const TWO_REGIME_BUDGET: Duration = Duration::from_secs(10);
const ROUND_TRIP_TOL: f64 = 1e-5;
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(120);
const CONTOUR_TOL: f64 = 1e-7;
const SLOPE_TOL: f64 = 0.05;
const BOUND_TOL: f64 = 1e-6;
const DERIVATIVE_BAND: f64 = 0.1;
const FD_TOL: f64 = 1e-6;
const REFERENCE_TOL: f64 = 1e-12;
const SUITE_BUDGET: Duration = Duration::from_secs(300);

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Result<Outcome, Error>, Option<Duration>);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn reference_neg_real(alpha: f64, beta: f64, x: f64) -> f64 {
    let (terms, bits) = series_cost(alpha, beta, x.abs());
    if terms < 5_000.0 && bits < 600.0 {
        ml_eval_oracle(alpha, beta, Complex64::new(x, 0.0), 30).unwrap().re
    } else {
        ml_talbot_neg_real(alpha, beta, -x, 30).unwrap()
    }
}

fn family(op: SpectralOperator, alpha: f64, beta: f64) -> Result<ResolventFamily, Error> {
    ResolventFamily::new(op, ABSymbolParams::new(alpha, beta, 1.0)?, ContourSpec::default())
}

fn ml_engine() -> Result<Outcome, Error> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut engine = Duration::ZERO;
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let a = rng.gen_range(0.3..=1.0);
        let b = rng.gen_range(1.0..=2.0);
        let x = -rng.gen_range(0.0..=50.0);
        let start = Instant::now();
        let got = ml_eval_real(MLParams::new(a, b)?, x)?;
        engine += start.elapsed();
        worst = worst.max(rel(got, reference_neg_real(a, b, x)));
    }
    let e11 = MLParams::new(1.0, 1.0)?;
    let e12 = MLParams::new(1.0, 2.0)?;
    let e21 = MLParams::new(2.0, 1.0)?;
    let mut ident: f64 = 0.0;
    for i in 0..=100 {
        let x = -50.0 + 0.5 * i as f64;
        ident = ident.max(rel(ml_eval_real(e11, x)?, x.exp()));
        if x != 0.0 {
            ident = ident.max(rel(ml_eval_real(e12, x)?, x.exp_m1() / x));
        }
        // cos y = E_{2,1}(-y^2); absolute error where cos y is near a zero
        let y = 20f64.sqrt() * i as f64 / 100.0;
        ident = ident.max((ml_eval_real(e21, -y * y)? - y.cos()).abs() / y.cos().abs().max(1.0e-3));
    }
    for z in [Complex64::new(3.0, 4.0), Complex64::new(-10.0, 15.0), Complex64::new(0.5, -19.0)] {
        ident = ident.max(crel(ml_eval(e11, z)?, z.exp()));
        ident = ident.max(crel(ml_eval(e12, z)?, (z.exp() - 1.0) / z));
    }
    Ok((
        worst <= ML_TOL && ident <= ML_TOL && engine <= ML_BUDGET,
        format!("worst rel {worst:.2e}, identities {ident:.2e}, engine time {engine:.2?}"),
    ))
}

fn symbol() -> Result<Outcome, Error> {
    let mut worst: f64 = 0.0;
    for (a, b, c) in [(0.8, 1.2, 1.0), (0.5, 1.4, 2.0), (1.0, 1.0, 1.0)] {
        let p = ABSymbolParams::new(a, b, c)?;
        for s in [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 3.0)] {
            worst = worst.max(laplace_check(p, s, 500.0, 1e-9)?);
        }
    }
    Ok((worst <= SYMBOL_TOL, format!("worst rel gap {worst:.2e}")))
}

fn two_regime() -> Result<Outcome, Error> {
    let op = dirichlet_laplacian(20)?;
    let small = logspace(1e-4, 1e-1, 30);
    let large = logspace(1e1, 1e4, 30);
    let mut ok = true;
    let mut notes = Vec::new();
    for (a, b) in [(0.8, 1.2), (0.5, 1.4), (0.9, 1.6)] {
        let (s, l) = check_two_regime(&op, &ABSymbolParams::new(a, b, 1.0)?, TWO_REGIME_ANGLE, &small, &large)?;
        ok &= s.fit.is_power_law() && l.fit.is_power_law();
        ok &= (s.fit.slope - (1.0 - b)).abs() <= SLOPE_TOL && (l.fit.slope + b).abs() <= SLOPE_TOL;
        notes.push(format!("({a},{b}): {:+.4}/{:+.4} vs {:+.2}/{:+.2}", s.fit.slope, l.fit.slope, 1.0 - b, -b));
    }
    Ok((ok, notes.join("; ")))
}

fn gate() -> Result<Outcome, Error> {
    let mut ok = true;
    let mut notes = Vec::new();
    for a in [0.5, 0.8, 1.0] {
        for b in [1.0 + a, 1.0 + a + 0.2] {
            let refused = matches!(family(dirichlet_laplacian(20)?, a, b), Err(Error::IllPosed { .. }));
            ok &= refused;
            if !refused {
                notes.push(format!("({a},{b}) accepted"));
            }
        }
        let b = 1.0 + a - 0.05;
        if family(dirichlet_laplacian(20)?, a, b).is_err() {
            ok = false;
            notes.push(format!("({a},{b}) refused"));
        }
    }
    Ok((
        ok,
        if notes.is_empty() {
            "beta >= 1+alpha refused, beta = 1+alpha-0.05 accepted".into()
        } else {
            notes.join("; ")
        },
    ))
}

fn round_trip() -> Result<Outcome, Error> {
    let fam = family(dirichlet_laplacian(20)?, 0.8, 1.2)?;
    let e1 = StateVector::unit(20, 0);
    let mut worst: f64 = 0.0;
    for s in [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 1.0)] {
        worst = worst.max(laplace_round_trip_error(&fam, s, &e1)?);
    }
    Ok((worst <= ROUND_TRIP_TOL, format!("worst rel gap {worst:.2e}")))
}

fn contour() -> Result<Outcome, Error> {
    let fam = family(SpectralOperator::real_diagonal(&[-1.0])?, 0.8, 1.2)?;
    let gap = contour_independence_gap(&fam, 2.0 * PI / 3.0, &[0.1, 1.0, 10.0])?;
    Ok((gap <= CONTOUR_TOL, format!("rel gap {gap:.2e}")))
}

fn ml_decay() -> Result<Outcome, Error> {
    let fam = family(dirichlet_laplacian(1)?, 0.8, 1.2)?;
    let slope = check_ml_decay_slope(&fam, &logspace(1e2, 1e4, 30))?;
    let bound = check_ml_decay(&fam, &logspace(1e-3, 1e4, 141))?;
    let ok = (slope.fit.slope + 0.8).abs() <= SLOPE_TOL
        && slope.status.passed()
        && bound.max_violation_ratio <= 1.0 + BOUND_TOL;
    Ok((
        ok,
        format!(
            "slope {:+.4} (r2 {:.4}); C {:.4}, c1 {:.3}, violation {:.4}",
            slope.fit.slope, slope.fit.r_squared, bound.fitted_constant, bound.c1, bound.max_violation_ratio
        ),
    ))
}

fn weighted() -> Result<Outcome, Error> {
    let small = logspace(1e-4, 1e-1, 30);
    let mut ok = true;
    let mut notes = Vec::new();
    for (a, g) in [(0.8, 0.5), (0.5, 0.8)] {
        let c = check_weighted_stability(&family(dirichlet_laplacian(20)?, a, 1.2)?, g, &small)?;
        ok &= c.status.passed();
        notes.push(format!("({a},{g}): {:+.4} vs {:+.2} [{}]", c.fit.slope, -a * g, c.status.as_str()));
    }
    Ok((ok, notes.join("; ")))
}

fn derivative() -> Result<Outcome, Error> {
    let fam = family(dirichlet_laplacian(20)?, 0.8, 1.2)?;
    let d = check_time_derivative(&fam, &logspace(1e-4, 1e-1, 30), 0.1)?;
    let (lo, hi) = (0.8 - 1.0 - DERIVATIVE_BAND, 0.8 - 1.0 + DERIVATIVE_BAND);
    let slope_ok = d.fit.is_power_law() && (lo..=hi).contains(&d.fit.slope);
    let fd = derivative_fd_gap(&fam, 1.0)?;
    Ok((
        slope_ok && fd <= FD_TOL,
        format!("slope {:+.4} (r2 {:.4}) vs [{lo:+.2}, {hi:+.2}]; fd gap {fd:.2e}", d.fit.slope, d.fit.r_squared),
    ))
}

fn examples() -> Result<Outcome, Error> {
    let base = |kind| ExperimentConfig { experiment: kind, ..Default::default() };
    let mut notes = Vec::new();

    let rows = run_fundamental_mode(&base(ExperimentKind::FundamentalMode))?;
    let scale = (PI / 2.0).sqrt();
    let mut worst: f64 = 0.0;
    for r in &rows {
        worst = worst.max(rel(r.ml_reference, scale * ml_talbot_neg_real(0.8, 1.2, r.t.powf(0.8), 30).unwrap()));
    }
    let g = TGrid { t_min: 1e2, t_max: 1e4, n_points: 30, spacing: GridSpacing::Log };
    let tail = run_fundamental_mode(&ExperimentConfig { t_grid: Some(g), ..base(ExperimentKind::FundamentalMode) })?;
    let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let sm = loglog_slope(&ts, &tail.iter().map(|r| r.ml_reference).collect::<Vec<_>>());
    let sc = loglog_slope(&ts, &tail.iter().map(|r| r.contour_value).collect::<Vec<_>>());
    let ex1 = worst <= REFERENCE_TOL && (sc - sm).abs() <= SLOPE_TOL && (sc + 0.8).abs() <= SLOPE_TOL;
    notes.push(format!("ex1 ref {worst:.1e}, slopes {sm:+.4}/{sc:+.4}"));

    let mm = run_multi_mode(&base(ExperimentKind::MultiMode))?;
    let ex2 = mm.iter().filter(|r| r.t > 0.0).all(|r| r.mode2 < r.mode1);
    let ratio = mm.iter().map(|r| r.mode2 / r.mode1).fold(0.0f64, f64::max);
    notes.push(format!("ex2 max mode2/mode1 {ratio:.4}"));

    let h = run_heatmap(&base(ExperimentKind::Heatmap))?;
    let n = h.x.len();
    let mut boundary = true;
    let mut proportional: f64 = 0.0;
    let mut monotone = true;
    let mut last = f64::INFINITY;
    for f in &h.frames {
        boundary &= f.values[0] == 0.0 && f.values[n - 1] == 0.0;
        // the sin x coefficient of this frame, from its peak sample
        let (j, _) =
            h.x.iter().enumerate().map(|(j, x)| (j, x.sin())).fold((0, 0.0), |m, p| if p.1 > m.1 { p } else { m });
        let a = f.values[j] / h.x[j].sin();
        for (x, v) in h.x.iter().zip(&f.values) {
            proportional = proportional.max((v - a * x.sin()).abs() / a.abs().max(f64::MIN_POSITIVE));
        }
        let amp = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        monotone &= amp <= last;
        last = amp;
    }
    let ex3 = boundary && proportional <= REFERENCE_TOL && monotone;
    notes.push(format!("ex3 boundary {boundary}, sin-x residual {proportional:.1e}, monotone {monotone}"));
    Ok((ex1 && ex2 && ex3, notes.join("; ")))
}

fn determinism() -> Result<Outcome, Error> {
    let mut ok = true;
    let mut files = 0;
    for kind in [
        ExperimentKind::FundamentalMode,
        ExperimentKind::MultiMode,
        ExperimentKind::Heatmap,
        ExperimentKind::Bounds,
        ExperimentKind::TheoremSuite,
    ] {
        let cfg = ExperimentConfig { experiment: kind, ..Default::default() };
        let a = run_experiment(&cfg)?;
        let b = run_experiment(&cfg)?;
        ok &= a.artifacts.len() == b.artifacts.len()
            && a.artifacts
                .iter()
                .zip(&b.artifacts)
                .all(|(x, y)| x.name == y.name && x.contents.as_bytes() == y.contents.as_bytes());
        files += a.artifacts.len();
    }
    Ok((ok, format!("{files} artifacts compared byte for byte")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 mittag-leffler engine", ml_engine, Some(ML_BUDGET)),
        ("2 kernel symbol", symbol, Some(SYMBOL_BUDGET)),
        ("3 two-regime resolvent bounds", two_regime, Some(TWO_REGIME_BUDGET)),
        ("4 well-posedness gate", gate, None),
        ("5 laplace round trip", round_trip, Some(ROUND_TRIP_BUDGET)),
        ("6 contour independence", contour, None),
        ("7 mittag-leffler decay", ml_decay, None),
        ("8 weighted stability", weighted, None),
        ("9 derivative estimate", derivative, None),
        ("10 worked examples", examples, Some(SUITE_BUDGET)),
        ("11 determinism", determinism, None),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let (pass, notes) = match run() {
            Ok(o) => o,
            Err(e) => (false, format!("error: {e}")),
        };
        let took = start.elapsed();
        let pass = pass && budget.is_none_or(|b| took <= b);
        if !pass {
            failed += 1;
        }
        println!("{} {name}: {notes} ({took:.2?})", if pass { "PASS" } else { "FAIL" });
    }
    let took = total.elapsed();
    let in_budget = took <= SUITE_BUDGET;
    if !in_budget {
        failed += 1;
    }
    println!("{} total runtime {took:.2?} (budget {SUITE_BUDGET:?})", if in_budget { "PASS" } else { "FAIL" });
    println!("{failed} failing");
    if failed > 0 {
        std::process::exit(1);
    }
}
