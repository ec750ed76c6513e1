mod common;

use ab_oracle::ml_talbot_neg_real;
use ab_resolvent::ab_kernel::ABSymbolParams;
use ab_resolvent::analysis::*;
use ab_resolvent::operator_model::{dirichlet_laplacian, SpectralOperator};
use ab_resolvent::resolvent_core::{ContourSpec, ResolventFamily, Variant};
use ab_resolvent::Error;
use common::logspace;
use proptest::prelude::*;

fn family(eigs: &[f64], a: f64, b: f64, c: f64) -> ResolventFamily {
    let op = SpectralOperator::real_diagonal(eigs).unwrap();
    ResolventFamily::new(op, ABSymbolParams::new(a, b, c).unwrap(), ContourSpec::default()).unwrap()
}

#[test]
fn oracle_ml_curve_slope() {
    let ts = logspace(1e2, 1e4, 25);
    let samples: Vec<(f64, f64)> =
        ts.iter().map(|&t| (t, ml_talbot_neg_real(0.8, 1.2, t.powf(0.8), 30).unwrap())).collect();
    let f = fit_loglog_slope(&samples, LARGE_T_WINDOW).unwrap();
    assert!((f.slope + 0.8).abs() <= 0.05, "{f:?}");
    assert!(f.r_squared > 0.999);
}

#[test]
fn fundamental_mode_large_t_slope() {
    let fam = family(&[-1.0], 0.8, 1.2, 1.0);
    let c = check_ml_decay_slope(&fam, &logspace(1e2, 1e4, 30)).unwrap();
    assert_eq!(c.status, CheckStatus::Pass, "{c:?}");
}

#[test]
fn exponential_decay_is_monotone() {
    let fam = family(&[-1.0], 1.0, 1.0, 8.0);
    let ts = logspace(1e-3, 10.0, 40);
    let n = family_norms(&fam, &ts, Variant::default()).unwrap();
    assert!(n.windows(2).all(|w| w[1] <= w[0]), "{n:?}");
}

#[test]
fn dirichlet_bound_holds_after_fit() {
    let fam = ResolventFamily::new(
        dirichlet_laplacian(20).unwrap(),
        ABSymbolParams::new(0.8, 1.2, 1.0).unwrap(),
        ContourSpec::default(),
    )
    .unwrap();
    let r = check_ml_decay(&fam, &logspace(1e-3, 1e4, 141)).unwrap();
    assert!(r.pass && r.max_violation_ratio <= 1.0, "{r:?}");
    assert!(r.c1 > 0.0 && r.c1 <= 1.0);
}

#[test]
fn scalar_reference_constant() {
    let op = SpectralOperator::real_diagonal(&[-1.0]).unwrap();
    for (a, b) in [(0.8, 1.2), (0.5, 1.0), (1.0, 1.0)] {
        let r =
            check_ml_decay_reference(&op, &ABSymbolParams::new(a, b, 1.0).unwrap(), &logspace(1e-3, 1e4, 100)).unwrap();
        assert!(r.pass && r.fitted_constant <= 10.0, "({a},{b}) {r:?}");
    }
}

#[test]
fn short_grid_refused() {
    let fam = family(&[-1.0], 0.8, 1.2, 1.0);
    assert!(check_ml_decay(&fam, &logspace(1.0, 10.0, 40)).is_err());
    assert!(matches!(check_ml_decay_slope(&fam, &logspace(1e2, 1e4, 5)), Err(Error::InsufficientSamples { .. })));
}

#[test]
fn classical_derivative_is_regular() {
    let fam = family(&[-1.0], 1.0, 1.0, 1.0);
    let c = check_time_derivative(&fam, &logspace(1e-4, 1e-1, 30), 0.1).unwrap();
    assert!(c.fit.slope.abs() <= 0.1, "{c:?}");
}

#[test]
fn derivative_matches_finite_difference() {
    for (a, b) in [(0.8, 1.2), (0.5, 1.3), (1.0, 1.0)] {
        let fam = ResolventFamily::new(
            dirichlet_laplacian(5).unwrap(),
            ABSymbolParams::new(a, b, 1.0).unwrap(),
            ContourSpec::default(),
        )
        .unwrap();
        let g = derivative_fd_gap(&fam, 1.0).unwrap();
        assert!(g <= 1e-6, "({a},{b}): {g}");
    }
}

#[test]
fn mixed_estimate_with_unit_weight_reduces_to_derivative() {
    // on mu = -1 every power of -A is the identity
    let fam = family(&[-1.0], 0.8, 1.2, 1.0);
    let ts = logspace(1e-4, 1e-1, 30);
    let d = check_time_derivative(&fam, &ts, 0.1).unwrap();
    let m = check_mixed_estimate(&fam, 0.01, 1, &ts).unwrap();
    assert!((d.fit.slope - m.fit.slope).abs() < 1e-9);
    assert!(check_mixed_estimate(&fam, 0.5, 3, &ts).is_err());
    assert!(check_weighted_stability(&fam, 1.5, &ts).is_err());
}

#[test]
fn higher_mode_stays_below() {
    for (a, b) in [(0.8, 1.2), (1.0, 1.0), (0.9, 1.1)] {
        let fam = ResolventFamily::new(
            dirichlet_laplacian(2).unwrap(),
            ABSymbolParams::new(a, b, 1.0).unwrap(),
            ContourSpec::default(),
        )
        .unwrap();
        let (ok, worst) = check_modal_ordering(&fam, &logspace(1e-3, 1e3, 40)).unwrap();
        assert!(ok, "({a},{b}) {worst}");
    }
}

#[test]
fn higher_mode_overtakes_when_alpha_plus_beta_below_two() {
    // large-t expansion: V_k ~ t^{beta-2}/(c Gamma(beta-1)) - lambda_k t^{alpha+beta-3}/(c Gamma(alpha+beta-2)),
    // and Gamma(alpha+beta-2) < 0 makes the correction grow with lambda_k
    let fam = ResolventFamily::new(
        dirichlet_laplacian(2).unwrap(),
        ABSymbolParams::new(0.5, 1.2, 1.0).unwrap(),
        ContourSpec::default(),
    )
    .unwrap();
    let (ok, worst) = check_modal_ordering(&fam, &logspace(1e1, 1e3, 10)).unwrap();
    assert!(!ok && worst > 1.0, "{worst}");
}

#[test]
fn two_regime_check_passes() {
    let op = dirichlet_laplacian(20).unwrap();
    let (s, l) = check_two_regime(
        &op,
        &ABSymbolParams::new(0.8, 1.2, 1.0).unwrap(),
        TWO_REGIME_ANGLE,
        &logspace(1e-4, 1e-1, 30),
        &logspace(1e1, 1e4, 30),
    )
    .unwrap();
    assert!(s.status.passed() && l.status.passed(), "{s:?} {l:?}");
}

#[test]
fn reports_serialize() {
    let op = dirichlet_laplacian(3).unwrap();
    let (s, _) = check_two_regime(
        &op,
        &ABSymbolParams::new(0.8, 1.2, 1.0).unwrap(),
        TWO_REGIME_ANGLE,
        &logspace(1e-4, 1e-1, 12),
        &logspace(1e1, 1e4, 12),
    )
    .unwrap();
    let json = serde_json::to_string(&s).unwrap();
    assert!(json.contains("\"status\":\"pass\""), "{json}");
    let back: SlopeCheck = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s);
}

proptest! {
    #[test]
    fn recovers_power_law(c in 1e-3f64..1e3, p in -3.0f64..3.0, lo in -4.0f64..0.0, n in 10usize..60) {
        let ts = logspace(10f64.powf(lo), 10f64.powf(lo + 2.0), n);
        let s: Vec<(f64, f64)> = ts.iter().map(|&t| (t, c * t.powf(p))).collect();
        let f = fit_loglog_slope(&s, (ts[0], ts[n - 1])).unwrap();
        prop_assert!((f.slope - p).abs() < 1e-9);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-8);
        prop_assert!(f.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn slope_is_scale_invariant(k in 1e-3f64..1e3) {
        let ts = logspace(1e-2, 1e2, 20);
        let s: Vec<(f64, f64)> = ts.iter().map(|&t| (t, (1.0 + t).powf(-0.7))).collect();
        let s2: Vec<(f64, f64)> = s.iter().map(|&(t, v)| (t, k * v)).collect();
        let a = fit_loglog_slope(&s, (1e-2, 1e2)).unwrap();
        let b = fit_loglog_slope(&s2, (1e-2, 1e2)).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-12);
        prop_assert!((a.r_squared - b.r_squared).abs() < 1e-12);
    }
}
