mod common;

use ab_oracle::{ab_resolvent_scalar_hp, talbot};
use ab_resolvent::ab_kernel::ABSymbolParams;
use ab_resolvent::operator_model::{dirichlet_laplacian, SpectralOperator, StateVector};
use ab_resolvent::quad::{integrate_breakpoints, QuadOptions};
use ab_resolvent::resolvent_core::*;
use common::{loglog_slope, logspace};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn params(a: f64, b: f64) -> ABSymbolParams {
    ABSymbolParams::new(a, b, 1.0).unwrap()
}

fn fundamental(k: usize, spec: ContourSpec) -> ResolventFamily {
    ResolventFamily::new(dirichlet_laplacian(k).unwrap(), params(0.8, 1.2), spec).unwrap()
}

#[test]
fn resolvent_matches_high_precision() {
    let op = SpectralOperator::real_diagonal(&[-1.0, -4.0]).unwrap();
    let p = params(0.8, 1.2);
    for s in [Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.5), Complex64::new(1e-3, -2.0)] {
        let r = ab_resolvent_apply(&op, &p, s, &StateVector::from_real(&[1.0, 1.0])).unwrap();
        for (k, mu) in [-1.0, -4.0].iter().enumerate() {
            let want = ab_resolvent_scalar_hp(0.8, 1.2, 1.0, Complex64::new(*mu, 0.0), s);
            assert!((r.0[k] - want).norm() <= 1e-14 * want.norm(), "{s} {mu}");
        }
    }
}

#[test]
fn norm_dominates_single_mode() {
    let one = SpectralOperator::real_diagonal(&[-1.0]).unwrap();
    let two = SpectralOperator::real_diagonal(&[-1.0, -4.0]).unwrap();
    for (a, b) in [(0.8, 1.2), (0.5, 1.0), (1.0, 1.9)] {
        let p = params(a, b);
        for s in logspace(1e-3, 1e3, 13) {
            for ang in [0.0, 1.0, 2.5] {
                let z = Complex64::from_polar(s, ang);
                assert!(ab_resolvent_norm(&two, &p, z).unwrap() >= ab_resolvent_norm(&one, &p, z).unwrap());
            }
        }
    }
}

#[test]
fn two_regime_slopes() {
    let op = dirichlet_laplacian(20).unwrap();
    let gamma = 0.75 * PI;
    for (a, b) in [(0.8, 1.2), (0.5, 1.0), (0.9, 1.5)] {
        let p = params(a, b);
        let norm_on = |rs: &[f64]| -> Vec<f64> {
            rs.iter().map(|&r| ab_resolvent_norm(&op, &p, Complex64::from_polar(r, gamma)).unwrap()).collect()
        };
        let small = logspace(1e-4, 1e-1, 30);
        let large = logspace(1e1, 1e4, 30);
        let ss = loglog_slope(&small, &norm_on(&small));
        let sl = loglog_slope(&large, &norm_on(&large));
        assert!((ss - (1.0 - b)).abs() <= 0.05, "({a},{b}) small: {ss}");
        assert!((sl + b).abs() <= 0.05, "({a},{b}) large: {sl}");
    }
}

#[test]
fn scalar_family_matches_talbot() {
    let v = StateVector::from_real(&[1.0]);
    for (a, b, c) in [(1.0, 1.0, 1.0), (1.0, 1.0, 3.0), (0.8, 1.2, 1.0), (0.5, 1.3, 2.0)] {
        let p = ABSymbolParams::new(a, b, c).unwrap();
        let op = SpectralOperator::real_diagonal(&[-1.0]).unwrap();
        let fam = ResolventFamily::new(op, p, ContourSpec::default()).unwrap();
        for t in [0.05, 0.7, 4.0] {
            let got = fam.v_apply(t, &v).unwrap().0[0];
            let phi = |s: Complex64| s.powf(a - b) / (s.powf(a) + c) / (s.powf(a - 1.0) + 1.0);
            let want = talbot(phi, t, 48);
            assert!((got.re - want).abs() < 1e-7, "({a},{b},{c}) t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn real_data_give_real_output() {
    let fam = fundamental(20, ContourSpec::default());
    let v = StateVector::from_real(&(1..=20).map(|k| 1.0 / k as f64).collect::<Vec<_>>());
    for t in logspace(1e-3, 1e3, 7) {
        let out = fam.v_apply(t, &v).unwrap();
        let im = out.0.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(im <= 1e-10 * out.l2(), "t={t}: {im}");
    }
}

fn laplace_of_family(fam: &ResolventFamily, s: Complex64, v: &StateVector, mode: usize) -> Complex64 {
    let t_end = 80.0 / s.re;
    let mut pts = vec![0.0];
    pts.extend(logspace(1e-12, 1.0, 13));
    pts.extend(logspace(2.0, t_end, 8));
    let f =
        |t: f64| if t == 0.0 { Complex64::new(0.0, 0.0) } else { (-s * t).exp() * fam.v_apply(t, v).unwrap().0[mode] };
    integrate_breakpoints(f, &pts, QuadOptions { abs_tol: 1e-10, rel_tol: 1e-8, max_intervals: 400 }).unwrap().value
}

#[test]
fn laplace_round_trip() {
    let fam = fundamental(2, ContourSpec::default());
    let v = StateVector::from_real(&[1.0, 1.0]);
    for s in [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 1.0)] {
        let want = ab_resolvent_apply(fam.operator(), fam.params(), s, &v).unwrap();
        for mode in 0..2 {
            let got = laplace_of_family(&fam, s, &v, mode);
            let e = (got - want.0[mode]).norm() / want.0[mode].norm();
            assert!(e <= 1e-5, "s={s} mode={mode}: {e}");
        }
    }
}

#[test]
fn contour_independence() {
    let a = fundamental(20, ContourSpec::with_gamma(2.0 * PI / 3.0));
    let b = fundamental(20, ContourSpec::with_gamma(0.75 * PI));
    let c = fundamental(20, ContourSpec { spacing: Spacing::Geometric, ..ContourSpec::with_gamma(0.6 * PI) });
    let v = StateVector::unit(20, 0);
    for t in logspace(1e-3, 5.0, 12) {
        let va = a.v_apply(t, &v).unwrap();
        let vb = b.v_apply(t, &v).unwrap();
        let vc = c.v_apply(t, &v).unwrap();
        for k in 0..20 {
            assert!((va.0[k] - vb.0[k]).norm() < 1e-7, "t={t}");
            assert!((vc.0[k] - vb.0[k]).norm() < 1e-7, "t={t}");
        }
    }
}

#[test]
fn node_doubling_converges() {
    let v = StateVector::unit(1, 0);
    let op = dirichlet_laplacian(1).unwrap();
    let p = params(0.8, 1.2);
    let at = |n: usize, t: f64| {
        let spec = ContourSpec { n_nodes: n, ..Default::default() };
        ResolventFamily::new(op.clone(), p, spec).unwrap().v_apply(t, &v).unwrap().0[0]
    };
    for t in [1e-2, 1.0, 5.0] {
        assert!((at(64, t) - at(128, t)).norm() < 1e-8);
    }
    // raw rule, no adaptivity: errors contract by at least 4 per doubling
    let fine = {
        let nodes = build_contour(&op, &p, &ContourSpec { n_nodes: 4096, r_min: 1e-14, ..Default::default() }).unwrap();
        raw_sum(&nodes, &op, &p, 1.0)
    };
    let mut errs = vec![];
    for n in [24, 48, 96, 192] {
        let nodes = build_contour(&op, &p, &ContourSpec { n_nodes: n, r_min: 1e-14, ..Default::default() }).unwrap();
        errs.push((raw_sum(&nodes, &op, &p, 1.0) - fine).norm());
    }
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] / 4.0 || w[1] < 1e-13, "{errs:?}");
    }
}

fn raw_sum(nodes: &[ContourNode], op: &SpectralOperator, p: &ABSymbolParams, t: f64) -> Complex64 {
    let v = StateVector::unit(1, 0);
    nodes.iter().map(|n| n.w * (n.s * t).exp() * ab_resolvent_apply(op, p, n.s, &v).unwrap().0[0]).sum()
}

#[test]
fn family_is_bounded() {
    let fam = fundamental(20, ContourSpec::default());
    let v = StateVector::unit(20, 0);
    let sup =
        logspace(1e-3, 1e3, 40).iter().map(|&t| fam.operator().norm(&fam.v_apply(t, &v).unwrap())).fold(0.0, f64::max);
    assert!(sup.is_finite() && sup < 1.0, "{sup}");
}

#[test]
fn decomposition_residual_behaviour() {
    let fam = fundamental(1, ContourSpec::default());
    let v = StateVector::unit(1, 0);
    let ts = logspace(1e-2, 1e2, 30);
    let kn: Vec<f64> = ts.iter().map(|&t| fam.decomposition_residual(t, &v).unwrap().l2()).collect();
    assert!(kn.iter().all(|x| x.is_finite() && *x < 2.0));
    let large = logspace(1e2, 1e4, 20);
    let kl: Vec<f64> = large.iter().map(|&t| fam.decomposition_residual(t, &v).unwrap().l2()).collect();
    let ml: Vec<f64> =
        large.iter().map(|&t| ml_family_apply(fam.operator(), fam.params().ml(), t, &v).unwrap().l2()).collect();
    let (sk, sm) = (loglog_slope(&large, &kl), loglog_slope(&large, &ml));
    assert!(sk <= sm + 0.1, "{sk} vs {sm}");
}

#[test]
fn ml_family_examples() {
    let op = SpectralOperator::real_diagonal(&[-1.0, -4.0]).unwrap();
    let p = ab_resolvent::special_functions::MLParams::new(0.8, 1.2).unwrap();
    let out = ml_family_apply(&op, p, 1.0, &StateVector::from_real(&[1.0, 1.0])).unwrap();
    let e1 = ab_oracle::ml_eval_oracle(0.8, 1.2, Complex64::new(-1.0, 0.0), 30).unwrap();
    let e4 = ab_oracle::ml_eval_oracle(0.8, 1.2, Complex64::new(-4.0, 0.0), 30).unwrap();
    assert!((out.0[0] - e1).norm() < 1e-14 && (out.0[1] - e4).norm() < 1e-14);
    let q = ab_resolvent::special_functions::MLParams::new(0.6, 1.0).unwrap();
    let near0 = ml_family_apply(&op, q, 1e-14, &StateVector::from_real(&[2.0, 3.0])).unwrap();
    assert!((near0.0[0].re - 2.0).abs() < 1e-6 && (near0.0[1].re - 3.0).abs() < 1e-6);
    assert!(ml_family_apply(&op, p, 0.0, &StateVector::from_real(&[1.0, 1.0])).is_err());
}

#[test]
fn solved_form_differs_and_is_reported() {
    let op = dirichlet_laplacian(3).unwrap();
    let p = params(0.8, 1.2);
    let v = StateVector::from_real(&[1.0, 1.0, 1.0]);
    let s = Complex64::new(2.0, 1.0);
    let a = ab_resolvent_apply(&op, &p, s, &v).unwrap();
    let b = solved_symbol_resolvent_apply(&op, &p, s, &v).unwrap();
    let gap = a.0.iter().zip(&b.0).map(|(x, y)| (x - y).norm() / x.norm()).fold(0.0, f64::max);
    assert!(gap > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contour_conjugate_pairs(g in 1.6f64..3.1, n in 8usize..80, lo in -12.0f64..-1.0, hi in 0.5f64..4.0) {
        let op = dirichlet_laplacian(3).unwrap();
        let spec = ContourSpec { gamma: g, r_min: 10f64.powf(lo), r_max: 10f64.powf(hi), n_nodes: n, spacing: Spacing::LogUniform };
        let nodes = build_contour(&op, &params(0.8, 1.2), &spec).unwrap();
        prop_assert_eq!(nodes.len(), 2 * n);
        for pair in nodes.chunks(2) {
            prop_assert_eq!(pair[0].s.conj(), pair[1].s);
            prop_assert_eq!(pair[0].w.conj(), pair[1].w);
        }
    }

    #[test]
    fn family_refusal_boundary(a in 0.1f64..=1.0, extra in 0.0f64..1.0) {
        let p = ABSymbolParams::new(a, 1.0 + a + extra, 1.0).unwrap();
        let r = ResolventFamily::new(dirichlet_laplacian(2).unwrap(), p, ContourSpec::default());
        let refused = matches!(r, Err(ab_resolvent::Error::IllPosed { .. }));
        prop_assert!(refused);
    }
}
