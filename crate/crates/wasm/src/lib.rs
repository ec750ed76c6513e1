//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the plain functions underneath
//! return `Result<Vec<f64>, String>` so they can be tested natively.

use ab_resolvent::ab_kernel::ABSymbolParams;
use ab_resolvent::experiments::{run_heatmap, ExperimentConfig, ExperimentKind, GridSpacing, TGrid, XGrid};
use ab_resolvent::operator_model::{SpectralOperator, StateVector};
use ab_resolvent::resolvent_core::{ContourSpec, ResolventFamily};
use ab_resolvent::special_functions::{ml_eval_real, MLParams};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 4096;

fn grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err("need 0 < t_min < t_max".into());
    }
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(format!("point count must lie in [2, {MAX_POINTS}]"));
    }
    Ok((0..n).map(|i| t_min * (t_max / t_min).powf(i as f64 / (n - 1) as f64)).collect())
}

/// `[t_0, E(-l_0 t_0^a), E(-l_1 t_0^a), ..., t_1, ...]` for each rate `l_j`, on a log grid.
pub fn ml_curves_impl(
    alpha: f64,
    beta: f64,
    lambdas: &[f64],
    t_min: f64,
    t_max: f64,
    n: usize,
) -> Result<Vec<f64>, String> {
    let p = MLParams::new(alpha, beta).map_err(|e| e.to_string())?;
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err("rates must be non-negative".into());
    }
    let mut out = Vec::with_capacity(n * (1 + lambdas.len()));
    for t in grid(t_min, t_max, n)? {
        out.push(t);
        for l in lambdas {
            out.push(ml_eval_real(p, -l * t.powf(alpha)).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// `[t, E(-t^a), V(t)]` triples for the single mode `mu = -1`.
pub fn family_vs_reference_impl(
    alpha: f64,
    beta: f64,
    c: f64,
    t_min: f64,
    t_max: f64,
    n: usize,
) -> Result<Vec<f64>, String> {
    let params = ABSymbolParams::new(alpha, beta, c).map_err(|e| e.to_string())?;
    let op = SpectralOperator::real_diagonal(&[-1.0]).map_err(|e| e.to_string())?;
    let fam = ResolventFamily::new(op, params, ContourSpec::default()).map_err(|e| e.to_string())?;
    let v = StateVector::from_real(&[1.0]);
    let mut out = Vec::with_capacity(3 * n);
    for t in grid(t_min, t_max, n)? {
        let e = ml_eval_real(params.ml(), -t.powf(alpha)).map_err(|e| e.to_string())?;
        let vt = fam.v_apply(t, &v).map_err(|e| e.to_string())?;
        out.extend([t, e, vt.0[0].re]);
    }
    Ok(out)
}

/// Row-major `u(t_i, x_j)` on `nt` linear times in `[0, t_max]` and `nx` points on `[0, pi]`.
pub fn heatmap_impl(
    alpha: f64,
    beta: f64,
    modes: usize,
    datum: &str,
    t_max: f64,
    nt: usize,
    nx: usize,
) -> Result<Vec<f64>, String> {
    if nt * nx > 1 << 20 {
        return Err("grid too large".into());
    }
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Heatmap,
        alpha,
        beta,
        modes,
        t_grid: Some(TGrid { t_min: 0.0, t_max, n_points: nt, spacing: GridSpacing::Linear }),
        x_grid: XGrid { n_points: nx },
        datum: Some(datum.to_string()),
        ..Default::default()
    };
    let h = run_heatmap(&cfg).map_err(|e| e.to_string())?;
    Ok(h.frames.into_iter().flat_map(|f| f.values).collect())
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ml_curves(
    alpha: f64,
    beta: f64,
    lambdas: &[f64],
    t_min: f64,
    t_max: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    js(ml_curves_impl(alpha, beta, lambdas, t_min, t_max, n))
}

#[wasm_bindgen]
pub fn family_vs_reference(
    alpha: f64,
    beta: f64,
    c: f64,
    t_min: f64,
    t_max: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    js(family_vs_reference_impl(alpha, beta, c, t_min, t_max, n))
}

#[wasm_bindgen]
pub fn heatmap(
    alpha: f64,
    beta: f64,
    modes: usize,
    datum: &str,
    t_max: f64,
    nt: usize,
    nx: usize,
) -> Result<Vec<f64>, JsError> {
    js(heatmap_impl(alpha, beta, modes, datum, t_max, nt, nx))
}
