//! Reproducible experiments on the Dirichlet sine model: decay curves,
//! heatmaps, bound checks and the theorem suite, emitted as CSV, JSON and SVG.

mod report;
pub mod svg;

pub use report::{run_theorem_suite, Report, ReportCheck, REPORT_VERSION};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ab_kernel::ABSymbolParams;
use crate::analysis::{check_ml_decay, family_norms, BoundReport};
use crate::error::{Error, Result};
use crate::operator_model::{
    dirichlet_laplacian, evaluate_field, project_initial_datum, InitialDatum, SpectralOperator, StateVector,
};
use crate::resolvent_core::{ml_family_apply, ContourSpec, ResolventFamily, Spacing, Variant};
use crate::special_functions::rgamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FundamentalMode,
    MultiMode,
    Heatmap,
    Bounds,
    TheoremSuite,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FundamentalMode => "fundamental-mode",
            ExperimentKind::MultiMode => "multi-mode",
            ExperimentKind::Heatmap => "heatmap",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::TheoremSuite => "theorem-suite",
        }
    }

    /// Whether the experiment evaluates the contour family `V(t)`.
    pub fn uses_family(self) -> bool {
        !matches!(self, ExperimentKind::MultiMode | ExperimentKind::Heatmap)
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::invalid(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridSpacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub spacing: GridSpacing,
}

impl TGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        if n == 1 {
            return vec![self.t_min];
        }
        let mut out: Vec<f64> = (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    GridSpacing::Log => self.t_min * (self.t_max / self.t_min).powf(f),
                    GridSpacing::Linear => self.t_min + (self.t_max - self.t_min) * f,
                }
            })
            .collect();
        out[n - 1] = self.t_max;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XGrid {
    pub n_points: usize,
}

pub const MIN_X_POINTS: usize = 64;

impl Default for XGrid {
    fn default() -> Self {
        XGrid { n_points: MIN_X_POINTS }
    }
}

impl XGrid {
    /// `n_points` equally spaced abscissae on `[0, pi]`, endpoints included.
    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut out: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
        out[n - 1] = PI;
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourOverrides {
    pub gamma: Option<f64>,
    pub nodes: Option<usize>,
    pub spacing: Option<Spacing>,
}

impl ContourOverrides {
    pub fn spec(&self) -> ContourSpec {
        let d = ContourSpec::default();
        ContourSpec {
            gamma: self.gamma.unwrap_or(d.gamma),
            n_nodes: self.nodes.unwrap_or(d.n_nodes),
            spacing: self.spacing.unwrap_or(d.spacing),
            ..d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    #[serde(alias = "K")]
    pub modes: usize,
    /// Defaults depend on the experiment; see [`ExperimentConfig::default_t_grid`].
    pub t_grid: Option<TGrid>,
    pub x_grid: XGrid,
    /// Initial datum for the heatmap; the decay curves fix `sin x` and `sin x + sin 2x`.
    pub datum: Option<String>,
    pub contour: ContourOverrides,
    pub out_dir: String,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::FundamentalMode,
            alpha: 0.8,
            beta: 1.2,
            c: 1.0,
            modes: 20,
            t_grid: None,
            x_grid: XGrid::default(),
            datum: None,
            contour: ContourOverrides::default(),
            out_dir: "out".into(),
            svg: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn default_t_grid(kind: ExperimentKind) -> TGrid {
        match kind {
            ExperimentKind::Heatmap => TGrid { t_min: 0.0, t_max: 5.0, n_points: 128, spacing: GridSpacing::Linear },
            _ => TGrid { t_min: 1e-3, t_max: 5.0, n_points: 200, spacing: GridSpacing::Log },
        }
    }

    pub fn t_grid(&self) -> TGrid {
        self.t_grid.unwrap_or_else(|| Self::default_t_grid(self.experiment))
    }

    pub fn datum(&self) -> &str {
        match self.experiment {
            ExperimentKind::MultiMode => "sin x + sin 2x",
            ExperimentKind::Heatmap => self.datum.as_deref().unwrap_or("sin x"),
            _ => "sin x",
        }
    }

    /// Copy with every default made explicit, as written to the sidecar JSON.
    pub fn resolved(&self) -> Self {
        ExperimentConfig { t_grid: Some(self.t_grid()), datum: Some(self.datum().to_string()), ..self.clone() }
    }

    pub fn params(&self) -> Result<ABSymbolParams> {
        ABSymbolParams::new(self.alpha, self.beta, self.c)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.params()?;
        if self.experiment.uses_family() && p.beta >= 1.0 + p.alpha {
            return Err(Error::IllPosed { alpha: p.alpha, beta: p.beta });
        }
        let need = if self.experiment == ExperimentKind::MultiMode { 2 } else { 1 };
        if self.modes < need {
            return Err(Error::invalid(format!("{} needs at least {need} modes", self.experiment.name())));
        }
        let g = self.t_grid();
        let zero_ok = self.experiment == ExperimentKind::Heatmap && g.spacing == GridSpacing::Linear;
        if !(g.t_min > 0.0 || (zero_ok && g.t_min == 0.0)) || !g.t_min.is_finite() {
            return Err(Error::invalid(format!("t_min = {} must be positive", g.t_min)));
        }
        if !(g.t_max > g.t_min) || !g.t_max.is_finite() || g.n_points < 2 {
            return Err(Error::invalid("t grid needs t_max > t_min and at least two points"));
        }
        if self.experiment == ExperimentKind::Heatmap && self.x_grid.n_points < MIN_X_POINTS {
            return Err(Error::invalid(format!("heatmap needs at least {MIN_X_POINTS} x points")));
        }
        self.contour.spec().validate(&dirichlet_laplacian(self.modes)?)?;
        Ok(())
    }

    fn family(&self) -> Result<ResolventFamily> {
        ResolventFamily::new(dirichlet_laplacian(self.modes)?, self.params()?, self.contour.spec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalRow {
    pub t: f64,
    pub ml_reference: f64,
    pub contour_value: f64,
    pub abs_gap: f64,
}

/// `sqrt(pi/2) |E(-t^alpha)|` against `||V(t) sin||` and `||K(t) sin||`.
pub fn run_fundamental_mode(config: &ExperimentConfig) -> Result<Vec<FundamentalRow>> {
    config.validate()?;
    let fam = config.family()?;
    let op = fam.operator();
    let u0 = project_initial_datum(op, InitialDatum::Named("sin x"))?;
    let ml = config.params()?.ml();
    config
        .t_grid()
        .points()
        .into_iter()
        .map(|t| {
            let at = |e: Error| e.context(format!("fundamental mode at t = {t}"));
            let reference = op.norm(&ml_family_apply(op, ml, t, &u0).map_err(at)?);
            let contour = op.norm(&fam.v_apply(t, &u0).map_err(at)?);
            let gap = op.norm(&fam.decomposition_residual(t, &u0).map_err(at)?);
            Ok(FundamentalRow { t, ml_reference: reference, contour_value: contour, abs_gap: gap })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiModeRow {
    pub t: f64,
    pub mode1: f64,
    pub mode2: f64,
}

/// Modal amplitudes `E(-t^alpha)` and `E(-4 t^alpha)` of `sin x + sin 2x`.
pub fn run_multi_mode(config: &ExperimentConfig) -> Result<Vec<MultiModeRow>> {
    config.validate()?;
    let op = dirichlet_laplacian(config.modes)?;
    let u0 = project_initial_datum(&op, InitialDatum::Named(config.datum()))?;
    let ml = config.params()?.ml();
    config
        .t_grid()
        .points()
        .into_iter()
        .map(|t| {
            let a = modal_amplitudes(&op, ml, t, &u0)?;
            Ok(MultiModeRow { t, mode1: a.0[0].re, mode2: a.0[1].re })
        })
        .collect()
}

fn modal_amplitudes(
    op: &SpectralOperator,
    ml: crate::special_functions::MLParams,
    t: f64,
    u0: &StateVector,
) -> Result<StateVector> {
    if t == 0.0 {
        let g = rgamma(ml.beta);
        return Ok(StateVector(u0.0.iter().map(|c| c * g).collect()));
    }
    ml_family_apply(op, ml, t, u0).map_err(|e| e.context(format!("modal amplitudes at t = {t}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFrame {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub x: Vec<f64>,
    pub frames: Vec<FieldFrame>,
}

/// `u(t, x) = sum_k E(-k^2 t^alpha) u0_k sin(kx)`; the `t = 0` frame uses `E(0) = 1/Gamma(beta)`.
pub fn run_heatmap(config: &ExperimentConfig) -> Result<Heatmap> {
    config.validate()?;
    let op = dirichlet_laplacian(config.modes)?;
    let u0 = project_initial_datum(&op, InitialDatum::Named(config.datum()))?;
    let ml = config.params()?.ml();
    let x = config.x_grid.points();
    let frames = config
        .t_grid()
        .points()
        .into_iter()
        .map(|t| {
            let a = modal_amplitudes(&op, ml, t, &u0)?;
            let values = x.iter().map(|&xi| evaluate_field(&op, &a, xi)).collect::<Result<Vec<_>>>()?;
            Ok(FieldFrame { t, values })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Heatmap { x, frames })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub t: f64,
    pub family_norm: f64,
    pub bound: f64,
}

/// `||V(t)||` on the grid together with the fitted bound `C E(-c1 t^alpha)`.
pub fn run_bounds(config: &ExperimentConfig) -> Result<(Vec<BoundsRow>, BoundReport)> {
    config.validate()?;
    let fam = config.family()?;
    let grid = config.t_grid().points();
    let report = check_ml_decay(&fam, &grid)?;
    let norms = family_norms(&fam, &grid, Variant::default())?;
    let ml = config.params()?.ml();
    let rows = grid
        .iter()
        .zip(&norms)
        .map(|(&t, &n)| {
            let e = crate::special_functions::ml_eval_real(ml, -report.c1 * t.powf(ml.alpha))?;
            Ok(BoundsRow { t, family_norm: n, bound: report.fitted_constant * e })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, report))
}

/// 17 significant digits, fixed exponent form.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fundamental_csv(rows: &[FundamentalRow]) -> String {
    let mut out = String::from("t,ml_reference,contour_value,abs_gap\n");
    for r in rows {
        out += &format!(
            "{},{},{},{}\n",
            fmt_num(r.t),
            fmt_num(r.ml_reference),
            fmt_num(r.contour_value),
            fmt_num(r.abs_gap)
        );
    }
    out
}

pub fn multi_mode_csv(rows: &[MultiModeRow]) -> String {
    let mut out = String::from("t,mode1,mode2\n");
    for r in rows {
        out += &format!("{},{},{}\n", fmt_num(r.t), fmt_num(r.mode1), fmt_num(r.mode2));
    }
    out
}

pub fn heatmap_csv(h: &Heatmap) -> String {
    let mut out = String::from("t,x,u\n");
    for f in &h.frames {
        for (x, u) in h.x.iter().zip(&f.values) {
            out += &format!("{},{},{}\n", fmt_num(f.t), fmt_num(*x), fmt_num(*u));
        }
    }
    out
}

pub fn bounds_csv(rows: &[BoundsRow]) -> String {
    let mut out = String::from("t,family_norm,bound\n");
    for r in rows {
        out += &format!("{},{},{}\n", fmt_num(r.t), fmt_num(r.family_norm), fmt_num(r.bound));
    }
    out
}

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// False when a theorem or bound check failed.
    pub passed: bool,
}

fn artifact(name: String, contents: String) -> Artifact {
    Artifact { name, contents }
}

/// Runs the configured experiment and renders every output file in memory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let stem = config.experiment.name().replace('-', "_");
    let sidecar = serde_json::to_string_pretty(&config.resolved()).expect("config serializes") + "\n";
    let mut artifacts = vec![artifact(format!("{stem}.config.json"), sidecar)];
    let mut passed = true;
    match config.experiment {
        ExperimentKind::FundamentalMode => {
            let rows = run_fundamental_mode(config)?;
            artifacts.push(artifact(format!("{stem}.csv"), fundamental_csv(&rows)));
            if config.svg {
                let ml: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.ml_reference)).collect();
                let v: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.contour_value)).collect();
                let plot =
                    svg::line_plot("fundamental mode", &[("ML reference", &ml), ("contour V(t)", &v)], true, true);
                artifacts.push(artifact(format!("{stem}.svg"), plot));
            }
        }
        ExperimentKind::MultiMode => {
            let rows = run_multi_mode(config)?;
            artifacts.push(artifact(format!("{stem}.csv"), multi_mode_csv(&rows)));
            if config.svg {
                let m1: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.mode1)).collect();
                let m2: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.mode2)).collect();
                let log_x = config.t_grid().spacing == GridSpacing::Log;
                let plot = svg::line_plot("modal decay", &[("mode 1", &m1), ("mode 2", &m2)], log_x, true);
                artifacts.push(artifact(format!("{stem}.svg"), plot));
            }
        }
        ExperimentKind::Heatmap => {
            let h = run_heatmap(config)?;
            artifacts.push(artifact(format!("{stem}.csv"), heatmap_csv(&h)));
            if config.svg {
                artifacts.push(artifact(format!("{stem}.svg"), svg::heatmap("u(t, x)", &h)));
            }
        }
        ExperimentKind::Bounds => {
            let (rows, report) = run_bounds(config)?;
            passed = report.pass;
            artifacts.push(artifact(format!("{stem}.csv"), bounds_csv(&rows)));
            artifacts.push(artifact(
                format!("{stem}.json"),
                serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
            ));
            if config.svg {
                let v: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.family_norm)).collect();
                let b: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.bound)).collect();
                let plot = svg::line_plot("bound check", &[("||V(t)||", &v), ("C E(-c1 t^a)", &b)], true, true);
                artifacts.push(artifact(format!("{stem}.svg"), plot));
            }
        }
        ExperimentKind::TheoremSuite => {
            let report = run_theorem_suite(config)?;
            passed = report.checks.iter().all(|c| c.pass);
            artifacts.push(artifact(format!("{stem}.json"), report.to_json()));
            artifacts.push(artifact(format!("{stem}.csv"), report.to_csv()));
        }
    }
    Ok(Outcome { artifacts, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "heatmap", "K": 5}"#).unwrap();
        assert_eq!(c.modes, 5);
        assert_eq!(c.t_grid().spacing, GridSpacing::Linear);
        assert_eq!(c.t_grid().points()[0], 0.0);
        assert!(c.validate().is_ok());
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        let r = c.resolved();
        assert_eq!(r.datum.as_deref(), Some("sin x"));
        assert_eq!(ExperimentConfig::from_json(&serde_json::to_string(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn config_invariants() {
        let base = ExperimentConfig::default();
        assert!(matches!(ExperimentConfig { beta: 1.8, ..base.clone() }.validate(), Err(Error::IllPosed { .. })));
        // modal experiments never touch V(t)
        assert!(ExperimentConfig { beta: 1.8, experiment: ExperimentKind::MultiMode, ..base.clone() }
            .validate()
            .is_ok());
        let zero = TGrid { t_min: 0.0, ..ExperimentConfig::default_t_grid(ExperimentKind::FundamentalMode) };
        assert!(ExperimentConfig { t_grid: Some(zero), ..base.clone() }.validate().is_err());
        assert!(ExperimentConfig { modes: 1, experiment: ExperimentKind::MultiMode, ..base.clone() }
            .validate()
            .is_err());
        let narrow =
            ExperimentConfig { experiment: ExperimentKind::Heatmap, x_grid: XGrid { n_points: 10 }, ..base.clone() };
        assert!(narrow.validate().is_err());
        let bad_contour = ContourOverrides { gamma: Some(1.0), ..Default::default() };
        assert!(ExperimentConfig { contour: bad_contour, ..base }.validate().is_err());
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = TGrid { t_min: 1e-3, t_max: 5.0, n_points: 200, spacing: GridSpacing::Log }.points();
        assert_eq!((g[0], g[199], g.len()), (1e-3, 5.0, 200));
        let x = XGrid { n_points: 65 }.points();
        assert_eq!((x[0], x[64]), (0.0, PI));
    }

    #[test]
    fn experiment_names_parse() {
        for k in [ExperimentKind::FundamentalMode, ExperimentKind::Heatmap, ExperimentKind::TheoremSuite] {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }
}
