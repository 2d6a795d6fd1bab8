//! Product densities, pair correlation functions and space-time
//! K-functions of stationary STDPP models.

use std::f64::consts::PI;
use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    kernel_value_numeric, validate_existence, InversionGrid, KernelModel, MaternNonSeparableParams,
    MaternSeparableParams,
};
use crate::linalg::determinant;
use crate::quad::{integrate_rect, QuadConfig};
use crate::simulate::SpaceTimePoint;

/// Largest point configuration accepted by [`product_density`].
pub const MAX_PRODUCT_DENSITY_ORDER: usize = 12;

/// Tolerance used by [`pcf_ordering_check`].
pub const ORDERING_TOLERANCE: f64 = 1e-12;

/// Evaluation grid of spatial distances and temporal lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagGrid {
    spatial_lags: Vec<f64>,
    temporal_lags: Vec<f64>,
}

fn check_lags(name: &str, lags: &[f64]) -> Result<()> {
    if lags.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} lags are empty")));
    }
    if !lags.iter().all(|v| v.is_finite()) || lags[0] < 0.0 {
        return Err(Error::InvalidGrid(format!("{name} lags must be finite and ≥ 0")));
    }
    if lags.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("{name} lags must be strictly ascending")));
    }
    Ok(())
}

impl LagGrid {
    pub fn new(spatial_lags: Vec<f64>, temporal_lags: Vec<f64>) -> Result<Self> {
        check_lags("spatial", &spatial_lags)?;
        check_lags("temporal", &temporal_lags)?;
        Ok(Self {
            spatial_lags,
            temporal_lags,
        })
    }

    /// `n_u` equally spaced distances on `[0, u_max]` and `n_t` lags on `[0, t_max]`.
    pub fn regular(u_max: f64, n_u: usize, t_max: f64, n_t: usize) -> Result<Self> {
        let axis = |max: f64, n: usize| -> Vec<f64> {
            match n {
                0 => vec![],
                1 => vec![max],
                _ => (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect(),
            }
        };
        Self::new(axis(u_max, n_u), axis(t_max, n_t))
    }

    /// `n_u` distances `u_max/n_u, …, u_max` and likewise for time (no zero lag).
    pub fn positive(u_max: f64, n_u: usize, t_max: f64, n_t: usize) -> Result<Self> {
        let axis = |max: f64, n: usize| -> Vec<f64> { (1..=n).map(|i| max * i as f64 / n as f64).collect() };
        Self::new(axis(u_max, n_u), axis(t_max, n_t))
    }

    pub fn spatial_lags(&self) -> &[f64] {
        &self.spatial_lags
    }

    pub fn temporal_lags(&self) -> &[f64] {
        &self.temporal_lags
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.spatial_lags.len(), self.temporal_lags.len())
    }

    pub fn max_spatial(&self) -> f64 {
        *self.spatial_lags.last().expect("non-empty grid")
    }

    pub fn max_temporal(&self) -> f64 {
        *self.temporal_lags.last().expect("non-empty grid")
    }
}

/// Which summary statistic a curve holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    GTheoretical,
    KTheoretical,
    GEmpirical,
    KEmpirical,
}

impl StatisticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StatisticKind::GTheoretical => "g_theoretical",
            StatisticKind::KTheoretical => "K_theoretical",
            StatisticKind::GEmpirical => "g_empirical",
            StatisticKind::KEmpirical => "K_empirical",
        }
    }
}

/// Values of a statistic on a [`LagGrid`], indexed `[spatial][temporal]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCurve {
    pub grid: LagGrid,
    pub values: Vec<Vec<f64>>,
    pub statistic: StatisticKind,
    /// Model description or pattern identifier the curve was computed from.
    pub source: String,
    /// Absolute error estimates, for quadrature-based curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimates: Option<Vec<Vec<f64>>>,
}

impl SummaryCurve {
    pub fn new(
        grid: LagGrid,
        values: Vec<Vec<f64>>,
        statistic: StatisticKind,
        source: impl Into<String>,
    ) -> Result<Self> {
        let (nu, nt) = grid.shape();
        if values.len() != nu || values.iter().any(|row| row.len() != nt) {
            return Err(Error::InvalidGrid(format!("values must be {nu}×{nt}")));
        }
        Ok(Self {
            grid,
            values,
            statistic,
            source: source.into(),
            error_estimates: None,
        })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// CSV with header `u,t,value,statistic`, spatial lag varying slowest.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,t,value,statistic\n");
        let tag = self.statistic.as_str();
        for (i, u) in self.grid.spatial_lags.iter().enumerate() {
            for (j, t) in self.grid.temporal_lags.iter().enumerate() {
                writeln!(out, "{u},{t},{},{tag}", self.values[i][j]).expect("writing to a String");
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    /// Element-wise mean of curves sharing one grid and statistic.
    pub fn mean(curves: &[SummaryCurve], source: impl Into<String>) -> Result<SummaryCurve> {
        let first = curves
            .first()
            .ok_or_else(|| Error::InvalidPattern("no curves to average".into()))?;
        if curves
            .iter()
            .any(|c| c.grid != first.grid || c.statistic != first.statistic)
        {
            return Err(Error::InvalidGrid("curves must share grid and statistic".into()));
        }
        let n = curves.len() as f64;
        let values = (0..first.values.len())
            .map(|i| {
                (0..first.values[i].len())
                    .map(|j| curves.iter().map(|c| c.values[i][j]).sum::<f64>() / n)
                    .collect()
            })
            .collect();
        SummaryCurve::new(first.grid.clone(), values, first.statistic, source)
    }
}

fn require_valid(model: &KernelModel) -> Result<()> {
    model.check_params()?;
    let report = validate_existence(model);
    if !report.valid {
        return Err(Error::InvalidModel(format!(
            "{} model does not define a DPP: φ(0,0) = {} ≥ 1",
            model.family_name(),
            report.phi_max
        )));
    }
    Ok(())
}

/// `n`-th order product density `det[C₀(x_i − x_j)]`.
///
/// Round-off can push the determinant of a nearly singular PSD matrix
/// slightly below zero; values down to `−1e−9·ρⁿ` are clamped to 0.
pub fn product_density(model: &KernelModel, points: &[SpaceTimePoint]) -> Result<f64> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Domain("product density needs at least one point".into()));
    }
    if n > MAX_PRODUCT_DENSITY_ORDER {
        return Err(Error::SizeLimit {
            max: MAX_PRODUCT_DENSITY_ORDER,
            got: n,
        });
    }
    require_valid(model)?;
    let rho = model.intensity()?;
    let mut matrix = vec![0.0; n * n];
    for i in 0..n {
        matrix[i * n + i] = rho;
        for j in 0..i {
            let (p, q) = (&points[i], &points[j]);
            let c = model.kernel_value([p.x - q.x, p.y - q.y], p.t - q.t)?;
            matrix[i * n + j] = c;
            matrix[j * n + i] = c;
        }
    }
    let det = determinant(matrix, n);
    if det >= 0.0 {
        return Ok(det);
    }
    let slack = 1e-9 * rho.powi(n as i32);
    if det >= -slack {
        warn!("clamping round-off determinant {det:e} to 0 (n = {n})");
        Ok(0.0)
    } else {
        Err(Error::NegativeDeterminant(det))
    }
}

/// Pair correlation `g(r, t) = 1 − R₀(r, t)²` for models with a closed-form
/// kernel. Exactly 0 at the origin.
pub fn pcf_value(model: &KernelModel, r: f64, t: f64) -> Result<f64> {
    if r == 0.0 && t == 0.0 {
        return Ok(0.0);
    }
    if !(r.is_finite() && r >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("lag must be finite with r ≥ 0, got ({r}, {t})")));
    }
    let t = t.abs();
    match model {
        KernelModel::SeparableGaussExp(p) => Ok(-(-2.0 * r * r / p.alpha_s - 2.0 * t / p.alpha_t).exp_m1()),
        KernelModel::MaternNonSeparable(p) => Ok(-(-4.0 * PI * (p.alpha_t * t).hypot(p.alpha_s * r)).exp_m1()),
        _ => {
            let c = model.correlation_iso(r, t)?;
            Ok((1.0 - c * c).clamp(0.0, 1.0))
        }
    }
}

fn pcf_numeric(model: &KernelModel, r: f64, t: f64, budget: &InversionGrid) -> Result<f64> {
    let KernelModel::Fuentes(p) = model else {
        return pcf_value(model, r, t);
    };
    if r == 0.0 && t == 0.0 {
        return Ok(0.0);
    }
    let rho = kernel_value_numeric(p, [0.0, 0.0], 0.0, budget)?.value;
    let c = kernel_value_numeric(p, [r, 0.0], t, budget)?.value;
    Ok((1.0 - (c / rho).powi(2)).clamp(0.0, 1.0))
}

/// Theoretical pair correlation function on `grid`.
///
/// Fuentes models without a closed-form kernel require an inversion
/// `budget`; they are evaluated through [`kernel_value_numeric`].
pub fn pcf_theoretical(model: &KernelModel, grid: &LagGrid, budget: Option<&InversionGrid>) -> Result<SummaryCurve> {
    require_valid(model)?;
    if !model.has_closed_form() && budget.is_none() {
        return Err(Error::Unsupported(
            "pair correlation of this Fuentes model needs a numeric inversion budget".into(),
        ));
    }
    let values = grid
        .spatial_lags
        .par_iter()
        .map(|&r| {
            grid.temporal_lags
                .iter()
                .map(|&t| match budget {
                    Some(b) if !model.has_closed_form() => pcf_numeric(model, r, t, b),
                    _ => pcf_value(model, r, t),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SummaryCurve::new(grid.clone(), values, StatisticKind::GTheoretical, model.to_json())
}

/// How [`kfun_theoretical`] evaluates `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMethod {
    ClosedForm,
    Quadrature,
}

/// Closed-form `K` of the separable Gaussian×exponential model:
/// `πu²t − (π α_s α_t/4)(1 − e^{−2u²/α_s})(1 − e^{−2t/α_t})`.
pub fn kfun_separable_gauss_exp(alpha_s: f64, alpha_t: f64, u: f64, t: f64) -> f64 {
    let spatial = -(-2.0 * u * u / alpha_s).exp_m1();
    let temporal = -(-2.0 * t / alpha_t).exp_m1();
    PI * u * u * t - PI * alpha_s * alpha_t / 4.0 * spatial * temporal
}

/// Space-time K-function `K(u, t) = 2π∫₀ᵗ∫₀ᵘ g(u′, t′) u′ du′ dt′`.
///
/// The quadrature path integrates every grid cell separately and sums the
/// cells cumulatively; each cell is integrated to an absolute tolerance of
/// `min(1e−10, 1e−9 × cell Poisson mass)`, so the reported error at `(u, t)`
/// stays below `1e−9·πu²t`.
pub fn kfun_theoretical(model: &KernelModel, grid: &LagGrid, method: KMethod) -> Result<SummaryCurve> {
    require_valid(model)?;
    match method {
        KMethod::ClosedForm => match model {
            KernelModel::SeparableGaussExp(p) => {
                let values = grid
                    .spatial_lags
                    .iter()
                    .map(|&u| {
                        grid.temporal_lags
                            .iter()
                            .map(|&t| kfun_separable_gauss_exp(p.alpha_s, p.alpha_t, u, t))
                            .collect()
                    })
                    .collect();
                SummaryCurve::new(grid.clone(), values, StatisticKind::KTheoretical, model.to_json())
            }
            _ => Err(Error::Unsupported(format!(
                "no closed-form K-function for the {} family; use quadrature",
                model.family_name()
            ))),
        },
        KMethod::Quadrature => kfun_quadrature(model, grid),
    }
}

fn kfun_quadrature(model: &KernelModel, grid: &LagGrid) -> Result<SummaryCurve> {
    if !model.has_closed_form() {
        return Err(Error::Unsupported(
            "K-function quadrature needs a closed-form pair correlation".into(),
        ));
    }
    let mut u_edges = vec![0.0];
    u_edges.extend(grid.spatial_lags.iter().copied().filter(|&u| u > 0.0));
    let mut t_edges = vec![0.0];
    t_edges.extend(grid.temporal_lags.iter().copied().filter(|&t| t > 0.0));
    let (nu, nt) = (u_edges.len() - 1, t_edges.len() - 1);

    let cells: Vec<(usize, usize)> = (0..nu).flat_map(|i| (0..nt).map(move |j| (i, j))).collect();
    let integrals = cells
        .par_iter()
        .map(|&(i, j)| {
            let (u0, u1) = (u_edges[i], u_edges[i + 1]);
            let (t0, t1) = (t_edges[j], t_edges[j + 1]);
            let poisson_mass = PI * (u1 * u1 - u0 * u0) * (t1 - t0);
            let cfg = QuadConfig {
                abs_tol: (1e-9 * poisson_mass).min(1e-10),
                ..QuadConfig::default()
            };
            let res = integrate_rect(
                |u, t| pcf_value(model, u, t).map_or(f64::NAN, |g| 2.0 * PI * g * u),
                (u0, u1),
                (t0, t1),
                &cfg,
            );
            if res.value.is_finite() {
                Ok((res.value, res.error))
            } else {
                Err(Error::Domain(format!(
                    "pair correlation undefined on cell [{u0}, {u1}]×[{t0}, {t1}]"
                )))
            }
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    // 2-D cumulative sums over cells, indexed by edge
    let mut k = vec![vec![0.0; nt + 1]; nu + 1];
    let mut e = vec![vec![0.0; nt + 1]; nu + 1];
    for i in 0..nu {
        for j in 0..nt {
            let (v, err) = integrals[i * nt + j];
            k[i + 1][j + 1] = v + k[i][j + 1] + k[i + 1][j] - k[i][j];
            e[i + 1][j + 1] = err + e[i][j + 1] + e[i + 1][j] - e[i][j];
        }
    }
    let index = |edges: &[f64], x: f64| edges.iter().position(|&v| v == x).expect("lag is an edge");
    let mut values = Vec::with_capacity(grid.spatial_lags.len());
    let mut errors = Vec::with_capacity(grid.spatial_lags.len());
    for &u in &grid.spatial_lags {
        let i = index(&u_edges, u);
        values.push(grid.temporal_lags.iter().map(|&t| k[i][index(&t_edges, t)]).collect());
        errors.push(
            grid.temporal_lags
                .iter()
                .map(|&t| e[i][index(&t_edges, t)].max(0.0))
                .collect(),
        );
    }
    let mut curve = SummaryCurve::new(grid.clone(), values, StatisticKind::KTheoretical, model.to_json())?;
    curve.error_estimates = Some(errors);
    Ok(curve)
}

/// Pointwise comparison `g_sep ≤ g_nonsep` of the two Matérn-type models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    /// `[spatial][temporal]` flags, true where `g_sep ≤ g_nonsep + 1e−12`.
    pub per_point: Vec<Vec<bool>>,
    pub all_ordered: bool,
    /// Largest `g_sep − g_nonsep` over the grid (≤ 0 when fully ordered).
    pub max_violation: f64,
    pub violations: usize,
}

/// Checks whether the separable Matérn model is more repulsive than the
/// non-separable one with the same `(α_s, α_t)` at every grid point.
pub fn pcf_ordering_check(
    sep: &MaternSeparableParams,
    nonsep: &MaternNonSeparableParams,
    grid: &LagGrid,
) -> Result<OrderingReport> {
    if sep.alpha_s != nonsep.alpha_s || sep.alpha_t != nonsep.alpha_t {
        return Err(Error::ParameterMismatch(format!(
            "separable (α_s, α_t) = ({}, {}) vs non-separable ({}, {})",
            sep.alpha_s, sep.alpha_t, nonsep.alpha_s, nonsep.alpha_t
        )));
    }
    let sep_model = KernelModel::MaternSeparable(*sep);
    let nonsep_model = KernelModel::MaternNonSeparable(*nonsep);
    let mut per_point = Vec::with_capacity(grid.spatial_lags.len());
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0;
    for &r in &grid.spatial_lags {
        let mut row = Vec::with_capacity(grid.temporal_lags.len());
        for &t in &grid.temporal_lags {
            let diff = pcf_value(&sep_model, r, t)? - pcf_value(&nonsep_model, r, t)?;
            max_violation = max_violation.max(diff);
            let ordered = diff <= ORDERING_TOLERANCE;
            violations += usize::from(!ordered);
            row.push(ordered);
        }
        per_point.push(row);
    }
    Ok(OrderingReport {
        per_point,
        all_ordered: violations == 0,
        max_violation,
        violations,
    })
}
