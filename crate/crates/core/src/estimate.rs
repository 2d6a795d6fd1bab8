//! Nonparametric summary statistics of observed patterns and
//! minimum-contrast fitting of the kernel families.

use std::cell::Cell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    validate_existence, KernelModel, MaternNonSeparableParams, MaternSeparableParams, SeparableGaussExpParams,
};
use crate::moments::{
    kfun_separable_gauss_exp, kfun_theoretical, pcf_value, KMethod, LagGrid, StatisticKind, SummaryCurve,
};
use crate::simulate::{PointPattern, SpaceTimePoint, Window};

/// Pair loops are split into this many chunks regardless of thread count,
/// so floating-point reductions happen in a fixed order.
const PAIR_CHUNKS: usize = 64;

/// Intensity estimate `n/|W|`.
pub fn estimate_intensity(pattern: &PointPattern) -> Result<f64> {
    let volume = pattern.window().volume();
    if volume.is_nan() || volume <= 0.0 {
        return Err(Error::InvalidWindow("window has zero volume".into()));
    }
    Ok(pattern.len() as f64 / volume)
}

fn check_grid_within(grid: &LagGrid, window: &Window) -> Result<()> {
    let half_space = 0.5 * window.x_extent.min(window.y_extent);
    let half_time = 0.5 * window.t_extent;
    if grid.max_spatial() > half_space || grid.max_temporal() > half_time {
        return Err(Error::GridExceedsWindow(format!(
            "lags up to ({}, {}) exceed half the window extents ({half_space}, {half_time})",
            grid.max_spatial(),
            grid.max_temporal()
        )));
    }
    Ok(())
}

/// Calls `visit(r, |dt|, 1/|W ∩ W_h|)` for every unordered pair with
/// `r ≤ max_r` and `|dt| ≤ max_t`, accumulating into one buffer per chunk.
fn accumulate_pairs<F>(pattern: &PointPattern, max_r: f64, max_t: f64, size: usize, visit: F) -> Vec<f64>
where
    F: Fn(f64, f64, f64, &mut [f64]) + Sync,
{
    let w = pattern.window();
    let mut pts: Vec<SpaceTimePoint> = pattern.points().to_vec();
    pts.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.x.total_cmp(&b.x)).then(a.y.total_cmp(&b.y)));
    let n = pts.len();
    let chunk = n.div_ceil(PAIR_CHUNKS).max(1);
    let partials: Vec<Vec<f64>> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(chunk)
        .map(|idx| {
            let mut acc = vec![0.0; size];
            for &i in idx {
                let p = &pts[i];
                for q in &pts[i + 1..] {
                    let dt = q.t - p.t;
                    if dt > max_t {
                        break;
                    }
                    let (dx, dy) = (q.x - p.x, q.y - p.y);
                    let r = dx.hypot(dy);
                    if r > max_r {
                        continue;
                    }
                    let overlap = (w.x_extent - dx.abs()) * (w.y_extent - dy.abs()) * (w.t_extent - dt);
                    visit(r, dt, 1.0 / overlap, &mut acc);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; size];
    for part in partials {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    total
}

/// Translation-corrected estimate of `K(u, t)`:
/// `K̂ = |W|² / (2n(n−1)) Σ_{i≠j} 1(‖u_i−u_j‖ ≤ u, |t_i−t_j| ≤ t) / |W ∩ W_{h_ij}|`.
///
/// The factor ½ matches `K(u, t) = 2π∫₀ᵗ∫₀ᵘ g u′ du′ dt′`, which counts
/// temporal lags on one side only (`πu²t` for a Poisson process).
pub fn estimate_kfun(pattern: &PointPattern, grid: &LagGrid) -> Result<SummaryCurve> {
    check_grid_within(grid, pattern.window())?;
    let (nu, nt) = grid.shape();
    let n = pattern.len();
    let source = pattern.seed_provenance().to_string();
    if n < 2 {
        return SummaryCurve::new(grid.clone(), vec![vec![0.0; nt]; nu], StatisticKind::KEmpirical, source);
    }
    let us = grid.spatial_lags();
    let ts = grid.temporal_lags();
    let bins = accumulate_pairs(
        pattern,
        grid.max_spatial(),
        grid.max_temporal(),
        nu * nt,
        |r, dt, w, acc| {
            let i = us.partition_point(|&u| u < r);
            let j = ts.partition_point(|&t| t < dt);
            acc[i * nt + j] += w;
        },
    );
    // unordered pairs count each ordered pair once, hence 2·½
    let volume = pattern.window().volume();
    let scale = volume * volume / (n as f64 * (n as f64 - 1.0));
    let mut values = vec![vec![0.0; nt]; nu];
    for i in 0..nu {
        for j in 0..nt {
            let above = if i > 0 { values[i - 1][j] } else { 0.0 };
            let left = if j > 0 { values[i][j - 1] } else { 0.0 };
            let diag = if i > 0 && j > 0 { values[i - 1][j - 1] } else { 0.0 };
            values[i][j] = bins[i * nt + j] * scale + above + left - diag;
        }
    }
    SummaryCurve::new(grid.clone(), values, StatisticKind::KEmpirical, source)
}

/// Bandwidths of the product Epanechnikov smoother used by [`estimate_pcf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSpec {
    pub spatial_bw: f64,
    pub temporal_bw: f64,
}

impl BandwidthSpec {
    pub fn new(spatial_bw: f64, temporal_bw: f64) -> Result<Self> {
        if !(spatial_bw.is_finite() && spatial_bw > 0.0 && temporal_bw.is_finite() && temporal_bw > 0.0) {
            return Err(Error::InvalidParameter {
                name: "bandwidth",
                reason: format!("must be finite and > 0, got ({spatial_bw}, {temporal_bw})"),
            });
        }
        Ok(Self {
            spatial_bw,
            temporal_bw,
        })
    }

    /// Rule of thumb `0.15·ρ̂^{−1/3}` on both axes, kept below 0.45 of the
    /// corresponding half extent.
    pub fn rule_of_thumb(pattern: &PointPattern) -> Self {
        let w = pattern.window();
        let rho = pattern.len() as f64 / w.volume();
        let base = if rho > 0.0 {
            0.15 * rho.powf(-1.0 / 3.0)
        } else {
            f64::INFINITY
        };
        let half_space = 0.5 * w.x_extent.min(w.y_extent);
        let half_time = 0.5 * w.t_extent;
        Self {
            spatial_bw: base.min(0.45 * half_space),
            temporal_bw: base.min(0.45 * half_time),
        }
    }

    fn check_for(&self, window: &Window) -> Result<()> {
        Self::new(self.spatial_bw, self.temporal_bw)?;
        let half_space = 0.5 * window.x_extent.min(window.y_extent);
        let half_time = 0.5 * window.t_extent;
        if self.spatial_bw >= half_space || self.temporal_bw >= half_time {
            return Err(Error::BandwidthTooLarge(format!(
                "bandwidths ({}, {}) must be below half the window extents ({half_space}, {half_time})",
                self.spatial_bw, self.temporal_bw
            )));
        }
        Ok(())
    }
}

fn epanechnikov(x: f64, h: f64) -> f64 {
    let z = x / h;
    if z.abs() < 1.0 {
        0.75 * (1.0 - z * z) / h
    } else {
        0.0
    }
}

/// `∫_{−∞}^{x} k_h`, the kernel mass left after truncating at a zero lag.
fn epanechnikov_cdf(x: f64, h: f64) -> f64 {
    let z = (x / h).clamp(-1.0, 1.0);
    0.5 + 0.75 * (z - z * z * z / 3.0)
}

/// Kernel estimate of the pair correlation `g(u, t)`:
/// `ĝ = Σ_{i≠j} k_s(u − r_ij) k_t(t − |dt_ij|) / (2πr_ij |W ∩ W_h|) / (2ρ̂² m_s(u) m_t(t))`
/// with `ρ̂² = n(n−1)/|W|²` and `m` the kernel mass on non-negative lags.
pub fn estimate_pcf(pattern: &PointPattern, grid: &LagGrid, bw: &BandwidthSpec) -> Result<SummaryCurve> {
    bw.check_for(pattern.window())?;
    check_grid_within(grid, pattern.window())?;
    let (nu, nt) = grid.shape();
    let n = pattern.len();
    let source = pattern.seed_provenance().to_string();
    if n < 2 {
        return SummaryCurve::new(grid.clone(), vec![vec![0.0; nt]; nu], StatisticKind::GEmpirical, source);
    }
    let (hs, ht) = (bw.spatial_bw, bw.temporal_bw);
    let us = grid.spatial_lags();
    let ts = grid.temporal_lags();
    let sums = accumulate_pairs(
        pattern,
        grid.max_spatial() + hs,
        grid.max_temporal() + ht,
        nu * nt,
        |r, dt, w, acc| {
            if r == 0.0 {
                return;
            }
            let i0 = us.partition_point(|&u| u <= r - hs);
            let i1 = us.partition_point(|&u| u < r + hs);
            let j0 = ts.partition_point(|&t| t <= dt - ht);
            let j1 = ts.partition_point(|&t| t < dt + ht);
            let base = w / (2.0 * PI * r);
            for i in i0..i1 {
                let ks = epanechnikov(us[i] - r, hs) * base;
                if ks == 0.0 {
                    continue;
                }
                for j in j0..j1 {
                    acc[i * nt + j] += ks * epanechnikov(ts[j] - dt, ht);
                }
            }
        },
    );
    let volume = pattern.window().volume();
    let rho2 = n as f64 * (n as f64 - 1.0) / (volume * volume);
    // each unordered pair stands for two ordered pairs
    let values = (0..nu)
        .map(|i| {
            let ms = epanechnikov_cdf(us[i], hs);
            (0..nt)
                .map(|j| {
                    let mt = epanechnikov_cdf(ts[j], ht);
                    2.0 * sums[i * nt + j] / (2.0 * rho2 * ms * mt)
                })
                .collect()
        })
        .collect();
    SummaryCurve::new(grid.clone(), values, StatisticKind::GEmpirical, source)
}

/// Model family selected for fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "sep_gauss_exp")]
    SeparableGaussExp,
    #[serde(rename = "matern_sep")]
    MaternSeparable,
    #[serde(rename = "matern_nonsep")]
    MaternNonSeparable,
    #[serde(rename = "fuentes")]
    Fuentes,
}

/// Summary statistic matched by the contrast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Statistic {
    #[serde(rename = "g")]
    G,
    #[default]
    #[serde(rename = "K")]
    K,
}

/// Closed intervals for the free shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub alpha_s: [f64; 2],
    pub alpha_t: [f64; 2],
}

impl ParamBounds {
    pub fn new(alpha_s: [f64; 2], alpha_t: [f64; 2]) -> Result<Self> {
        let b = Self { alpha_s, alpha_t };
        b.check()?;
        Ok(b)
    }

    fn check(&self) -> Result<()> {
        for (name, [lo, hi]) in [("alpha_s", self.alpha_s), ("alpha_t", self.alpha_t)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("bounds must satisfy 0 < lo ≤ hi < ∞, got [{lo}, {hi}]"),
                });
            }
        }
        Ok(())
    }

    /// Corners of the box.
    pub fn vertices(&self) -> [[f64; 2]; 4] {
        let [a0, a1] = self.alpha_s;
        let [b0, b1] = self.alpha_t;
        [[a0, b0], [a0, b1], [a1, b0], [a1, b1]]
    }

    pub fn geometric_center(&self) -> [f64; 2] {
        [
            (self.alpha_s[0] * self.alpha_s[1]).sqrt(),
            (self.alpha_t[0] * self.alpha_t[1]).sqrt(),
        ]
    }

    pub fn arithmetic_center(&self) -> [f64; 2] {
        [
            0.5 * (self.alpha_s[0] + self.alpha_s[1]),
            0.5 * (self.alpha_t[0] + self.alpha_t[1]),
        ]
    }
}

/// Optimizer and contrast settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Exponent `q` in `Σ (T̂^q − T^q)²`.
    pub exponent: f64,
    /// Total contrast evaluations allowed.
    pub max_evaluations: usize,
    /// Relative spread of simplex values accepted as convergence.
    pub tolerance: f64,
    /// Smoother for the `g` contrast; the rule of thumb when absent.
    pub bandwidth: Option<BandwidthSpec>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            exponent: 0.5,
            max_evaluations: 2000,
            tolerance: 1e-10,
            bandwidth: None,
        }
    }
}

/// Outcome of [`fit_min_contrast`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub model: KernelModel,
    pub alpha_s: f64,
    pub alpha_t: f64,
    /// Plug-in intensity `n/|W|` pooled over the input patterns.
    pub rho: f64,
    pub contrast: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub bounds_used: ParamBounds,
    pub statistic: Statistic,
}

/// Contrast between a pooled empirical curve and a family's theoretical
/// curve, as a function of `(α_s, α_t)` with `ρ` fixed at its estimate.
#[derive(Debug, Clone)]
pub struct ContrastProblem {
    family: Family,
    statistic: Statistic,
    grid: LagGrid,
    empirical: SummaryCurve,
    rho: f64,
    exponent: f64,
}

impl ContrastProblem {
    pub fn new(
        patterns: &[PointPattern],
        family: Family,
        statistic: Statistic,
        grid: &LagGrid,
        options: &FitOptions,
    ) -> Result<Self> {
        if family == Family::Fuentes {
            return Err(Error::Unsupported(
                "fitting the general Fuentes family is not supported; use matern_sep or matern_nonsep".into(),
            ));
        }
        if patterns.is_empty() {
            return Err(Error::InvalidPattern("no patterns to fit".into()));
        }
        if !(options.exponent.is_finite() && options.exponent > 0.0) {
            return Err(Error::InvalidParameter {
                name: "exponent",
                reason: format!("must be finite and > 0, got {}", options.exponent),
            });
        }
        let curves = patterns
            .iter()
            .map(|p| match statistic {
                Statistic::K => estimate_kfun(p, grid),
                Statistic::G => {
                    let bw = options.bandwidth.unwrap_or_else(|| BandwidthSpec::rule_of_thumb(p));
                    estimate_pcf(p, grid, &bw)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let empirical = SummaryCurve::mean(&curves, format!("mean of {} patterns", patterns.len()))?;
        let points: usize = patterns.iter().map(PointPattern::len).sum();
        let volume: f64 = patterns.iter().map(|p| p.window().volume()).sum();
        let rho = points as f64 / volume;
        if rho.is_nan() || rho <= 0.0 {
            return Err(Error::InvalidPattern("patterns contain no points".into()));
        }
        Ok(Self {
            family,
            statistic,
            grid: grid.clone(),
            empirical,
            rho,
            exponent: options.exponent,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn empirical(&self) -> &SummaryCurve {
        &self.empirical
    }

    /// The family member with intensity `ρ̂` and the given shape.
    pub fn model(&self, alpha_s: f64, alpha_t: f64) -> Result<KernelModel> {
        Ok(match self.family {
            Family::SeparableGaussExp => KernelModel::SeparableGaussExp(SeparableGaussExpParams::with_unit_variances(
                self.rho, alpha_s, alpha_t,
            )?),
            Family::MaternSeparable => {
                KernelModel::MaternSeparable(MaternSeparableParams::from_intensity(self.rho, alpha_s, alpha_t)?)
            }
            Family::MaternNonSeparable => {
                KernelModel::MaternNonSeparable(MaternNonSeparableParams::from_intensity(self.rho, alpha_s, alpha_t)?)
            }
            Family::Fuentes => unreachable!("rejected in ContrastProblem::new"),
        })
    }

    fn theoretical(&self, model: &KernelModel) -> Result<Vec<Vec<f64>>> {
        let us = self.grid.spatial_lags();
        let ts = self.grid.temporal_lags();
        match (self.statistic, model) {
            (Statistic::K, KernelModel::SeparableGaussExp(p)) => Ok(us
                .iter()
                .map(|&u| {
                    ts.iter()
                        .map(|&t| kfun_separable_gauss_exp(p.alpha_s, p.alpha_t, u, t))
                        .collect()
                })
                .collect()),
            (Statistic::K, _) => Ok(kfun_theoretical(model, &self.grid, KMethod::Quadrature)?.values),
            (Statistic::G, _) => us
                .iter()
                .map(|&u| ts.iter().map(|&t| pcf_value(model, u, t)).collect())
                .collect(),
        }
    }

    /// `Σ (T̂^q − T^q)²` over the grid; `+∞` when no valid model exists at
    /// `(α_s, α_t)`.
    pub fn evaluate(&self, alpha_s: f64, alpha_t: f64) -> f64 {
        let Ok(model) = self.model(alpha_s, alpha_t) else {
            return f64::INFINITY;
        };
        if !validate_existence(&model).valid {
            return f64::INFINITY;
        }
        let Ok(theory) = self.theoretical(&model) else {
            return f64::INFINITY;
        };
        let q = self.exponent;
        self.empirical
            .values
            .iter()
            .flatten()
            .zip(theory.iter().flatten())
            .map(|(&e, &t)| (e.max(0.0).powf(q) - t.max(0.0).powf(q)).powi(2))
            .sum()
    }

    /// Minimizes the contrast over `bounds`.
    pub fn fit(&self, bounds: &ParamBounds, options: &FitOptions) -> Result<FitResult> {
        bounds.check()?;
        if !bounds.vertices().iter().any(|v| self.evaluate(v[0], v[1]).is_finite()) {
            return Err(Error::InfeasibleBounds);
        }
        let map = BoxMap::new(bounds);
        let evaluations = Cell::new(0usize);
        let mut objective = |z: &[f64]| {
            evaluations.set(evaluations.get() + 1);
            let a = map.to_params(z);
            self.evaluate(a[0], a[1])
        };

        let dim = map.free.len();
        let (best_params, best_value, iterations, converged) = if dim == 0 {
            let a = map.to_params(&[]);
            (a, self.evaluate(a[0], a[1]), 0, true)
        } else {
            let start = self.feasible_start(&map);
            let budget = options.max_evaluations.max(dim + 2);
            let first = nelder_mead(&mut objective, &start, 1.0, options.tolerance, budget);
            let mut iterations = first.iterations;
            let mut best = first;
            // restart around the best point with a fresh simplex
            let used = evaluations.get();
            if used < budget {
                let again = nelder_mead(&mut objective, &best.point, 0.5, options.tolerance, budget - used);
                iterations += again.iterations;
                let converged = again.converged;
                if again.value <= best.value {
                    best = again;
                }
                best.converged = converged;
            }
            (map.to_params(&best.point), best.value, iterations, best.converged)
        };
        let evaluations = evaluations.get();

        // sanity sweep over the box corners and centres
        let mut best = (best_params, best_value);
        let mut extra = 0;
        for cand in bounds
            .vertices()
            .into_iter()
            .chain([bounds.geometric_center(), bounds.arithmetic_center()])
        {
            extra += 1;
            let v = self.evaluate(cand[0], cand[1]);
            if v < best.1 {
                best = (cand, v);
            }
        }
        let ([alpha_s, alpha_t], contrast) = best;
        Ok(FitResult {
            family: self.family,
            model: self.model(alpha_s, alpha_t)?,
            alpha_s,
            alpha_t,
            rho: self.rho,
            contrast,
            iterations,
            evaluations: evaluations + extra,
            converged,
            bounds_used: *bounds,
            statistic: self.statistic,
        })
    }

    /// The box centre if feasible, otherwise the best feasible point of a
    /// 9×9 lattice in the transformed coordinates.
    fn feasible_start(&self, map: &BoxMap) -> Vec<f64> {
        let centre = vec![0.0; map.free.len()];
        let c = map.to_params(&centre);
        if self.evaluate(c[0], c[1]).is_finite() {
            return centre;
        }
        let levels: Vec<f64> = (1..=9).map(|i| logit(i as f64 / 10.0)).collect();
        let mut best = (centre, f64::INFINITY);
        let mut consider = |z: Vec<f64>| {
            let a = map.to_params(&z);
            let v = self.evaluate(a[0], a[1]);
            if v < best.1 {
                best = (z, v);
            }
        };
        match map.free.len() {
            1 => levels.iter().for_each(|&a| consider(vec![a])),
            _ => {
                for &a in &levels {
                    for &b in &levels {
                        consider(vec![a, b]);
                    }
                }
            }
        }
        best.0
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Unconstrained coordinates for the box: each free parameter is
/// `exp(log lo + (log hi − log lo)·σ(z))`.
struct BoxMap {
    log_lo: [f64; 2],
    log_hi: [f64; 2],
    free: Vec<usize>,
}

impl BoxMap {
    fn new(bounds: &ParamBounds) -> Self {
        let log_lo = [bounds.alpha_s[0].ln(), bounds.alpha_t[0].ln()];
        let log_hi = [bounds.alpha_s[1].ln(), bounds.alpha_t[1].ln()];
        let free = (0..2).filter(|&i| log_hi[i] > log_lo[i]).collect();
        Self { log_lo, log_hi, free }
    }

    fn to_params(&self, z: &[f64]) -> [f64; 2] {
        let mut out = [self.log_lo[0].exp(), self.log_lo[1].exp()];
        for (&i, &zi) in self.free.iter().zip(z) {
            out[i] = (self.log_lo[i] + (self.log_hi[i] - self.log_lo[i]) * sigmoid(zi)).exp();
        }
        out
    }
}

struct Minimum {
    point: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Nelder–Mead simplex search with standard coefficients.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: &mut F, start: &[f64], step: f64, tol: f64, budget: usize) -> Minimum {
    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = dim + 1;
    let mut iterations = 0;
    let mut converged = false;
    while evals < budget {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[dim]);
        let size = simplex[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if best.is_finite() && (worst - best).abs() <= tol * (best.abs() + 1e-300) + 1e-300 && size < 1e-4 {
            converged = true;
            break;
        }
        if size < 1e-12 {
            converged = best.is_finite();
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|p| p[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + coef * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[dim] {
            let p = along(-0.5);
            let v = f(&p);
            (p, v)
        } else {
            let p = along(0.5);
            let v = f(&p);
            (p, v)
        };
        evals += 1;
        if fc < values[dim].min(fr) {
            simplex[dim] = contracted;
            values[dim] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=dim {
            let p: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            values[i] = f(&p);
            simplex[i] = p;
            evals += 1;
        }
    }
    let i = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty simplex");
    Minimum {
        point: simplex[i].clone(),
        value: values[i],
        iterations,
        converged,
    }
}

/// Minimum-contrast fit of `family` to the pooled summary statistic of
/// `patterns`, with `ρ` fixed at the pooled estimate `n/|W|` and the shape
/// `(α_s, α_t)` searched inside `bounds`.
pub fn fit_min_contrast(
    patterns: &[PointPattern],
    family: Family,
    bounds: &ParamBounds,
    statistic: Statistic,
    grid: &LagGrid,
    options: &FitOptions,
) -> Result<FitResult> {
    ContrastProblem::new(patterns, family, statistic, grid, options)?.fit(bounds, options)
}
