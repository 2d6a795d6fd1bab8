//! Spectral simulation of stationary STDPPs on a space-time box, and a
//! homogeneous Poisson baseline.
//!
//! The kernel is periodized on a box enlarged by a padding fraction. Its
//! eigenvalues are then `λ_k = φ(k₁/L₁, k₂/L₂, k₃/T)` with Fourier
//! eigenfunctions. A realization selects each mode with probability `λ_k`
//! and samples the resulting projection DPP point by point, each point drawn
//! by rejection from the conditional density given the points placed so far.
//! Points outside the requested window are dropped.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{validate_existence, KernelModel};
use crate::quad::{integrate, integrate_rect, QuadConfig};
use crate::rng::stream_rng;

/// Largest number of lattice modes [`build_spectral_approx`] will enumerate.
pub const MAX_MODES: usize = 50_000_000;

/// Rejection proposals allowed per accepted point, per selected mode.
pub const PROPOSALS_PER_MODE: usize = 500;

/// A planar location with an event time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }
}

/// Observation box `[x₀, x₀+L₁] × [y₀, y₀+L₂] × [t₀, t₀+T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_extent: f64,
    pub y_extent: f64,
    pub t_extent: f64,
    #[serde(default)]
    pub origin: [f64; 3],
}

impl Window {
    /// Box anchored at the origin.
    pub fn new(x_extent: f64, y_extent: f64, t_extent: f64) -> Result<Self> {
        Self::with_origin(x_extent, y_extent, t_extent, [0.0; 3])
    }

    pub fn with_origin(x_extent: f64, y_extent: f64, t_extent: f64, origin: [f64; 3]) -> Result<Self> {
        let w = Self {
            x_extent,
            y_extent,
            t_extent,
            origin,
        };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<()> {
        let ok = [self.x_extent, self.y_extent, self.t_extent]
            .iter()
            .all(|e| e.is_finite() && *e > 0.0)
            && self.origin.iter().all(|o| o.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidWindow(format!(
                "extents must be finite and > 0, got {} × {} × {}",
                self.x_extent, self.y_extent, self.t_extent
            )))
        }
    }

    pub fn extents(&self) -> [f64; 3] {
        [self.x_extent, self.y_extent, self.t_extent]
    }

    pub fn volume(&self) -> f64 {
        self.x_extent * self.y_extent * self.t_extent
    }

    pub fn contains(&self, p: &SpaceTimePoint) -> bool {
        let e = self.extents();
        [p.x, p.y, p.t]
            .iter()
            .zip(self.origin.iter().zip(e.iter()))
            .all(|(&v, (&o, &l))| v >= o && v <= o + l)
    }

    /// The same box grown by `fraction` of each extent, keeping the centre.
    pub fn padded(&self, fraction: f64) -> Window {
        let e = self.extents();
        let grow = |i: usize| e[i] * fraction;
        Window {
            x_extent: e[0] + grow(0),
            y_extent: e[1] + grow(1),
            t_extent: e[2] + grow(2),
            origin: [
                self.origin[0] - 0.5 * grow(0),
                self.origin[1] - 0.5 * grow(1),
                self.origin[2] - 0.5 * grow(2),
            ],
        }
    }
}

/// A finite point configuration observed in a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    points: Vec<SpaceTimePoint>,
    window: Window,
    seed_provenance: String,
}

impl PointPattern {
    /// Validates that every point is finite, inside the window, and distinct.
    pub fn new(points: Vec<SpaceTimePoint>, window: Window, seed_provenance: impl Into<String>) -> Result<Self> {
        window.check()?;
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.t.is_finite()) {
                return Err(Error::InvalidPattern(format!("point {i} has a non-finite coordinate")));
            }
            if !window.contains(p) {
                return Err(Error::InvalidPattern(format!(
                    "point {i} ({}, {}, {}) lies outside the window",
                    p.x, p.y, p.t
                )));
            }
        }
        let mut sorted: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.y, p.t]).collect();
        sorted.sort_by(|a, b| {
            a[0].total_cmp(&b[0])
                .then(a[1].total_cmp(&b[1]))
                .then(a[2].total_cmp(&b[2]))
        });
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPattern("pattern contains duplicate points".into()));
        }
        Ok(Self {
            points,
            window,
            seed_provenance: seed_provenance.into(),
        })
    }

    pub fn points(&self) -> &[SpaceTimePoint] {
        &self.points
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn seed_provenance(&self) -> &str {
        &self.seed_provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `x,y,t`; values use the shortest exact decimal form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,t\n");
        for p in &self.points {
            writeln!(out, "{},{},{}", p.x, p.y, p.t).expect("writing to a String");
        }
        out
    }

    /// Parses the CSV written by [`PointPattern::to_csv`].
    pub fn from_csv(text: &str, window: Window, provenance: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "x,y,t" => {}
            Some((_, header)) => {
                return Err(Error::Parse {
                    line: 1,
                    reason: format!("expected header \"x,y,t\", found {header:?}"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    reason: "missing header \"x,y,t\"".into(),
                })
            }
        }
        let mut points = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let mut coords = [0.0; 3];
            for (c, f) in coords.iter_mut().zip(&fields) {
                *c = f.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    reason: format!("{f:?}: {e}"),
                })?;
                if !c.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        reason: format!("non-finite coordinate {f:?}"),
                    });
                }
            }
            points.push(SpaceTimePoint::new(coords[0], coords[1], coords[2]));
        }
        Self::new(points, window, provenance)
    }
}

/// Settings for [`build_spectral_approx`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    /// Largest `|k|` per axis `(x, y, t)`.
    pub cutoff: [u32; 3],
    /// Largest admissible fraction of spectral mass outside the mode box.
    pub tolerance: f64,
    /// Fractional enlargement of each extent before periodization.
    pub padding: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            cutoff: [48, 48, 48],
            tolerance: 1e-3,
            padding: 0.2,
        }
    }
}

/// Truncated lattice spectrum of a periodized kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralApproximation {
    /// Modes with non-zero inclusion probability.
    pub modes: Vec<[i32; 3]>,
    /// Bernoulli inclusion probabilities `λ_k`, aligned with `modes`.
    pub probabilities: Vec<f64>,
    /// Fraction of the spectral mass outside the mode box.
    pub truncation_mass: f64,
    pub model: KernelModel,
    /// Requested observation window.
    pub window: Window,
    /// Enlarged box the kernel is periodized on.
    pub simulation_window: Window,
    pub config: SpectralConfig,
}

impl SpectralApproximation {
    /// `Σ λ_k`, the expected number of points in the simulation box.
    pub fn expected_modes(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Expected number of points in the observation window.
    pub fn expected_count(&self) -> f64 {
        self.expected_modes() * self.window.volume() / self.simulation_window.volume()
    }

    /// `Σ λ_k²`; `Σλ − Σλ²` is the variance of the number of selected modes.
    pub fn sum_squared_probabilities(&self) -> f64 {
        self.probabilities.iter().map(|l| l * l).sum()
    }
}

/// Fraction of `∫φ` lying outside `[−a₁, a₁] × [−a₂, a₂] × [−a₃, a₃]`.
fn tail_fraction(model: &KernelModel, half_widths: [f64; 3], total: f64) -> f64 {
    let cfg = QuadConfig {
        abs_tol: 1e-10 * total,
        rel_tol: 1e-10,
        max_panels: 1 << 12,
        initial_panels: 4,
    };
    let inner = QuadConfig {
        abs_tol: 1e-11 * total,
        ..cfg
    };
    let inside = integrate(
        |tau| {
            integrate_rect(
                |w1, w2| model.spectral_density_sq(w1 * w1 + w2 * w2, tau),
                (0.0, half_widths[0]),
                (0.0, half_widths[1]),
                &inner,
            )
            .value
        },
        0.0,
        half_widths[2],
        &cfg,
    )
    .value
        * 8.0;
    (1.0 - inside / total).max(0.0)
}

/// Lattice spectral approximation of `model` for simulation on `window`.
pub fn build_spectral_approx(
    model: &KernelModel,
    window: &Window,
    config: &SpectralConfig,
) -> Result<SpectralApproximation> {
    window.check()?;
    model.check_params()?;
    let report = validate_existence(model);
    if !report.valid {
        return Err(Error::InvalidModel(format!(
            "{} model does not define a DPP: φ(0,0) = {} ≥ 1",
            model.family_name(),
            report.phi_max
        )));
    }
    if config.cutoff.contains(&0) {
        return Err(Error::InvalidParameter {
            name: "cutoff",
            reason: "must be ≥ 1 on every axis".into(),
        });
    }
    if !(config.tolerance > 0.0 && config.tolerance < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            reason: format!("must lie in (0, 1), got {}", config.tolerance),
        });
    }
    if !(config.padding.is_finite() && config.padding >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "padding",
            reason: format!("must be finite and ≥ 0, got {}", config.padding),
        });
    }
    let n_modes: usize = config.cutoff.iter().map(|&c| 2 * c as usize + 1).product();
    if n_modes > MAX_MODES {
        return Err(Error::SizeLimit {
            max: MAX_MODES,
            got: n_modes,
        });
    }
    let sim = window.padded(config.padding);
    let extents = sim.extents();

    let total = model.intensity()?;
    let half_widths = [0, 1, 2].map(|i| (config.cutoff[i] as f64 + 0.5) / extents[i]);
    let truncation_mass = tail_fraction(model, half_widths, total);
    if truncation_mass > config.tolerance {
        return Err(Error::Truncation {
            mass: truncation_mass,
            tolerance: config.tolerance,
            suggested: config.cutoff.map(|c| c.saturating_mul(2)),
        });
    }

    let c = config.cutoff.map(|c| c as i32);
    let slices: Vec<(Vec<[i32; 3]>, Vec<f64>)> = (-c[2]..=c[2])
        .into_par_iter()
        .map(|k3| {
            let tau = k3 as f64 / extents[2];
            let mut modes = Vec::new();
            let mut probs = Vec::new();
            for k1 in -c[0]..=c[0] {
                let w1 = k1 as f64 / extents[0];
                for k2 in -c[1]..=c[1] {
                    let w2 = k2 as f64 / extents[1];
                    let lambda = model.spectral_density_sq(w1 * w1 + w2 * w2, tau);
                    if lambda > 0.0 {
                        modes.push([k1, k2, k3]);
                        probs.push(lambda);
                    }
                }
            }
            (modes, probs)
        })
        .collect();
    let mut modes = Vec::new();
    let mut probabilities = Vec::new();
    for (m, p) in slices {
        modes.extend(m);
        probabilities.extend(p);
    }
    Ok(SpectralApproximation {
        modes,
        probabilities,
        truncation_mass,
        model: *model,
        window: *window,
        simulation_window: sim,
        config: *config,
    })
}

/// Orthonormalized eigenfunction values at the points placed so far.
struct Projection {
    n: usize,
    /// Orthonormal vectors in `ℂⁿ`, stored as separate real/imaginary parts.
    basis_re: Vec<Vec<f64>>,
    basis_im: Vec<Vec<f64>>,
}

impl Projection {
    /// `Σ_j |⟨v_j, e⟩|²` together with the coefficients `⟨v_j, e⟩`.
    fn project(&self, e_re: &[f64], e_im: &[f64], coef: &mut Vec<(f64, f64)>) -> f64 {
        coef.clear();
        let mut norm = 0.0;
        for (vr, vi) in self.basis_re.iter().zip(&self.basis_im) {
            // ⟨v, e⟩ = Σ conj(v_k) e_k
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..self.n {
                re += vr[k] * e_re[k] + vi[k] * e_im[k];
                im += vr[k] * e_im[k] - vi[k] * e_re[k];
            }
            norm += re * re + im * im;
            coef.push((re, im));
        }
        norm
    }

    fn push(&mut self, e_re: &[f64], e_im: &[f64], coef: &[(f64, f64)]) {
        let mut wr = e_re.to_vec();
        let mut wi = e_im.to_vec();
        for ((vr, vi), &(cr, ci)) in self.basis_re.iter().zip(&self.basis_im).zip(coef) {
            for k in 0..self.n {
                // w −= c·v
                wr[k] -= cr * vr[k] - ci * vi[k];
                wi[k] -= cr * vi[k] + ci * vr[k];
            }
        }
        let norm = wr.iter().chain(&wi).map(|v| v * v).sum::<f64>().sqrt();
        wr.iter_mut().chain(wi.iter_mut()).for_each(|v| *v /= norm);
        self.basis_re.push(wr);
        self.basis_im.push(wi);
    }
}

fn sample_projection<R: Rng>(modes: &[[i32; 3]], sim: &Window, rng: &mut R) -> Result<Vec<SpaceTimePoint>> {
    let n = modes.len();
    let extents = sim.extents();
    let mut proj = Projection {
        n,
        basis_re: Vec::with_capacity(n),
        basis_im: Vec::with_capacity(n),
    };
    let mut points = Vec::with_capacity(n);
    let mut e_re = vec![0.0; n];
    let mut e_im = vec![0.0; n];
    let mut coef = Vec::with_capacity(n);
    let budget = PROPOSALS_PER_MODE * n;
    for point in 0..n {
        let mut accepted = false;
        for _ in 0..budget {
            let x = [0, 1, 2].map(|i| rng.gen::<f64>() * extents[i]);
            for (k, m) in modes.iter().enumerate() {
                let phase = 2.0
                    * PI
                    * (m[0] as f64 * x[0] / extents[0]
                        + m[1] as f64 * x[1] / extents[1]
                        + m[2] as f64 * x[2] / extents[2]);
                let (s, c) = phase.sin_cos();
                e_re[k] = c;
                e_im[k] = s;
            }
            let captured = proj.project(&e_re, &e_im, &mut coef);
            let accept = (n as f64 - captured) / n as f64;
            if rng.gen::<f64>() < accept {
                proj.push(&e_re, &e_im, &coef);
                points.push(SpaceTimePoint::new(
                    sim.origin[0] + x[0],
                    sim.origin[1] + x[1],
                    sim.origin[2] + x[2],
                ));
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::RejectionBudget { budget, point });
        }
    }
    Ok(points)
}

/// One realization for replicate stream `replicate` of a run seeded with `seed`.
pub fn sample_stdpp_replicate(approx: &SpectralApproximation, seed: u64, replicate: u64) -> Result<PointPattern> {
    let mut rng = stream_rng(seed, replicate);
    let selected: Vec<[i32; 3]> = approx
        .modes
        .iter()
        .zip(&approx.probabilities)
        .filter_map(|(m, &p)| (rng.gen::<f64>() < p).then_some(*m))
        .collect();
    let points = sample_projection(&selected, &approx.simulation_window, &mut rng)?;
    let window = approx.window;
    let kept = points.into_iter().filter(|p| window.contains(p)).collect();
    PointPattern::new(kept, window, format!("stdpp seed={seed} stream={replicate}"))
}

/// One realization on `window`, which must be the window `approx` was built for.
pub fn sample_stdpp(approx: &SpectralApproximation, window: &Window, seed: u64) -> Result<PointPattern> {
    if *window != approx.window {
        return Err(Error::InvalidWindow(
            "window differs from the one the spectral approximation was built for".into(),
        ));
    }
    sample_stdpp_replicate(approx, seed, 0)
}

/// Homogeneous Poisson process for replicate stream `replicate`.
pub fn sample_poisson_replicate(rho: f64, window: &Window, seed: u64, replicate: u64) -> Result<PointPattern> {
    window.check()?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("must be finite and > 0, got {rho}"),
        });
    }
    let mut rng = stream_rng(seed, replicate);
    let mean = rho * window.volume();
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter {
            name: "rho",
            reason: format!("Poisson mean {mean}: {e}"),
        })?
        .sample(&mut rng) as usize;
    let e = window.extents();
    let points = (0..count)
        .map(|_| {
            SpaceTimePoint::new(
                window.origin[0] + rng.gen::<f64>() * e[0],
                window.origin[1] + rng.gen::<f64>() * e[1],
                window.origin[2] + rng.gen::<f64>() * e[2],
            )
        })
        .collect();
    PointPattern::new(points, *window, format!("poisson seed={seed} stream={replicate}"))
}

/// Homogeneous Poisson process with intensity `rho` on `window`.
pub fn sample_poisson(rho: f64, window: &Window, seed: u64) -> Result<PointPattern> {
    sample_poisson_replicate(rho, window, seed, 0)
}
