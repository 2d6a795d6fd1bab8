//! Adaptive Gauss–Kronrod quadrature (7/15-point pair) in one and two
//! dimensions.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae on [0, 1]; the odd-indexed ones are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// Integral of |f|, used for relative tolerances.
    pub abs_value: f64,
    /// Number of panels in the final partition.
    pub panels: usize,
    pub converged: bool,
}

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Number of equal panels in the starting partition.
    pub initial_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_panels: 1 << 14,
            initial_panels: 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Single 15-point Kronrod panel with the embedded 7-point Gauss error estimate.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error, abs_sum * half.abs())
}

fn make_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let (value, error, abs_value) = gauss_kronrod(f, a, b);
    Panel {
        a,
        b,
        value,
        error,
        abs_value,
    }
}

/// Globally adaptive integration of `f` over `[a, b]`, bisecting the panel
/// with the largest error estimate until `error ≤ max(abs_tol, rel_tol·∫|f|)`
/// or the panel budget is exhausted.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            abs_value: 0.0,
            panels: 0,
            converged: true,
        };
    }
    let n0 = cfg.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(n0 * 2);
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        heap.push(make_panel(&mut f, lo, hi));
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.value, acc.1 + p.error, acc.2 + p.abs_value)
        })
    };
    let (_, mut error, mut abs_value) = totals(&heap);
    let mut converged = error <= cfg.abs_tol.max(cfg.rel_tol * abs_value);
    while !converged && heap.len() < cfg.max_panels.max(n0) {
        let worst = heap.pop().expect("non-empty partition");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel can no longer be split in floating point
            heap.push(worst);
            break;
        }
        let left = make_panel(&mut f, worst.a, mid);
        let right = make_panel(&mut f, mid, worst.b);
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        // re-sum periodically to avoid drift in the running totals
        if heap.len() % 256 == 0 {
            (_, error, abs_value) = totals(&heap);
        }
        converged = error <= cfg.abs_tol.max(cfg.rel_tol * abs_value);
    }
    let (value, error, abs_value) = totals(&heap);
    QuadResult {
        value,
        error,
        abs_value,
        panels: heap.len(),
        converged: converged || error <= cfg.abs_tol.max(cfg.rel_tol * abs_value),
    }
}

/// Nested adaptive integration of `f(x, y)` over `[x0, x1] × [y0, y1]`.
///
/// The outer integral runs over `y`; every outer node triggers an inner
/// adaptive integral over `x`. The reported error adds the outer estimate to
/// the integrated inner error estimates. `panels` counts inner and outer
/// panels and is capped by `cfg.max_panels`.
pub fn integrate_rect<F: Fn(f64, f64) -> f64>(
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    cfg: &QuadConfig,
) -> QuadResult {
    let mut inner_error = 0.0;
    let mut inner_panels = 0usize;
    let mut all_converged = true;
    let inner_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / (10.0 * (y1 - y0).abs().max(1e-300)),
        rel_tol: cfg.rel_tol * 0.1,
        max_panels: (cfg.max_panels / 16).max(16),
        initial_panels: 1,
    };
    let outer_cfg = QuadConfig {
        abs_tol: 0.5 * cfg.abs_tol,
        rel_tol: 0.5 * cfg.rel_tol,
        ..*cfg
    };
    let outer = integrate(
        |y| {
            let r = integrate(|x| f(x, y), x0, x1, &inner_cfg);
            // weight-free bound: the error at this node scales with the outer panel width
            inner_error = f64::max(inner_error, r.error);
            inner_panels += r.panels;
            all_converged &= r.converged;
            r.value
        },
        y0,
        y1,
        &outer_cfg,
    );
    let error = outer.error + inner_error * (y1 - y0).abs();
    QuadResult {
        value: outer.value,
        error,
        abs_value: outer.abs_value,
        panels: outer.panels + inner_panels / 15,
        converged: outer.converged && all_converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_22() {
        for k in 0..=22 {
            let (v, _, _) = gauss_kronrod(&mut |x: f64| x.powi(k), 0.0, 1.0);
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((v - exact).abs() < 1e-15, "degree {k}: {v} vs {exact}");
        }
    }

    #[test]
    fn embedded_gauss_rule_is_exact_for_degree_13() {
        // the error estimate is |K - G|, which must vanish when both are exact
        for k in 0..=13 {
            let (v, e, _) = gauss_kronrod(&mut |x: f64| x.powi(k), -1.0, 2.0);
            assert!(e < 1e-14 * v.abs().max(1.0), "degree {k}: error {e}");
        }
        let (_, e, _) = gauss_kronrod(&mut |x: f64| x.powi(16), -1.0, 2.0);
        assert!(e > 1e-6);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x: f64| x.sqrt().ln(), 0.0, 1.0, &QuadConfig::default());
        assert!((r.value + 0.5).abs() < 1e-10, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn oscillatory_with_initial_partition() {
        let cfg = QuadConfig {
            initial_panels: 64,
            abs_tol: 1e-12,
            ..QuadConfig::default()
        };
        let r = integrate(|x: f64| (40.0 * x).cos(), 0.0, 10.0, &cfg);
        assert!((r.value - (400.0f64).sin() / 40.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_integral() {
        let r = integrate_rect(
            |x, y| x * (-(x * x) - y).exp(),
            (0.0, 1.0),
            (0.0, 2.0),
            &QuadConfig::default(),
        );
        let exact = 0.5 * (1.0 - (-1.0f64).exp()) * (1.0 - (-2.0f64).exp());
        assert!((r.value - exact).abs() < 1e-12);
        assert!(r.error < 1e-9);
    }
}
