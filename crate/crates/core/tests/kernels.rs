use proptest::prelude::*;
use stdpp::{
    product_density, validate_existence, KernelModel, MaternNonSeparableParams, MaternSeparableParams,
    SeparableGaussExpParams, SpaceTimePoint,
};

/// A valid model of one of the closed-form families, at `fraction` of its
/// largest admissible intensity.
fn model(family: u8, alpha_s: f64, alpha_t: f64, fraction: f64) -> KernelModel {
    match family {
        0 => {
            let rho_max = 1.0 / (2.0 * std::f64::consts::PI * alpha_s * alpha_s * alpha_t);
            KernelModel::SeparableGaussExp(
                SeparableGaussExpParams::with_unit_variances(fraction * rho_max, alpha_s, alpha_t).unwrap(),
            )
        }
        1 => {
            let gamma = fraction * (alpha_s * alpha_t).powi(4);
            KernelModel::MaternSeparable(MaternSeparableParams::new(gamma, alpha_s, alpha_t).unwrap())
        }
        _ => {
            let gamma = fraction * (alpha_s * alpha_t).powi(4);
            KernelModel::MaternNonSeparable(MaternNonSeparableParams::new(gamma, alpha_s, alpha_t).unwrap())
        }
    }
}

fn any_model() -> impl Strategy<Value = KernelModel> {
    (0u8..3, 0.3f64..3.0, 0.3f64..3.0, 0.05f64..0.95).prop_map(|(f, a, b, c)| model(f, a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernel_is_even_and_bounded_by_origin(m in any_model(), ux in -3.0f64..3.0, uy in -3.0f64..3.0, t in -3.0f64..3.0) {
        let c0 = m.kernel_value([0.0, 0.0], 0.0).unwrap();
        let c = m.kernel_value([ux, uy], t).unwrap();
        let mirrored = m.kernel_value([-ux, -uy], -t).unwrap();
        prop_assert_eq!(c, mirrored);
        prop_assert!(c.abs() <= c0 * (1.0 + 1e-14));
        let iso = m.kernel_iso(ux.hypot(uy), t).unwrap();
        prop_assert!((iso - c).abs() <= 1e-14 * c0);
    }

    #[test]
    fn spectral_density_peaks_at_origin(m in any_model(), wx in -2.0f64..2.0, wy in -2.0f64..2.0, tau in -2.0f64..2.0) {
        let peak = m.spectral_density([0.0, 0.0], 0.0).unwrap();
        let phi = m.spectral_density([wx, wy], tau).unwrap();
        prop_assert!(phi >= 0.0);
        prop_assert!(phi <= peak * (1.0 + 1e-14));
        prop_assert!(peak < 1.0);
    }

    #[test]
    fn product_densities_are_nonnegative(m in any_model(), coords in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0, 0.0f64..2.0), 1..7)) {
        let points: Vec<SpaceTimePoint> = coords.iter().map(|&(x, y, t)| SpaceTimePoint::new(x, y, t)).collect();
        let rho = m.intensity().unwrap();
        let value = product_density(&m, &points).unwrap();
        prop_assert!(value >= -1e-9 * rho.powi(points.len() as i32));
        // Hadamard's inequality for a positive semidefinite matrix.
        prop_assert!(value <= rho.powi(points.len() as i32) * (1.0 + 1e-12));
    }

    #[test]
    fn models_survive_json(m in any_model()) {
        let back = KernelModel::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn validity_switches_at_rho_max() {
    for family in 0..3 {
        let below = validate_existence(&model(family, 1.3, 0.7, 0.999));
        assert!(below.valid);
        assert!(below.rho < below.rho_max);
        assert!(below.phi_max < 1.0);
    }
    let at = SeparableGaussExpParams::with_unit_variances(1.0 / (2.0 * std::f64::consts::PI), 1.0, 1.0).unwrap();
    let report = validate_existence(&KernelModel::SeparableGaussExp(at));
    assert!(!report.valid);
    assert!((report.phi_max - 1.0).abs() < 1e-12);
}

#[test]
fn two_point_density_matches_pair_correlation() {
    let m = model(2, 1.1, 0.8, 0.6);
    let rho = m.intensity().unwrap();
    let p = SpaceTimePoint::new(0.2, 0.1, 0.3);
    let q = SpaceTimePoint::new(0.5, 0.5, 0.6);
    let single = product_density(&m, &[p]).unwrap();
    assert!((single - rho).abs() < 1e-15 * rho);
    let pair = product_density(&m, &[p, q]).unwrap();
    let g = stdpp::pcf_value(&m, 0.5, 0.3).unwrap();
    assert!((pair - rho * rho * g).abs() < 1e-13 * rho * rho);
}

#[test]
fn malformed_model_json_is_a_parse_error() {
    let err = KernelModel::from_json(r#"{"family": "sep_gauss_exp", "rho": 0.1, "alpha_s": 1}"#).unwrap_err();
    assert!(matches!(err, stdpp::Error::Parse { .. }), "{err}");
    let err = KernelModel::from_json(r#"{"family": "cauchy", "rho": 0.1}"#).unwrap_err();
    assert!(matches!(err, stdpp::Error::Parse { .. }), "{err}");
}
