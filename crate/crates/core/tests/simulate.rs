use stdpp::{
    build_spectral_approx, sample_poisson_replicate, sample_stdpp, sample_stdpp_replicate, KernelModel,
    MaternNonSeparableParams, PointPattern, SeparableGaussExpParams, SpaceTimePoint, SpectralConfig, Window,
};

fn sep_model(rho: f64) -> KernelModel {
    KernelModel::SeparableGaussExp(SeparableGaussExpParams::with_unit_variances(rho, 1.0, 1.0).unwrap())
}

fn small_config() -> SpectralConfig {
    SpectralConfig {
        cutoff: [8, 8, 60],
        tolerance: 1e-2,
        padding: 0.2,
    }
}

#[test]
fn replicates_are_reproducible_and_distinct() {
    let window = Window::new(4.0, 4.0, 4.0).unwrap();
    let approx = build_spectral_approx(&sep_model(0.08), &window, &small_config()).unwrap();
    let a = sample_stdpp_replicate(&approx, 99, 3).unwrap();
    let b = sample_stdpp_replicate(&approx, 99, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed_provenance(), "stdpp seed=99 stream=3");
    let c = sample_stdpp_replicate(&approx, 99, 4).unwrap();
    assert_ne!(a.points(), c.points());
    assert!(a.points().iter().all(|p| window.contains(p)));
}

#[test]
fn sampling_rejects_a_foreign_window() {
    let window = Window::new(4.0, 4.0, 4.0).unwrap();
    let approx = build_spectral_approx(&sep_model(0.08), &window, &small_config()).unwrap();
    let other = Window::new(4.0, 4.0, 5.0).unwrap();
    assert!(sample_stdpp(&approx, &other, 1).is_err());
    assert!(sample_stdpp(&approx, &window, 1).is_ok());
}

#[test]
fn stdpp_mean_count_matches_mode_mass() {
    let window = Window::new(5.0, 5.0, 5.0).unwrap();
    let rho = 0.08;
    let config = SpectralConfig {
        cutoff: [8, 8, 80],
        ..small_config()
    };
    let approx = build_spectral_approx(&sep_model(rho), &window, &config).unwrap();
    let reps = 200;
    let counts: Vec<f64> = (0..reps)
        .map(|r| sample_stdpp_replicate(&approx, 7, r).unwrap().len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let expected = approx.expected_count();
    assert!((expected / (rho * window.volume()) - 1.0).abs() < 0.02);
    assert!(
        (mean - expected).abs() < 4.0 * (var / reps as f64).sqrt(),
        "mean {mean} vs {expected}"
    );
}

#[test]
fn poisson_mean_count_matches_intensity() {
    let window = Window::with_origin(3.0, 2.0, 5.0, [-1.0, 4.0, 10.0]).unwrap();
    let rho = 1.0;
    let reps = 400;
    let counts: Vec<f64> = (0..reps)
        .map(|r| {
            let p = sample_poisson_replicate(rho, &window, 3, r).unwrap();
            assert!(p.points().iter().all(|q| window.contains(q)));
            p.len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let expected = rho * window.volume();
    assert!(
        (mean - expected).abs() < 4.0 * (expected / reps as f64).sqrt(),
        "mean {mean}"
    );
}

#[test]
fn nonseparable_mode_mass_tracks_intensity() {
    let params = MaternNonSeparableParams::from_intensity(0.05, 1.0, 1.0).unwrap();
    let model = KernelModel::MaternNonSeparable(params);
    let window = Window::new(1.5, 1.5, 1.5).unwrap();
    let config = SpectralConfig {
        cutoff: [48, 48, 48],
        tolerance: 5e-2,
        padding: 0.2,
    };
    let approx = build_spectral_approx(&model, &window, &config).unwrap();
    let ratio = approx.expected_modes() / (0.05 * approx.simulation_window.volume());
    assert!((ratio - 1.0).abs() < 0.05, "Σλ / ρ|W| = {ratio}");
    assert!((ratio - (1.0 - approx.truncation_mass)).abs() < 0.01);
    assert!(approx.probabilities.iter().all(|&l| (0.0..=1.0).contains(&l)));
}

#[test]
fn too_small_cutoff_reports_truncation() {
    let window = Window::new(4.0, 4.0, 4.0).unwrap();
    let config = SpectralConfig {
        cutoff: [2, 2, 2],
        tolerance: 1e-3,
        padding: 0.2,
    };
    match build_spectral_approx(&sep_model(0.08), &window, &config) {
        Err(stdpp::Error::Truncation { mass, suggested, .. }) => {
            assert!(mass > 1e-3);
            assert!(suggested.iter().zip(config.cutoff).all(|(&s, c)| s > c));
        }
        other => panic!("expected a truncation error, got {other:?}"),
    }
}

#[test]
fn invalid_models_are_not_simulated() {
    let window = Window::new(4.0, 4.0, 4.0).unwrap();
    let model = sep_model(0.2);
    assert!(build_spectral_approx(&model, &window, &small_config()).is_err());
}

#[test]
fn pattern_csv_round_trips() {
    let window = Window::new(4.0, 4.0, 4.0).unwrap();
    let pattern = sample_poisson_replicate(2.0, &window, 5, 0).unwrap();
    let text = pattern.to_csv();
    let back = PointPattern::from_csv(&text, window, pattern.seed_provenance()).unwrap();
    assert_eq!(back, pattern);
}

#[test]
fn pattern_validation() {
    let window = Window::new(1.0, 1.0, 1.0).unwrap();
    let p = SpaceTimePoint::new(0.5, 0.5, 0.5);
    assert!(PointPattern::new(vec![p, p], window, "dup").is_err());
    assert!(PointPattern::new(vec![SpaceTimePoint::new(1.5, 0.5, 0.5)], window, "out").is_err());
    assert!(PointPattern::new(vec![SpaceTimePoint::new(f64::NAN, 0.5, 0.5)], window, "nan").is_err());
    match PointPattern::from_csv("x,y,t\n0.1,0.1,0.1\n0.2,0.2\n", window, "short") {
        Err(stdpp::Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(PointPattern::from_csv("a,b,c\n", window, "header").is_err());
    assert!(Window::new(0.0, 1.0, 1.0).is_err());
}
