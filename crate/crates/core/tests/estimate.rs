use std::f64::consts::PI;

use stdpp::{
    estimate_intensity, estimate_kfun, estimate_pcf, fit_min_contrast, sample_poisson_replicate, BandwidthSpec,
    ContrastProblem, Family, FitOptions, LagGrid, ParamBounds, PointPattern, SpaceTimePoint, Statistic, SummaryCurve,
    Window,
};

fn poisson_batch(rho: f64, side: f64, reps: u64, seed: u64) -> Vec<PointPattern> {
    let window = Window::new(side, side, side).unwrap();
    (0..reps)
        .map(|r| sample_poisson_replicate(rho, &window, seed, r).unwrap())
        .collect()
}

#[test]
fn intensity_is_count_over_volume() {
    let window = Window::new(2.0, 2.0, 2.0).unwrap();
    let points = vec![SpaceTimePoint::new(0.1, 0.2, 0.3), SpaceTimePoint::new(1.0, 1.5, 1.9)];
    let pattern = PointPattern::new(points, window, "two").unwrap();
    assert_eq!(estimate_intensity(&pattern).unwrap(), 0.25);
}

#[test]
fn k_estimate_ignores_order_and_translation() {
    let pattern = &poisson_batch(1.0, 5.0, 1, 8)[0];
    let grid = LagGrid::positive(1.0, 4, 1.0, 4).unwrap();
    let k = estimate_kfun(pattern, &grid).unwrap();

    let mut reversed: Vec<SpaceTimePoint> = pattern.points().to_vec();
    reversed.reverse();
    let shuffled = PointPattern::new(reversed, *pattern.window(), "reversed").unwrap();
    let k_rev = estimate_kfun(&shuffled, &grid).unwrap();
    for (a, b) in k.values.iter().flatten().zip(k_rev.values.iter().flatten()) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    let shift = [10.0, -3.0, 2.5];
    let moved: Vec<SpaceTimePoint> = pattern
        .points()
        .iter()
        .map(|p| SpaceTimePoint::new(p.x + shift[0], p.y + shift[1], p.t + shift[2]))
        .collect();
    let window = Window::with_origin(5.0, 5.0, 5.0, shift).unwrap();
    let k_moved = estimate_kfun(&PointPattern::new(moved, window, "moved").unwrap(), &grid).unwrap();
    for (a, b) in k.values.iter().flatten().zip(k_moved.values.iter().flatten()) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }
}

#[test]
fn k_estimate_is_monotone() {
    let pattern = &poisson_batch(0.8, 6.0, 1, 2)[0];
    let grid = LagGrid::positive(2.0, 8, 2.0, 8).unwrap();
    let k = estimate_kfun(pattern, &grid).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            assert!(k.value(i, j) >= 0.0);
            if i > 0 {
                assert!(k.value(i, j) >= k.value(i - 1, j));
            }
            if j > 0 {
                assert!(k.value(i, j) >= k.value(i, j - 1));
            }
        }
    }
}

#[test]
fn poisson_pair_correlation_is_near_one() {
    let batch = poisson_batch(1.0, 6.0, 30, 12);
    let grid = LagGrid::new(vec![0.75, 1.25], vec![0.75, 1.25]).unwrap();
    let bw = BandwidthSpec::new(0.3, 0.3).unwrap();
    let curves: Vec<SummaryCurve> = batch.iter().map(|p| estimate_pcf(p, &grid, &bw).unwrap()).collect();
    let pooled = SummaryCurve::mean(&curves, "pooled").unwrap();
    for v in pooled.values.iter().flatten() {
        assert!((v - 1.0).abs() < 0.1, "ĝ = {v}");
    }
    let ks: Vec<SummaryCurve> = batch.iter().map(|p| estimate_kfun(p, &grid).unwrap()).collect();
    let pooled = SummaryCurve::mean(&ks, "pooled").unwrap();
    let k = pooled.value(1, 1);
    assert!((k / (PI * 1.25 * 1.25 * 1.25) - 1.0).abs() < 0.1, "K̂ = {k}");
}

#[test]
fn estimator_domain_errors() {
    let pattern = &poisson_batch(1.0, 4.0, 1, 1)[0];
    let too_far = LagGrid::new(vec![2.5], vec![1.0]).unwrap();
    assert!(matches!(
        estimate_kfun(pattern, &too_far),
        Err(stdpp::Error::GridExceedsWindow(_))
    ));
    let grid = LagGrid::new(vec![1.0], vec![1.0]).unwrap();
    let wide = BandwidthSpec::new(3.0, 0.3).unwrap();
    assert!(matches!(
        estimate_pcf(pattern, &grid, &wide),
        Err(stdpp::Error::BandwidthTooLarge(_))
    ));
    assert!(BandwidthSpec::new(0.0, 1.0).is_err());
}

#[test]
fn fit_on_poisson_data_converges_to_a_local_minimum() {
    let batch = poisson_batch(0.05, 8.0, 10, 21);
    let grid = LagGrid::positive(1.5, 10, 1.5, 10).unwrap();
    let bounds = ParamBounds::new([0.25, 2.0], [0.25, 2.0]).unwrap();
    let options = FitOptions::default();
    let fit = fit_min_contrast(
        &batch,
        Family::SeparableGaussExp,
        &bounds,
        Statistic::K,
        &grid,
        &options,
    )
    .unwrap();
    assert!(fit.converged);
    assert!(fit.model.intensity_bounds().unwrap().0 < fit.model.intensity_bounds().unwrap().1);
    let problem = ContrastProblem::new(&batch, Family::SeparableGaussExp, Statistic::K, &grid, &options).unwrap();
    let [cs, ct] = bounds.geometric_center();
    assert!(fit.contrast <= problem.evaluate(cs, ct));
    assert_eq!(fit.rho, problem.rho());
}

#[test]
fn fuentes_fitting_is_unsupported() {
    let batch = poisson_batch(0.5, 4.0, 1, 3);
    let grid = LagGrid::positive(1.0, 2, 1.0, 2).unwrap();
    let bounds = ParamBounds::new([0.5, 2.0], [0.5, 2.0]).unwrap();
    let err = fit_min_contrast(
        &batch,
        Family::Fuentes,
        &bounds,
        Statistic::K,
        &grid,
        &FitOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, stdpp::Error::Unsupported(_)));
}

#[test]
fn bounds_outside_the_valid_region_are_infeasible() {
    let batch = poisson_batch(1.0, 4.0, 2, 4);
    let grid = LagGrid::positive(1.0, 2, 1.0, 2).unwrap();
    let bounds = ParamBounds::new([0.25, 0.3], [0.25, 0.3]).unwrap();
    let err = fit_min_contrast(
        &batch,
        Family::MaternSeparable,
        &bounds,
        Statistic::G,
        &grid,
        &FitOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, stdpp::Error::InfeasibleBounds), "{err}");
    assert!(ParamBounds::new([2.0, 1.0], [1.0, 2.0]).is_err());
}
