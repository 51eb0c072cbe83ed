use finsler_core::geometry::{
    check_minkowski, default_samples, einstein_residual, fundamental_tensor, integrate_geodesic, riemann_curvature,
    riemann_curvature_with_flags, spray_coefficients, ExitReason,
};
use finsler_core::jets::fd_oracle;
use finsler_core::zoo::{self, ConvexBody, FunkSign};
use finsler_core::{Error, FinslerMetric};

fn max_flag_deviation(m: &FinslerMetric, k: f64, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, y) in default_samples(m, samples) {
        let s = riemann_curvature(m, &x, &y).unwrap();
        for fv in &s.flag_values {
            worst = worst.max((fv.k - k).abs());
        }
    }
    worst
}

#[test]
fn euclidean_tensor_is_identity() {
    let m = zoo::euclidean(2).unwrap();
    let t = fundamental_tensor(&m, &[0.3, -2.0], &[1.0, 0.0]).unwrap();
    assert_eq!(t.g, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
}

#[test]
fn klein_tensor_at_origin_and_fd() {
    let m = zoo::klein(2).unwrap();
    let t = fundamental_tensor(&m, &[0.0, 0.0], &[0.3, 0.7]).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((t.g[i][j] - e).abs() < 1e-14);
        }
    }
    let (x, y) = ([0.5, 0.0], [0.0, 1.0]);
    let t = fundamental_tensor(&m, &x, &y).unwrap();
    let f2 = |x: &[f64], y: &[f64]| m.eval_unchecked(x, y).powi(2);
    for (i, j, idx) in [(0, 0, [0, 0, 2, 0]), (0, 1, [0, 0, 1, 1]), (1, 1, [0, 0, 0, 2])] {
        let fd = 0.5 * fd_oracle(f2, &x, &y, &idx).unwrap();
        assert!((t.g[i][j] - fd).abs() < 1e-6 * fd.abs().max(1.0), "{i}{j}");
    }
}

#[test]
fn zero_vector_and_outside_point_rejected() {
    let m = zoo::klein(2).unwrap();
    assert!(matches!(
        fundamental_tensor(&m, &[0.0, 0.0], &[0.0, 0.0]),
        Err(Error::ZeroVector)
    ));
    assert!(matches!(
        fundamental_tensor(&m, &[1.0, 0.5], &[1.0, 0.0]),
        Err(Error::OutsideDomain(_))
    ));
}

#[test]
fn minkowski_reports() {
    let e = check_minkowski(&zoo::euclidean(3).unwrap(), 20);
    assert!(e.passed());
    assert!((e.min_eigenvalue - 1.0).abs() < 1e-12);
    let f = check_minkowski(&zoo::funk_ball(2, FunkSign::Plus).unwrap(), 40);
    assert!(f.passed(), "{f:?}");
    let b = check_minkowski(&zoo::bryant(2, 0.5).unwrap(), 40);
    assert!(b.min_eigenvalue > 0.0, "{b:?}");
}

#[test]
fn sprays_of_known_metrics() {
    let e = zoo::euclidean(2).unwrap();
    assert_eq!(
        spray_coefficients(&e, &[1.0, 2.0], &[0.3, 0.4]).unwrap(),
        vec![0.0, 0.0]
    );

    let funk = zoo::funk_ball(2, FunkSign::Plus).unwrap();
    let klein = zoo::klein(2).unwrap();
    for (x, y) in default_samples(&funk, 20) {
        let g = spray_coefficients(&funk, &x, &y).unwrap();
        let f = funk.eval(&x, &y).unwrap();
        for i in 0..2 {
            assert!((g[i] - 0.5 * f * y[i]).abs() < 1e-8);
        }
        let g = spray_coefficients(&klein, &x, &y).unwrap();
        let c = (x[0] * y[0] + x[1] * y[1]) / (1.0 - x[0] * x[0] - x[1] * x[1]);
        for i in 0..2 {
            assert!((g[i] - c * y[i]).abs() < 1e-8);
        }
    }
}

#[test]
fn euclidean_curvature_vanishes() {
    let m = zoo::euclidean(3).unwrap();
    let s = riemann_curvature(&m, &[0.1, 0.2, 0.3], &[1.0, -1.0, 0.5]).unwrap();
    assert!(s.r_matrix.iter().flatten().all(|v| *v == 0.0));
    assert_eq!(s.ricci, 0.0);
    assert_eq!(s.flag_values.len(), 2);
    assert!(s.flag_values.iter().all(|f| f.k == 0.0));
}

#[test]
fn constant_curvature_metrics() {
    assert!(max_flag_deviation(&zoo::klein(2).unwrap(), -1.0, 20) < 1e-6);
    assert!(max_flag_deviation(&zoo::klein(3).unwrap(), -1.0, 10) < 1e-6);
    assert!(max_flag_deviation(&zoo::funk_ball(2, FunkSign::Plus).unwrap(), -0.25, 20) < 1e-6);
    assert!(max_flag_deviation(&zoo::funk_ball(3, FunkSign::Minus).unwrap(), -0.25, 10) < 1e-6);
    let half = zoo::funk_ball(2, FunkSign::Plus).unwrap().scaled(0.5).unwrap();
    assert!(max_flag_deviation(&half, -1.0, 10) < 1e-6);
    assert!(max_flag_deviation(&zoo::spherical(3).unwrap(), 1.0, 10) < 1e-6);
    assert!(max_flag_deviation(&zoo::paraboloid(2).unwrap(), -1.0, 10) < 1e-5);
    assert!(max_flag_deviation(&zoo::paraboloid(3).unwrap(), -1.0, 10) < 1e-5);
}

#[test]
fn klein_flag_at_spec_point() {
    let m = zoo::klein(2).unwrap();
    let s = riemann_curvature_with_flags(&m, &[0.3, 0.2], &[0.4, -1.1], &[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
    assert!((s.flag_values[0].k + 1.0).abs() < 1e-6);
    assert!((s.flag_values[0].k - s.flag_values[1].k).abs() < 1e-8);
    let degenerate = riemann_curvature_with_flags(&m, &[0.3, 0.2], &[0.4, -1.1], &[vec![0.8, -2.2]]);
    assert!(matches!(degenerate, Err(Error::DegenerateFlag { .. })));
}

#[test]
fn hilbert_on_ellipse_has_curvature_minus_one() {
    let body = ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap();
    let m = zoo::hilbert_general(&body).unwrap();
    assert!(max_flag_deviation(&m, -1.0, 10) < 1e-5);
    assert!(einstein_residual(&m, -1.0, 10) < 1e-6);
}

#[test]
fn einstein_residuals() {
    assert!(einstein_residual(&zoo::euclidean(2).unwrap(), 0.0, 10) < 1e-10);
    assert!(einstein_residual(&zoo::spherical(2).unwrap(), 1.0, 20) < 1e-6);
}

#[test]
fn euclidean_geodesic_is_a_straight_line() {
    let m = zoo::euclidean(2).unwrap();
    let p = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], (0.0, 1.0), 1e-10).unwrap();
    assert_eq!(p.exit_forward, ExitReason::TLimit);
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let (x, _) = p.eval(t).unwrap();
        assert!((x[0] - t).abs() < 1e-12 && x[1].abs() < 1e-14);
    }
}

#[test]
fn klein_geodesic_stays_on_axis() {
    let m = zoo::klein(2).unwrap();
    let p = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], (-5.0, 5.0), 1e-10).unwrap();
    assert_eq!(p.exit_forward, ExitReason::TLimit);
    assert_eq!(p.exit_backward, ExitReason::TLimit);
    let (x, _) = p.eval(5.0).unwrap();
    assert!((x[0] - 5f64.tanh()).abs() < 1e-8);
    assert!(p.samples.iter().all(|s| s.x[1].abs() < 1e-14));
    assert!(p.max_speed_deviation(&m) < 1e-9);
    assert!(p.max_geodesic_residual(&m) < 1e-6);
}

#[test]
fn funk_geodesic_completeness_is_one_sided() {
    let m = zoo::funk_ball(2, FunkSign::Plus).unwrap();
    let p = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], (-10.0, 10.0), 1e-10).unwrap();
    assert_eq!(p.exit_forward, ExitReason::TLimit);
    assert_eq!(p.exit_backward, ExitReason::Boundary);
    // Backward the Funk distance to the boundary along the axis is ln 2.
    assert!((p.t_min + 2f64.ln()).abs() < 1e-6, "{}", p.t_min);
    let interior = p.samples.iter().filter(|s| s.t > p.t_min + 0.05);
    let dev = interior
        .map(|s| (m.eval_unchecked(&s.x, &s.v) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-9, "{dev}");
}
