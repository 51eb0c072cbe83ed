use finsler_core::comparison::{closed_form, make_case};
use finsler_core::geometry::{fundamental_tensor, riemann_curvature, spray_coefficients};
use finsler_core::jets::fd_oracle;
use finsler_core::projective::{projective_factor, xi};
use finsler_core::zoo::{self, ConvexBody, FunkSign};
use finsler_core::FinslerMetric;
use proptest::prelude::*;

fn metric(idx: usize) -> FinslerMetric {
    match idx {
        0 => zoo::klein(2).unwrap(),
        1 => zoo::funk_ball(2, FunkSign::Plus).unwrap(),
        2 => zoo::funk_ball(2, FunkSign::Minus).unwrap(),
        3 => zoo::spherical(2).unwrap(),
        4 => zoo::bryant(2, 0.5).unwrap(),
        5 => zoo::hilbert_general(&ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap()).unwrap(),
        _ => zoo::funk(&ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap(), FunkSign::Plus).unwrap(),
    }
}

/// Interior point of every metric above (inside the disc of radius 0.6) and a
/// direction of moderate length.
fn point_and_direction() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        0.0..0.6f64,
        0.0..std::f64::consts::TAU,
        0.3..2.0f64,
        0.0..std::f64::consts::TAU,
    )
        .prop_map(|(r, t, s, u)| (vec![r * t.cos(), r * t.sin()], vec![s * u.cos(), s * u.sin()]))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn scaled(y: &[f64], s: f64) -> Vec<f64> {
    y.iter().map(|v| v * s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_is_positively_homogeneous(m in 0..7usize, (x, y) in point_and_direction(), s in 0.2..5.0f64) {
        let m = metric(m);
        prop_assert!(close(m.eval(&x, &scaled(&y, s)).unwrap(), s * m.eval(&x, &y).unwrap(), 1e-12));
    }

    #[test]
    fn euler_identities(m in 0..7usize, (x, y) in point_and_direction()) {
        let m = metric(m);
        let f = m.jet_at(&x, &y, 2).unwrap();
        let f2 = &f * &f;
        // y^k d[F^2]/dy^k = 2 F^2 and g_ij y^i y^j = F^2.
        let euler: f64 = (0..2).map(|k| y[k] * f2.d1(2 + k)).sum();
        prop_assert!(close(euler, 2.0 * f2.value(), 1e-11));
        let g = fundamental_tensor(&m, &x, &y).unwrap().g;
        let gyy: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| g[i][j] * y[i] * y[j]).sum();
        prop_assert!(close(gyy, f2.value(), 1e-11));
    }

    #[test]
    fn spray_and_curvature_are_quadratic(m in 0..7usize, (x, y) in point_and_direction(), s in 0.3..3.0f64) {
        let m = metric(m);
        let g1 = spray_coefficients(&m, &x, &y).unwrap();
        let gs = spray_coefficients(&m, &x, &scaled(&y, s)).unwrap();
        let r1 = riemann_curvature(&m, &x, &y).unwrap();
        let rs = riemann_curvature(&m, &x, &scaled(&y, s)).unwrap();
        let scale = r1.f * r1.f;
        for i in 0..2 {
            prop_assert!(close(gs[i], s * s * g1[i], 1e-10));
            for k in 0..2 {
                prop_assert!((rs.r_matrix[i][k] - s * s * r1.r_matrix[i][k]).abs() < 1e-8 * s * s * scale);
            }
        }
    }

    #[test]
    fn curvature_trace_and_kernel(m in 0..7usize, (x, y) in point_and_direction()) {
        let m = metric(m);
        let r = riemann_curvature(&m, &x, &y).unwrap();
        let scale = r.f * r.f;
        prop_assert!((r.ricci - (r.r_matrix[0][0] + r.r_matrix[1][1])).abs() < 1e-12 * scale);
        // R_y(y) = 0.
        let ry = r.apply(&y);
        prop_assert!(ry.iter().all(|v| v.abs() < 1e-8 * scale * r.f));
    }

    #[test]
    fn projective_quantities_are_homogeneous(cand in 0..4usize, (x, y) in point_and_direction(), s in 0.3..3.0f64) {
        let e = zoo::euclidean(2).unwrap();
        let c = metric(cand);
        let p1 = projective_factor(&e, &c, &x, &y).unwrap().p;
        let ps = projective_factor(&e, &c, &x, &scaled(&y, s)).unwrap().p;
        prop_assert!(close(ps, s * p1, 1e-10));
        let x1 = xi(&e, &c, &x, &y).unwrap();
        let xs = xi(&e, &c, &x, &scaled(&y, s)).unwrap();
        prop_assert!(close(xs, s * s * x1, 1e-9));
    }

    #[test]
    fn gradient_matches_finite_differences(m in 0..7usize, (x, y) in point_and_direction(), var in 0..4usize) {
        let m = metric(m);
        let f = m.jet_at(&x, &y, 2).unwrap();
        let f2 = &f * &f;
        let mut idx = vec![0u8; 4];
        idx[var] = 1;
        let fd = fd_oracle(|a: &[f64], b: &[f64]| m.eval_unchecked(a, b).powi(2), &x, &y, &idx).unwrap();
        prop_assert!((f2.d1(var) - fd).abs() < 1e-6 * f2.value().max(f2.d1(var).abs()));
    }

    #[test]
    fn comparison_closed_form_solves_the_equation(
        l in -1i8..=1, lt in -1i8..=1, a in 0.2..4.0f64, b in -4.0..4.0f64, frac in -0.9..0.9f64,
    ) {
        let s = closed_form(&make_case(l as f64, lt as f64, a, b).unwrap());
        let [f0, fp0, _] = s.f_derivatives(0.0);
        prop_assert!((f0 - a).abs() < 1e-12 * (1.0 + a) && (fp0 - b).abs() < 1e-12 * (1.0 + b.abs() + a));
        let end = if frac >= 0.0 { s.interval.1.min(3.0) } else { s.interval.0.max(-3.0) };
        let t = frac.abs() * end;
        let [f, _, fpp] = s.f_derivatives(t);
        let scale = 1.0 + fpp.abs() + f.abs() + f.powi(-3);
        prop_assert!(s.ode_residual(t) < 1e-10 * scale);
    }

    #[test]
    fn sign_flip_reflects_solution(
        l in -1i8..=1, lt in -1i8..=1, a in 0.2..4.0f64, b in -4.0..4.0f64, frac in -0.9..0.9f64,
    ) {
        let s = closed_form(&make_case(l as f64, lt as f64, a, b).unwrap());
        let r = closed_form(&make_case(l as f64, lt as f64, a, -b).unwrap());
        let end = if frac >= 0.0 { s.interval.1.min(3.0) } else { s.interval.0.max(-3.0) };
        let t = frac.abs() * end;
        prop_assert!((s.f_squared(t) - r.f_squared(-t)).abs() < 1e-12 * (1.0 + s.f_squared(t).abs() + s.case.c.abs() + a * a));
    }
}
