use finsler_core::geometry::{check_minkowski, default_samples, einstein_residual};
use finsler_core::projective::rapcsak_residual;
use finsler_core::zoo::{
    self, evolution_coefficients, funk_general, verify_evolution, ConvexBody, EvolutionSource, FunkSign, Shape,
};
use finsler_core::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn closed_forms_at_origin_and_on_axis() {
    let y = [0.6, -0.8];
    for m in [
        zoo::klein(2).unwrap(),
        zoo::funk_ball(2, FunkSign::Plus).unwrap(),
        zoo::funk_ball(2, FunkSign::Minus).unwrap(),
    ] {
        assert!(close(m.eval(&[0.0, 0.0], &y).unwrap(), 1.0, 1e-15), "{}", m.name());
    }
    let fp = zoo::funk_ball(2, FunkSign::Plus).unwrap();
    let fm = zoo::funk_ball(2, FunkSign::Minus).unwrap();
    let (x, v) = ([0.5, 0.0], [1.0, 0.0]);
    let p = fp.eval(&x, &v).unwrap();
    let q = fm.eval(&x, &v).unwrap();
    assert!(close(p, 2.0, 1e-15) && close(q, 2.0 / 3.0, 1e-15));
    // z_+ = x + y / F_+ and z_- = x - y / F_- lie on the unit circle.
    assert!(close(x[0] + v[0] / p, 1.0, 1e-15));
    assert!(close(x[0] - v[0] / q, -1.0, 1e-15));
}

#[test]
fn outside_domain_is_rejected() {
    let k = zoo::klein(2).unwrap();
    assert!(matches!(k.eval(&[1.2, 0.0], &[1.0, 0.0]), Err(Error::OutsideDomain(_))));
    let p = zoo::paraboloid(2).unwrap();
    assert!(matches!(p.eval(&[0.5, 0.1], &[1.0, 0.0]), Err(Error::OutsideDomain(_))));
    let body = ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap();
    assert!(funk_general(&body, &[2.5, 0.0], &[1.0, 0.0], FunkSign::Plus).is_err());
}

#[test]
fn general_funk_reproduces_ball_and_reverses() {
    let ball = ConvexBody::unit_ball(2);
    let fp = zoo::funk_ball(2, FunkSign::Plus).unwrap();
    let body = ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap();
    for (x, y) in default_samples(&fp, 100) {
        let g = funk_general(&ball, &x, &y, FunkSign::Plus).unwrap();
        assert!(close(g, fp.eval(&x, &y).unwrap(), 1e-10));
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = funk_general(&body, &x, &neg, FunkSign::Plus).unwrap();
        let b = funk_general(&body, &x, &y, FunkSign::Minus).unwrap();
        assert!(close(a, b, 1e-12));
    }
}

#[test]
fn superellipse_body_is_supported() {
    let body = ConvexBody::new(2, Shape::Superellipse { p: 4, radius: 1.0 }).unwrap();
    // Along an axis the p-norm ball reaches 1, so F_+(0, e_1) = 1.
    let f = funk_general(&body, &[0.0, 0.0], &[1.0, 0.0], FunkSign::Plus).unwrap();
    assert!(close(f, 1.0, 1e-12));
    assert!(check_minkowski(&zoo::hilbert_general(&body).unwrap(), 20).passed());
}

#[test]
fn hilbert_of_ball_is_klein_and_reversible() {
    let k = zoo::klein(2).unwrap();
    let h = zoo::hilbert_general(&ConvexBody::unit_ball(2)).unwrap();
    let he = zoo::hilbert_general(&ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap()).unwrap();
    for (x, y) in default_samples(&k, 50) {
        assert!(close(h.eval(&x, &y).unwrap(), k.eval(&x, &y).unwrap(), 1e-10));
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert!(close(he.eval(&x, &neg).unwrap(), he.eval(&x, &y).unwrap(), 1e-12));
    }
}

#[test]
fn bryant_family() {
    let s = zoo::spherical(2).unwrap();
    let b1 = zoo::bryant(2, 1.0).unwrap();
    for (x, y) in default_samples(&s, 100) {
        assert!(close(b1.eval(&x, &y).unwrap(), s.eval(&x, &y).unwrap(), 1e-10));
    }
    let eps = 0.3;
    let b = zoo::bryant(2, eps).unwrap();
    let y = [0.3, 1.2];
    let norm = (0.09f64 + 1.44).sqrt();
    assert!(close(
        b.eval(&[0.0, 0.0], &y).unwrap(),
        norm * ((1.0 + eps) / 2.0).sqrt(),
        1e-14
    ));
    assert!(zoo::bryant(2, 0.0).is_err());
    assert!(zoo::bryant(2, 1.5).is_err());
    // Reported, not asserted: the curvature residual at eps = 0.8 is finite.
    assert!(einstein_residual(&zoo::bryant(2, 0.8).unwrap(), 1.0, 5).is_finite());
}

#[test]
fn paraboloid_vertical_line() {
    let p = zoo::paraboloid(3).unwrap();
    let x0 = 0.7;
    let a2 = 2.0 * x0;
    for t in [-0.3, 0.0, 0.5, 2.0] {
        let f = p.eval(&[0.0, 0.0, x0 + t], &[0.0, 0.0, 1.0]).unwrap();
        assert!(close(f, 1.0 / (a2 + 2.0 * t), 1e-14));
    }
    assert!(check_minkowski(&p, 50).passed());
}

#[test]
fn zoo_metrics_are_projectively_flat_and_einstein() {
    let e2 = zoo::euclidean(2).unwrap();
    let body = ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap();
    let cases = [
        (zoo::euclidean(2).unwrap(), 0.0),
        (zoo::klein(2).unwrap(), -1.0),
        (zoo::funk_ball(2, FunkSign::Plus).unwrap(), -0.25),
        (zoo::spherical(2).unwrap(), 1.0),
        (zoo::hilbert_general(&body).unwrap(), -1.0),
        (zoo::paraboloid(2).unwrap(), -1.0),
        (zoo::funk_ball(2, FunkSign::Minus).unwrap().scaled(0.5).unwrap(), -1.0),
    ];
    for (m, lambda) in cases {
        assert!(rapcsak_residual(&e2, &m, 50) < 1e-7, "{}", m.name());
        assert!(einstein_residual(&m, lambda, 50) < 1e-5, "{}", m.name());
        assert_eq!(m.einstein_constant(), Some(lambda), "{}", m.name());
    }
    assert!(rapcsak_residual(&e2, &zoo::bryant(2, 0.5).unwrap(), 50) < 1e-7);
}

#[test]
fn by_name_catalog() {
    for name in zoo::METRIC_NAMES {
        let body = ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap();
        let m = zoo::by_name(name, 2, 0.5, Some(&body)).unwrap();
        assert_eq!(m.dim(), 2);
    }
    assert!(zoo::by_name("no-such-metric", 2, 0.5, None).is_err());
}

#[test]
fn evolution_coefficient_examples() {
    let y = [0.6, 0.8];
    let k = evolution_coefficients(&EvolutionSource::Klein { dim: 2 }, &[0.0, 0.0], &y).unwrap();
    assert!(close(k.a, 1.0, 1e-15) && k.b.abs() < 1e-15);
    assert!(close(k.predict(0.5), 1.0 / (1.0 - 0.25), 1e-15));
    let f = evolution_coefficients(&EvolutionSource::FunkPlus { dim: 2, body: None }, &[0.0, 0.0], &y).unwrap();
    assert!(close(f.a * f.a, 2.0, 1e-15));
    assert!(close(f.predict(0.2) / 2.0, 1.0 / (2.0 - 0.4), 1e-14));
    let s = evolution_coefficients(&EvolutionSource::Spherical { dim: 2 }, &[0.0, 0.0], &y).unwrap();
    assert!(close(s.a, 1.0, 1e-15) && s.b.abs() < 1e-15);
    assert!(close(s.predict(2.0), 1.0 / 5.0, 1e-15));
    assert!(evolution_coefficients(&EvolutionSource::Klein { dim: 2 }, &[0.0, 0.0], &[1.0, 1.0]).is_err());
}

#[test]
fn funk_evolution_on_axis() {
    let fp = zoo::funk_ball(2, FunkSign::Plus).unwrap();
    assert!(close(fp.eval(&[0.6, 0.0], &[1.0, 0.0]).unwrap(), 2.5, 1e-14));
    let src = EvolutionSource::FunkPlus { dim: 2, body: None };
    let dev = verify_evolution(&src, &[0.5, 0.0], &[1.0, 0.0], &[-0.5, 0.0, 0.1, 0.3]).unwrap();
    assert!(dev < 1e-13);
}

#[test]
fn evolution_matches_at_start() {
    let body = ConvexBody::ellipsoid(&[2.0, 1.0]).unwrap();
    let sources = [
        EvolutionSource::Klein { dim: 2 },
        EvolutionSource::Spherical { dim: 2 },
        EvolutionSource::FunkMinus {
            dim: 2,
            body: Some(body.clone()),
        },
        EvolutionSource::Hilbert {
            dim: 2,
            body: Some(body),
        },
        EvolutionSource::Paraboloid { dim: 2 },
        EvolutionSource::Bryant { dim: 2, eps: 0.5 },
    ];
    for src in sources {
        let m = src.metric().unwrap();
        for (x, y) in default_samples(&m, 10) {
            let l = (y[0] * y[0] + y[1] * y[1]).sqrt();
            let u = [y[0] / l, y[1] / l];
            let c = evolution_coefficients(&src, &x, &u).unwrap();
            let f = m.eval(&x, &u).unwrap();
            assert!(close(c.scale / (c.a * c.a), f, 1e-10), "{}", src.tag());
        }
    }
}

#[test]
fn paraboloid_evolution_is_reproduced() {
    let src = EvolutionSource::Paraboloid { dim: 2 };
    let dev = verify_evolution(&src, &[0.0, 0.7], &[0.0, 1.0], &[-0.5, 0.0, 0.5, 1.0]).unwrap();
    assert!(dev < 1e-12);
}
