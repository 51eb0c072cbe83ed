use std::f64::consts::PI;

use finsler_core::comparison::{
    a_grid, b_grid, classify_completeness, closed_form, evolution_law, implicit_time, length_classification, make_case,
    maximal_interval, monotone_segment, numeric_integrate, ClosedFormKind, ExceptionalFamily, IntervalType,
    LengthClass,
};

const INF: f64 = f64::INFINITY;

#[test]
fn closed_form_examples() {
    let s = closed_form(&make_case(1.0, 1.0, 1.0, 0.0).unwrap());
    assert_eq!(maximal_interval(&s), (-INF, INF));
    assert!((s.f(3.7) - 1.0).abs() < 1e-15);

    let (a, b) = (0.8, -0.3);
    let s = closed_form(&make_case(0.0, 0.0, a, b).unwrap());
    assert_eq!(s.kind, ClosedFormKind::Linear);
    assert!((s.f(1.5) - (a + 1.5 * b)).abs() < 1e-15);

    let s = closed_form(&make_case(0.0, -1.0, 1.0, 1.0).unwrap());
    assert_eq!(maximal_interval(&s), (-0.5, INF));
    assert!((s.f(0.8) - (1.0f64 + 1.6).sqrt()).abs() < 1e-15);

    let s = closed_form(&make_case(-1.0, -1.0, 1.0, 0.0).unwrap());
    assert!(s.is_constant());
    assert!((s.f(-5.0) - 1.0).abs() < 1e-15);
}

#[test]
fn invalid_cases_are_rejected() {
    assert!(make_case(1.0, 1.0, -1.0, 0.0).is_err());
    assert!(make_case(0.5, 1.0, 1.0, 0.0).is_err());
    assert!(make_case(1.0, 1.0, 1.0, f64::NAN).is_err());
}

#[test]
fn interval_examples() {
    let (lo, hi) = maximal_interval(&closed_form(&make_case(1.0, 0.0, 1.0, 0.0).unwrap()));
    assert!((lo + PI / 2.0).abs() < 1e-15 && (hi - PI / 2.0).abs() < 1e-15);
    for (a, b) in [(0.5, 0.2), (2.0, 1.0), (1.0, -0.9)] {
        let case = make_case(-1.0, 0.0, a, b).unwrap();
        assert!(case.c < 0.0);
        assert_eq!(maximal_interval(&closed_form(&case)), (-INF, INF));
    }
    for (l, lt) in [(1.0, 1.0), (0.0, 1.0), (-1.0, 1.0)] {
        for (a, b) in [(0.3, 2.0), (1.0, 0.0), (4.0, -1.0)] {
            assert_eq!(
                maximal_interval(&closed_form(&make_case(l, lt, a, b).unwrap())),
                (-INF, INF)
            );
        }
    }
}

#[test]
fn solution_vanishes_at_finite_ends() {
    for (l, lt) in [(1.0, -1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, -1.0), (-1.0, 0.0)] {
        for (a, b) in [(0.5, 1.5), (2.0, -0.7), (1.2, 0.3)] {
            let s = closed_form(&make_case(l, lt, a, b).unwrap());
            let (lo, hi) = s.interval;
            for end in [lo, hi].into_iter().filter(|e| e.is_finite()) {
                assert!(
                    s.f_squared(end).abs() < 1e-10 * (1.0 + s.case.c.abs()),
                    "{l} {lt} {a} {b} {end}"
                );
                let inside = 0.999 * end;
                assert!(s.f_squared(inside) > 0.0);
            }
        }
    }
}

#[test]
fn length_examples() {
    for (a, b) in [(1.0, 0.0), (0.4, 2.0), (3.0, -1.0)] {
        let s = closed_form(&make_case(0.0, 1.0, a, b).unwrap());
        let (fw, bw) = length_classification(&s);
        match (fw, bw) {
            (LengthClass::Finite { value: f }, LengthClass::Finite { value: g }) => assert!((f + g - PI).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let s = closed_form(&make_case(1.0, 1.0, a, b).unwrap());
        assert!((s.length_between(0.37, 0.37 + PI) - PI).abs() < 1e-9);
    }
    let case = make_case(-1.0, -1.0, 2.0, 3.0).unwrap();
    assert!(case.c > 1.0);
    let s = closed_form(&case);
    assert!(s.length_backward.is_infinite());
    assert!(matches!(s.length_forward, LengthClass::Finite { .. }));
}

#[test]
fn numeric_integration_examples() {
    let case = make_case(0.0, 0.0, 1.0, 0.5).unwrap();
    let num = numeric_integrate(&case, (-1.5, 3.0), 1e-12).unwrap();
    for k in 0..=45 {
        let t = -1.5 + 0.1 * k as f64;
        let (f, _) = num.eval(t).unwrap();
        assert!((f - (1.0 + 0.5 * t)).abs() < 1e-10);
    }
    // Running into the zero of f stops the integration.
    let case = make_case(0.0, -1.0, 1.0, 1.0).unwrap();
    let num = numeric_integrate(&case, (-2.0, 0.0), 1e-10).unwrap();
    let summary = num.summary();
    assert!(summary.t_min > -0.5 && summary.t_min < -0.49, "{summary:?}");
    assert!(numeric_integrate(&case, (1.0, 2.0), 1e-10).is_err());
}

#[test]
fn evolution_law_examples() {
    for a in [1.0, 1.5, 3.0] {
        for (b, sign) in [(1.0 / a - a, -1.0), (a - 1.0 / a, 1.0)] {
            let case = make_case(-1.0, -1.0, a, b).unwrap();
            assert_eq!(case.c, -1.0);
            for t in [-1.0f64, 0.0, 0.7, 2.0] {
                let expect = 1.0 / ((sign * 2.0 * t).exp() * (a * a - 1.0) + 1.0);
                assert!((evolution_law(&case, t).unwrap() - expect).abs() < 1e-12 * expect);
            }
        }
    }
    let case = make_case(0.0, 1.0, 1.3, 0.4).unwrap();
    let t: f64 = -2.2;
    let expect = 1.0 / ((1.3 + 0.4 * t).powi(2) + (t / 1.3).powi(2));
    assert!((evolution_law(&case, t).unwrap() - expect).abs() < 1e-14);
    assert!(evolution_law(&make_case(0.0, -1.0, 1.0, 1.0).unwrap(), -0.6).is_err());
}

#[test]
fn implicit_integral_on_monotone_segments() {
    for (l, lt, a, b) in [
        (1.0, 1.0, 0.7, 0.4),
        (-1.0, -1.0, 2.0, 3.0),
        (0.0, -1.0, 1.0, 1.0),
        (1.0, -1.0, 1.5, 0.0),
    ] {
        let s = closed_form(&make_case(l, lt, a, b).unwrap());
        for dir in [1.0, -1.0] {
            let (lo, hi) = monotone_segment(&s, dir);
            let end = if dir > 0.0 { hi.min(2.0) } else { lo.max(-2.0) };
            let t = 0.6 * end;
            assert!(
                (implicit_time(&s, t).unwrap() - t.abs()).abs() < 1e-7,
                "{l} {lt} {a} {b} {t}"
            );
        }
    }
}

#[test]
fn sign_flip_reflects_time() {
    for (l, lt) in [
        (1.0, 1.0),
        (1.0, -1.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
    ] {
        let (a, b) = (1.3, 0.6);
        let s = closed_form(&make_case(l, lt, a, b).unwrap());
        let r = closed_form(&make_case(l, lt, a, -b).unwrap());
        assert!((s.interval.0 + r.interval.1).abs() < 1e-12 || s.interval.0 == -r.interval.1);
        for t in [-0.3, 0.1, 0.4] {
            if s.contains(t) {
                assert!((s.f(t) - r.f(-t)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn taxonomy_examples() {
    let t = classify_completeness(-1.0, -1.0, 1.0, 0.0).unwrap();
    assert!(t.bi_complete && t.interval_type == IntervalType::Whole);
    for b in [-1.0, 0.5, 2.0] {
        let t = classify_completeness(0.0, 0.0, 0.7, b).unwrap();
        assert!(!t.bi_complete && t.families.is_empty());
    }
    let t = classify_completeness(0.0, 0.0, 0.7, 0.0).unwrap();
    assert!(t.bi_complete && t.families == vec![ExceptionalFamily::ConstantRatio]);
    for a in a_grid() {
        for b in b_grid() {
            let t = classify_completeness(-1.0, 1.0, a, b).unwrap();
            assert!(!t.forward_complete && !t.backward_complete, "{a} {b}");
        }
    }
    let t = classify_completeness(0.0, -1.0, 2.0, 0.5).unwrap();
    assert_eq!(t.families, vec![ExceptionalFamily::LinearForward]);
    assert!(t.forward_pair_complete && !t.backward_pair_complete);
    let t = classify_completeness(-1.0, 0.0, 2.0, 2.0).unwrap();
    assert_eq!(t.families, vec![ExceptionalFamily::MinusFF]);
    assert!(t.backward_pair_complete && !t.forward_pair_complete);
}

#[test]
fn plus_family_includes_small_initial_values() {
    // a < 1 on b = 1/a - a: f^2 = 1 - (1 - a^2) e^{-2t} tends to 1, so the
    // forward length diverges while the geodesic extends to +inf.
    let t = classify_completeness(-1.0, -1.0, 0.5, 1.5).unwrap();
    assert!(t.forward_pair_complete && t.interval_type == IntervalType::RightRay);
    assert_eq!(t.families, vec![ExceptionalFamily::PlusF]);
}

#[test]
fn every_grid_cell_is_classified() {
    let s = [-1.0, 0.0, 1.0];
    let mut cells = 0;
    for l in s {
        for lt in s {
            for a in a_grid() {
                for b in b_grid() {
                    let t = classify_completeness(l, lt, a, b).unwrap();
                    assert!(t.t_lo.is_none_or(|v| v < 0.0) && t.t_hi.is_none_or(|v| v > 0.0));
                    cells += 1;
                }
            }
        }
    }
    assert_eq!(cells, 9 * 20 * 41);
}
