use super::*;
use crate::mp;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn reg() -> &'static Registry {
    Registry::standard()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Far from every singular set by at least `gap`.
fn clear(s: f64, t: f64, gap: f64) -> bool {
    s.abs() > gap && t.abs() > gap && (s + t).abs() > gap
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn definitions_equal_closed_forms_exactly() {
    let r = reg();
    let mut checked = 0;
    for n in r.names() {
        let closed = r.closed_forms(n).unwrap();
        for other in &closed[1..] {
            assert!(normal_equal(&closed[0], other), "{} closed forms differ", n);
        }
        if let Some(d) = r.definition(n).unwrap() {
            assert!(normal_equal(&d, &closed[0]), "{} definition differs", n);
            checked += 1;
        }
    }
    assert_eq!(checked, 16);
}

#[test]
fn f2_and_g2_are_the_same_function() {
    let r = reg();
    assert!(normal_equal(
        &r.closed_form("f2").unwrap(),
        &r.closed_form("g2").unwrap()
    ));
    assert!(!normal_equal(
        &r.closed_form("f1").unwrap(),
        &r.closed_form("g1").unwrap()
    ));
}

#[test]
fn modified_log_of_order_zero() {
    let l0 = reg().closed_form("L0").unwrap();
    let expect = expr::parse_plain("log(u)/(u - 1)").unwrap();
    assert!(l0.rat().equals(&expect));
    let f2 = reg().closed_form("f2").unwrap();
    let expect = expr::parse_plain("2 (-1 + u^2 - 2 u log(u))/(-1 + u)^3").unwrap();
    assert!(f2.rat().equals(&expect));
}

#[test]
fn unknown_names_are_reported() {
    assert_eq!(
        reg().closed_form("Q7").unwrap_err(),
        ModFunError::UnknownFunction("Q7".into())
    );
    assert!(quadrature_oracle("D40", 1.0, 1.0).is_err());
    let mut r = reg().clone();
    assert!(r.register_assembled("nope", RatFun::one()).is_err());
}

#[test]
fn registered_assembly_replaces_the_printed_definition() {
    let mut r = reg().clone();
    let f = r.closed_form("f1").unwrap();
    r.register_assembled("f1", f.rat().clone()).unwrap();
    let a = r.assembled("f1").unwrap().unwrap();
    assert!(normal_equal(&a, &f));
    assert!(reg().assembled("g").unwrap().is_none());
}

#[test]
fn exponential_view_identities() {
    let r = reg();
    let w = r.closed_form("W").unwrap();
    assert!(w.rat().swap_uv().equals(w.rat()));
    for n in ["H", "T", "R2", "R2g"] {
        let f = r.closed_form(n).unwrap();
        assert!(f.rat().swap_uv().add(f.rat()).is_zero(), "{}", n);
    }
    // R1 = K + S and R1g = K − S as stored functions
    let k = r.closed_form("K").unwrap();
    let s = r.closed_form("S").unwrap();
    assert!(r
        .closed_form("R1")
        .unwrap()
        .rat()
        .equals(&k.rat().add(s.rat())));
    assert!(r
        .closed_form("R1g")
        .unwrap()
        .rat()
        .equals(&k.rat().sub(s.rat())));
}

#[test]
fn modified_logs_match_quadrature() {
    let r = reg();
    for m in 0..=3 {
        let name = format!("L{}", m);
        let f = r.closed_form(&name).unwrap();
        for u in [0.2, 0.7, 1.0, 1.0005, 2.0, 5.0] {
            let quad = quadrature_oracle(&name, u, 1.0).unwrap();
            let val = mp::to_f64(&f.eval(u, 1.0, &EvalConfig::default()));
            assert!(
                (quad - val).abs() < 1e-10,
                "{} at {}: {} vs {}",
                name,
                u,
                quad,
                val
            );
        }
        let at_one = quadrature_oracle(&name, 1.0, 1.0).unwrap();
        assert!((at_one - 1.0 / (m as f64 + 1.0)).abs() < 1e-10);
    }
    let l0 = quadrature_oracle("L0", 2.0, 1.0).unwrap();
    assert!((l0 - 2f64.ln()).abs() < 1e-10);
}

#[test]
fn two_variable_logs_match_quadrature() {
    let r = reg();
    let pts = [
        (2.0, 3.0),
        (0.5, 1.7),
        (3.0, 0.4),
        (1.3, 0.6),
        (1.0, 1.0),
        (1.0, 2.5),
    ];
    for n in ["D11", "D12", "D21", "D22", "D31"] {
        let f = r.closed_form(n).unwrap();
        for (u, v) in pts {
            let quad = quadrature_oracle(n, u, v).unwrap();
            let val = mp::to_f64(&f.eval(u, v, &EvalConfig::default()));
            assert!((quad - val).abs() < 1e-10, "{} at ({}, {})", n, u, v);
        }
    }
    assert!((quadrature_oracle("D11", 1.0, 1.0).unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn limits_at_the_origin_are_exact() {
    let r = reg();
    let cfg = EvalConfig::default();
    let p = 256;
    let cases = [
        ("R1", q(-1, 3)),
        ("R1g", q(1, 1)),
        ("R2", q(0, 1)),
        ("R2g", q(0, 1)),
        ("W", q(-2, 3)),
    ];
    for (n, want) in cases {
        let got = r.closed_form(n).unwrap().eval_st(0.0, 0.0, &cfg);
        let diff = mp::to_f64(&got.sub(&mp::from_rational(&want, p), p, mp::RM));
        assert!(diff.abs() < 1e-32, "{}: off by {:e}", n, diff);
    }
}

/// Reference value by direct evaluation at very high precision.
fn reference(f: &ModFun, s: f64, t: f64) -> f64 {
    let cfg = EvalConfig {
        precision: 400,
        eps: 1e-300,
        taylor_order: 10,
    };
    mp::to_f64(&f.eval_st(s, t, &cfg))
}

#[test]
fn singular_zones_agree_with_high_precision() {
    let r = reg();
    let cfg = EvalConfig::default();
    let pts = [
        (3e-4, 0.8),
        (0.6, -7e-4),
        (1.1, -1.1 + 2e-4),
        (4e-4, -9e-4),
        (2e-4, 5e-4),
    ];
    for n in [
        "f1", "g1", "F", "G", "L", "g", "K", "S", "H", "W", "R1", "R2",
    ] {
        let f = r.closed_form(n).unwrap().with_view(View::Exponential);
        for (s, t) in pts {
            let got = mp::to_f64(&f.eval_st(s, t, &cfg));
            let want = reference(&f, s, t);
            assert!(
                (got - want).abs() <= 1e-14 * want.abs().max(1.0),
                "{} at ({}, {}): {} vs {}",
                n,
                s,
                t,
                got,
                want
            );
        }
    }
}

#[test]
fn extended_precision_to_thirty_digits() {
    // L0(e^s) = s/(e^s − 1); compare with an independent evaluation.
    let f = reg().closed_form("L0").unwrap();
    let p = 512;
    for s in [2e-4, 0.3, -1.2] {
        let cfg = EvalConfig::default();
        let got = f.eval_st(s, 0.0, &cfg);
        let sb = mp::from_f64(s, p);
        let want = sb.div(&mp::exp(&sb, p).sub(&mp::one(p), p, mp::RM), p, mp::RM);
        let err = mp::to_f64(&got.sub(&want, p, mp::RM)) / mp::to_f64(&want);
        assert!(err.abs() < 1e-30, "s = {}: {:e}", s, err);
    }
}

#[test]
fn definitions_and_closed_forms_agree_numerically() {
    let r = reg();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let two_var = ["F", "G", "L"];
    let exp_view = ["K", "S", "H", "T", "W", "R1", "R1g", "R2", "R2g"];
    let mut n_pts = 0;
    while n_pts < 100 {
        let u: f64 = rng.random_range(0.2..5.0);
        let v: f64 = rng.random_range(0.2..5.0);
        let (s, t) = (u.ln(), v.ln());
        if !clear(s, t, 0.05) {
            continue;
        }
        n_pts += 1;
        for n in two_var.iter().chain(exp_view.iter()) {
            let d = r.definition(n).unwrap().unwrap();
            let c = r.closed_form(n).unwrap();
            let cfg = EvalConfig::default();
            let a = mp::to_f64(&d.eval_st(s, t, &cfg));
            let b = mp::to_f64(&c.eval_st(s, t, &cfg));
            assert!(rel(a, b) < 1e-12, "{} at ({}, {}): {} vs {}", n, s, t, a, b);
        }
    }
}

#[test]
fn printed_simplifications_of_the_one_variable_functions() {
    let r = reg();
    let r1 = r.closed_form("R1").unwrap();
    let r1g = r.closed_form("R1g").unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let x: f64 = rng.random_range(-6.0..6.0);
        if x.abs() < 0.05 {
            continue;
        }
        let a = (0.5 - (x / 2.0).sinh() / x) / (x / 4.0).sinh().powi(2);
        let b = (0.5 + (x / 2.0).sinh() / x) / (x / 4.0).cosh().powi(2);
        assert!(rel(r1.value_st(x, 0.0), a) < 1e-12);
        assert!(rel(r1g.value_st(x, 0.0), b) < 1e-12);
    }
}

#[test]
fn taylor_order_and_precision_are_floored() {
    let cfg = EvalConfig {
        precision: 10,
        eps: 1e-3,
        taylor_order: 2,
    };
    let f = reg().closed_form("R1").unwrap();
    let v = mp::to_f64(&f.eval_st(1e-5, 0.0, &cfg));
    assert!((v + 1.0 / 3.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zone_boundary_is_seamless(s in -3e-3f64..3e-3, t in 0.2f64..2.0) {
        let f = reg().closed_form("H").unwrap();
        let got = mp::to_f64(&f.eval_st(s, t, &EvalConfig::default()));
        let want = reference(&f, s, t);
        prop_assert!((got - want).abs() <= 1e-14 * want.abs().max(1.0));
    }

    #[test]
    fn rational_functions_form_a_field(a in -3i64..4, b in 1i64..4, c in -2i32..3) {
        let x = expr::parse_plain(&format!("({} + u^({}/4)) / (1 + v)", a, c)).unwrap();
        let y = expr::parse_plain(&format!("log(u) - {} v", b)).unwrap();
        let z = expr::parse_plain("u^(1/2) + 3").unwrap();
        prop_assert!(x.add(&y).mul(&z).equals(&x.mul(&z).add(&y.mul(&z))));
        prop_assert!(x.div(&z).mul(&z).equals(&x));
        prop_assert!(x.sub(&x).is_zero());
    }
}

#[test]
fn taylor_coefficients_at_the_origin() {
    let r = reg();
    let r1 = r.closed_form("R1").unwrap().taylor_at_origin(4).unwrap();
    assert_eq!(r1[0][0], q(-1, 3));
    assert_eq!(r1[1][0], q(0, 1));
    assert!(r1[2].iter().skip(1).all(|c| c.is_zero()));
    // 2(e^{x/2} − 1)/x = 1 + x/4 + x²/24 + …
    let f = ModFun::new(
        "a",
        1,
        View::Exponential,
        expr::parse_plain("2 (exp(x/2) - 1)/x").unwrap(),
    );
    let c = f.taylor_at_origin(3).unwrap();
    assert_eq!(
        (c[0][0].clone(), c[1][0].clone(), c[2][0].clone()),
        (q(1, 1), q(1, 4), q(1, 24))
    );
    let w = r.closed_form("W").unwrap().taylor_at_origin(2).unwrap();
    assert_eq!(w[0][0], q(-2, 3));
    assert_eq!(w[1], vec![q(0, 1), q(0, 1)]);
    assert!(r.closed_form("L0").unwrap().taylor_at_origin(2).is_some());
}
