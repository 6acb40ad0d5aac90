use super::*;
use crate::modfun::normal_equal;
use crate::ncsymbol::parse_expr;
use crate::reduce::{integrate_half, ModLetter, ModularExpr};
use proptest::prelude::*;
use std::sync::OnceLock;

fn halves() -> &'static (LogBasisExpr, LogBasisExpr) {
    static H: OnceLock<(LogBasisExpr, LogBasisExpr)> = OnceLock::new();
    H.get_or_init(|| {
        let f = k_to_log(&integrate_half(Half::Functions).unwrap().grouped).unwrap();
        let g = k_to_log(&integrate_half(Half::Forms).unwrap().grouped).unwrap();
        (f, g)
    })
}

fn closed(name: &str) -> ModFun {
    Registry::standard().closed_form(name).unwrap()
}

fn assert_named(x: &LogBasisExpr, names: &[&str]) {
    for n in names {
        let f = x.function(n).unwrap_or_else(|| panic!("{} missing", n));
        assert!(
            normal_equal(f, &closed(n)),
            "{} differs from its closed form",
            n
        );
        if let Some(d) = Registry::standard().definition(n).unwrap() {
            assert!(normal_equal(f, &d), "{} differs from its definition", n);
        }
    }
}

#[test]
fn empty_input_gives_empty_output() {
    let g = Grouped {
        half: Half::Functions,
        expr: ModularExpr::new(true),
        assembled: Default::default(),
    };
    let x = k_to_log(&g).unwrap();
    assert!(x.is_empty());
    assert!(x.minus_pi_over_tau2);
    let c = assemble_curvature(&x, &x, false).unwrap();
    assert!(c.is_empty());
}

#[test]
fn single_f1_term() {
    let reg = Registry::standard();
    let f1 = reg.closed_form("f1").unwrap();
    let w = parse_expr("k^-1*d1^2(k)").unwrap();
    let word = w.words().next().unwrap().clone();
    let mut e = ModularExpr::new(true);
    e.add(
        &ScalarPoly::one(),
        Application::One {
            fun: f1.clone(),
            arg: ModLetter::new(0, word),
        },
    );
    let g = Grouped {
        half: Half::Functions,
        expr: e,
        assembled: Default::default(),
    };
    let x = k_to_log(&g).unwrap();
    assert_eq!(x.len(), 2);
    assert_eq!(x.coeff("K", LogTarget::Linear(2, 0)), ScalarPoly::one());
    assert!(normal_equal(x.function("K").unwrap(), &closed("K")));
    // the bilinear part is −2 f1(e^{s+t}) g(e^s, e^t)
    let want = f1
        .rat()
        .at_product()
        .mul(reg.closed_form("g").unwrap().rat())
        .scale(&BigRational::from_integer((-2).into()));
    let h = x.function("H").unwrap();
    assert!(h.rat().equals(&want));
    assert_eq!(x.coeff("H", LogTarget::Pair(1, 1)), ScalarPoly::one());
}

#[test]
fn unknown_letters_are_unmatched() {
    let f1 = closed("f1");
    let w = parse_expr("k^-1*d1(k)*k").unwrap();
    let word = w.words().next().unwrap().clone();
    let mut e = ModularExpr::new(true);
    e.add(
        &ScalarPoly::one(),
        Application::One {
            fun: f1,
            arg: ModLetter::new(0, word),
        },
    );
    let g = Grouped {
        half: Half::Functions,
        expr: e,
        assembled: Default::default(),
    };
    assert!(matches!(
        k_to_log(&g),
        Err(LogFormError::UnmatchedTarget(_))
    ));
}

#[test]
fn functions_half_in_log_basis() {
    let (f, _) = halves();
    f.check_shape("K", "H", None).unwrap();
    assert_named(f, &["K", "H"]);
    assert!(f.minus_pi_over_tau2);
}

#[test]
fn forms_half_in_log_basis() {
    let (_, g) = halves();
    g.check_shape("S", "T", Some(("W", -1))).unwrap();
    assert_named(g, &["S", "T", "W"]);
}

#[test]
fn curvature_functions() {
    let (f, g) = halves();
    let r = assemble_curvature(f, g, false).unwrap();
    r.check_shape("R1", "R2", Some(("W", -1))).unwrap();
    assert_named(&r, &["R1", "R2", "W"]);
    let rg = assemble_curvature(f, g, true).unwrap();
    rg.check_shape("R1g", "R2g", Some(("W", 1))).unwrap();
    assert_named(&rg, &["R1g", "R2g", "W"]);
    // same W, opposite signs
    assert!(normal_equal(
        r.function("W").unwrap(),
        rg.function("W").unwrap()
    ));
    assert_eq!(
        r.coeff("W", LogTarget::Pair(1, 2)),
        -&rg.coeff("W", LogTarget::Pair(1, 2))
    );
}

#[test]
fn closed_curvature_has_the_checked_shape() {
    let t = closed_curvature(false).unwrap();
    t.check_shape("R1", "R2", Some(("W", -1))).unwrap();
    assert!(t.check_shape("R1", "R2", Some(("W", 1))).is_err());
    assert_eq!(t.len(), 9);
    let tg = closed_curvature(true).unwrap();
    tg.check_shape("R1g", "R2g", Some(("W", 1))).unwrap();
}

#[test]
fn half_forms_have_the_checked_shapes() {
    let f = half_form(Half::Functions).unwrap();
    f.check_shape("K", "H", None).unwrap();
    let g = half_form(Half::Forms).unwrap();
    g.check_shape("S", "T", Some(("W", -1))).unwrap();
    assert_eq!((f.len(), g.len()), (7, 9));
}

#[test]
fn display_lists_every_term() {
    let t = closed_curvature(false).unwrap();
    let s = t.to_string();
    assert!(s.starts_with("-π/τ2"));
    assert_eq!(s.lines().count(), 11);
    assert!(s.contains("R1(log Δ)(δ1²(log k))"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn assembled_values_match_closed_forms(s in -4.0f64..4.0, t in -4.0f64..4.0) {
        prop_assume!(s.abs() > 0.05 && t.abs() > 0.05 && (s + t).abs() > 0.05);
        let (f, g) = halves();
        let r = assemble_curvature(f, g, false).unwrap();
        for n in ["R1", "R2", "W"] {
            let a = r.function(n).unwrap().value_st(s, t);
            let b = closed(n).value_st(s, t);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{}: {} vs {}", n, a, b);
        }
    }
}
