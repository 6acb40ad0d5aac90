use super::collect::{pair_slot, product_slot, second_slot};
use super::*;
use crate::modfun::normal_equal;
use crate::ncsymbol::{parse_expr, B0Form, MatrixAssignment};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn e(s: &str) -> SymbolExpr {
    parse_expr(s).unwrap()
}

fn w(s: &str) -> Word {
    let x = e(s);
    let first = x.words().next().unwrap().clone();
    first
}

fn poly(s: &str) -> ScalarPoly {
    e(s).coeff(&Word::empty())
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn trig_map(ts: &[TrigTerm]) -> BTreeMap<(u32, u32), ScalarPoly> {
    ts.iter().map(|t| (t.trig, t.coeff.clone())).collect()
}

fn t2_pow(n: i32) -> ScalarPoly {
    ScalarPoly::term(GaussRat::one(), ScalarMono::var_pow(Var::T2, n))
}

#[test]
fn polar_substitution_of_quadratic_monomials() {
    let ts = polar_substitute(&e("x1^2*b0"));
    let m = trig_map(&ts);
    assert_eq!(m.len(), 3);
    assert_eq!(m[&(2, 0)], poly("r^2"));
    assert_eq!(m[&(1, 1)], &poly("-2*r^2*t1") * &t2_pow(-1));
    assert_eq!(m[&(0, 2)], &poly("r^2*t1^2") * &t2_pow(-2));

    let m = trig_map(&polar_substitute(&e("x2^2*b0")));
    assert_eq!(m.len(), 1);
    assert_eq!(m[&(0, 2)], &poly("r^2") * &t2_pow(-2));

    let ts = polar_substitute(&e("3*t1*b0*k*d1(k)*b0"));
    assert_eq!(ts.len(), 1);
    assert_eq!(ts[0].trig, (0, 0));
    assert_eq!(ts[0].coeff, poly("3*t1"));
    assert!(polar_substitute(&SymbolExpr::zero()).is_empty());
}

#[test]
fn angular_moments() {
    assert_eq!(angular_moment(0, 0), q(2, 1));
    assert_eq!(angular_moment(2, 0), q(1, 1));
    assert_eq!(angular_moment(0, 2), q(1, 1));
    assert_eq!(angular_moment(2, 2), q(1, 4));
    assert_eq!(angular_moment(4, 0), q(3, 4));
    assert_eq!(angular_moment(1, 1), q(0, 1));
    assert_eq!(angular_moment(3, 2), q(0, 1));
}

#[test]
fn the_quadratic_form_integrates_to_r_squared() {
    // (ξ1 + τ1ξ2)² + τ2²ξ2² = r², so its average over φ is 2r² (as a coefficient of π).
    let x = e("(x1^2 + 2*t1*x1*x2 + t1^2*x2^2 + t2^2*x2^2)*b0");
    let a = angular_integrate(&polar_substitute(&x)).unwrap();
    assert_eq!(a, e("2*r^2*b0"));
}

#[test]
fn residual_tau2_is_reported() {
    let x = e("x2^2*b0*k*d1(k)*b0");
    let err = angular_integrate(&polar_substitute(&x)).unwrap_err();
    assert!(matches!(err, ReduceError::ResidualTau2(_)));
}

fn angular(half: Half) -> SymbolExpr {
    let b2 = compute_parametrix(&operator_symbol(half)).b2;
    angular_integrate(&polar_substitute(&b2)).unwrap()
}

fn printed_list(file: &str) -> SymbolExpr {
    let path = format!("{}/data/{}", env!("CARGO_MANIFEST_DIR"), file);
    let txt = std::fs::read_to_string(path).unwrap();
    let mut acc = SymbolExpr::zero();
    for line in txt.lines().filter(|l| !l.trim().is_empty()) {
        acc.add_assign(&e(line));
    }
    acc
}

#[test]
fn angular_output_of_the_functions_half() {
    let a = angular(Half::Functions);
    assert_eq!(a.coeff(&w("b0^2*k^2*d1(k)*d1(k)*b0")), poly("8*r^2"));
    assert_eq!(a.coeff(&w("b0*k*d1^2(k)*b0")), poly("-2"));
    assert_eq!(
        a.coeff(&w("b0^2*k^2*d2(k)*b0^2*k^3*d2(k)*b0*k")),
        poly("4*(t1^2+t2^2)*r^6")
    );
    assert_eq!(a, printed_list("angular_functions.txt"));
}

#[test]
fn angular_output_of_the_forms_half() {
    let a = angular(Half::Forms);
    assert_eq!(a, printed_list("angular_forms.txt"));
}

#[test]
fn normalization_examples() {
    let p = delta_twist_normalize(&w("b0^2*k^2*d1(k)*b0^2*k^3*d1(k)*b0*k"), 3).unwrap();
    assert_eq!(p.sigma, 8);
    assert_eq!(p.b0, vec![2, 2, 1]);
    assert_eq!(p.function(), "D22");
    assert_eq!(
        p.letters,
        vec![
            ModLetter::new(-2, w("d1(k)*k^-1")),
            ModLetter::new(1, w("k^-1*d1(k)"))
        ]
    );

    let p = delta_twist_normalize(&w("b0^2*k^3*d1^2(k)*b0"), 1).unwrap();
    assert_eq!((p.sigma, p.u_power), (4, 1));
    assert_eq!(p.function(), "L1");
    assert_eq!(p.letters, vec![ModLetter::new(0, w("k^-1*d1^2(k)"))]);

    let p = delta_twist_normalize(&w("b0*k*d1^2(k)*b0"), 0).unwrap();
    assert_eq!(p.function(), "L0");
    assert_eq!(p.letters, vec![ModLetter::new(0, w("k^-1*d1^2(k)"))]);

    // k δ(k) k^-1 inside a letter and the trailing k of the last block
    let p = delta_twist_normalize(&w("b0^3*k^4*d1^2(k)*b0*k"), 2).unwrap();
    assert_eq!(p.letters, vec![ModLetter::new(1, w("k^-1*d1^2(k)"))]);
    let p = delta_twist_normalize(&w("b0^3*k^4*d1(k)*d2(k)*b0"), 2).unwrap();
    assert_eq!(p.letters, vec![ModLetter::new(0, w("k^-2*d1(k)*d2(k)"))]);
}

#[test]
fn mismatched_words_are_reported() {
    for (word, p) in [
        ("b0*k*d1(k)", 0),
        ("b0*k*d1(k)*b0^2", 1),
        ("k*d1(k)*b0", 0),
        ("b0^2*k^3*d1^2(k)*b0", 0),
        ("b0^2*k^2*d1^2(k)*b0", 1),
        ("b0*k^2*b0", 0),
    ] {
        let r = delta_twist_normalize(&w(word), p);
        assert!(
            matches!(r, Err(ReduceError::PatternMismatch(_))),
            "{}",
            word
        );
    }
}

fn only_term(m: &ModularExpr) -> (ScalarPoly, Application) {
    assert_eq!(m.len(), 1);
    let (c, a) = m.iter().next().unwrap();
    (c.clone(), a.clone())
}

#[test]
fn radial_examples() {
    let (c, a) = only_term(&radial_integrate(&e("-2*b0*k*d1^2(k)*b0")).unwrap());
    assert_eq!(c, poly("-1"));
    assert_eq!(a.fun().name(), "L0");
    assert_eq!(a.letters(), vec![&ModLetter::new(0, w("k^-1*d1^2(k)"))]);

    let (c, a) = only_term(&radial_integrate(&e("6*r^2*b0^2*k^3*d1^2(k)*b0")).unwrap());
    assert_eq!(c, poly("3"));
    assert_eq!(a.fun().name(), "L1");

    let x = e("4*(t1^2+t2^2)*r^6*b0^2*k^2*d2(k)*b0^2*k^3*d2(k)*b0*k");
    let (c, a) = only_term(&radial_integrate(&x).unwrap());
    assert_eq!(c, poly("2*(t1^2+t2^2)"));
    assert_eq!(a.fun().name(), "D22");
    assert_eq!(
        a.letters(),
        vec![
            &ModLetter::new(-2, w("d2(k)*k^-1")),
            &ModLetter::new(1, w("k^-1*d2(k)"))
        ]
    );
    let z = radial_integrate(&SymbolExpr::zero()).unwrap();
    assert!(z.is_empty());
    assert!(z.pi);
}

#[test]
fn radial_output_matches_the_printed_one_letter_list() {
    // Functions half, terms with two b0 blocks.
    let r = radial_integrate(&angular(Half::Functions)).unwrap();
    let c = |f: &str, q2: i32, base: &str| r.coeff(f, &[ModLetter::new(q2, w(base))]);
    assert_eq!(c("L2", 1, "k^-1*d1^2(k)"), poly("-2"));
    assert_eq!(c("L2", 0, "k^-2*d1(k)*d1(k)"), poly("-4"));
    assert_eq!(c("L2", 0, "k^-1*d1d2(k)"), poly("-4*t1"));
    assert_eq!(c("L1", 1, "k^-1*d2^2(k)"), poly("t1^2+t2^2"));
    assert_eq!(c("L1", 0, "k^-1*d1^2(k)"), poly("3"));
    assert_eq!(c("L0", 0, "k^-1*d1d2(k)"), poly("-2*t1"));
    let two = |f: &str, a: i32, b: i32| {
        r.coeff(
            f,
            &[
                ModLetter::new(a, w("d1(k)*k^-1")),
                ModLetter::new(b, w("k^-1*d1(k)")),
            ],
        )
    };
    assert_eq!(two("D31", -5, 0), poly("4"));
    assert_eq!(two("D21", -3, 0), poly("-8"));
    assert_eq!(two("D11", -1, 1), poly("2"));
    assert_eq!(two("D12", -1, 0), poly("-2"));
}

#[test]
fn empty_input_collects_to_empty_output() {
    let g = collect_to_basis(&ModularExpr::new(true), Half::Functions).unwrap();
    assert!(g.expr.is_empty());
    assert!(g.assembled.is_empty());
}

#[test]
fn unknown_slot_is_unmatched() {
    let x = e("2*r^2*b0^2*k^2*d1(k)*k*d1(k)*k^-1*b0");
    let r = radial_integrate(&x).unwrap();
    let err = collect_to_basis(&r, Half::Functions).unwrap_err();
    assert!(matches!(err, ReduceError::UnmatchedTarget(_)));
}

fn registry_fn(name: &str) -> ModFun {
    Registry::standard().closed_form(name).unwrap()
}

#[test]
fn functions_half_assembles_the_printed_functions() {
    let g = integrate_half(Half::Functions).unwrap().grouped;
    let reg = Registry::standard();
    for n in ["f1", "f2", "F"] {
        let a = ModFun::new(
            n,
            2,
            crate::modfun::View::Rational,
            g.function(n).unwrap().clone(),
        );
        assert!(normal_equal(&a, &registry_fn(n)), "{} closed form", n);
        let d = reg.definition(n).unwrap().unwrap();
        assert!(normal_equal(&a, &d), "{} definition", n);
    }
    let one = ScalarPoly::one();
    let tt = ScalarPoly::tau_abs2();
    let t1 = ScalarPoly::var(Var::T1);
    let x = &g.expr;
    let letters = |s: Vec<Word>| {
        s.into_iter()
            .map(|w| ModLetter::new(0, w))
            .collect::<Vec<_>>()
    };
    const D1: (u8, u8) = (1, 0);
    const D2: (u8, u8) = (0, 1);
    assert_eq!(x.coeff("f1", &letters(second_slot(2, 0))), one);
    assert_eq!(x.coeff("f2", &letters(product_slot(D1, D1))), one);
    assert_eq!(x.coeff("F", &letters(pair_slot(D1, D1))), one);
    assert_eq!(x.coeff("f1", &letters(second_slot(0, 2))), tt);
    assert_eq!(x.coeff("f2", &letters(product_slot(D2, D2))), tt);
    assert_eq!(x.coeff("F", &letters(pair_slot(D2, D2))), tt);
    assert_eq!(x.coeff("f1", &letters(second_slot(1, 1))), t1.scale_int(2));
    assert_eq!(x.coeff("f2", &letters(product_slot(D1, D2))), t1);
    assert_eq!(x.coeff("f2", &letters(product_slot(D2, D1))), t1);
    assert_eq!(x.coeff("F", &letters(pair_slot(D1, D2))), t1);
    assert_eq!(x.coeff("F", &letters(pair_slot(D2, D1))), t1);
    assert_eq!(x.len(), 11);
    assert!(x.pi);
}

#[test]
fn forms_half_assembles_the_printed_functions() {
    let g = integrate_half(Half::Forms).unwrap().grouped;
    for n in ["g1", "g2", "G", "L"] {
        let a = ModFun::new(
            n,
            2,
            crate::modfun::View::Rational,
            g.function(n).unwrap().clone(),
        );
        assert!(normal_equal(&a, &registry_fn(n)), "{}", n);
    }
    let x = &g.expr;
    let letters = |s: Vec<Word>| {
        s.into_iter()
            .map(|w| ModLetter::new(0, w))
            .collect::<Vec<_>>()
    };
    const D1: (u8, u8) = (1, 0);
    const D2: (u8, u8) = (0, 1);
    let i_t2 = ScalarPoly::term(GaussRat::i(), ScalarMono::var(Var::T2));
    assert_eq!(x.coeff("L", &letters(pair_slot(D1, D2))), -&i_t2);
    assert_eq!(x.coeff("L", &letters(pair_slot(D2, D1))), i_t2);
    assert_eq!(
        x.coeff("G", &letters(pair_slot(D1, D2))),
        ScalarPoly::var(Var::T1)
    );
    assert_eq!(
        x.coeff("G", &letters(pair_slot(D2, D2))),
        ScalarPoly::tau_abs2()
    );
    assert_eq!(
        x.coeff("g1", &letters(second_slot(1, 1))),
        ScalarPoly::var(Var::T1).scale_int(2)
    );
    assert_eq!(x.len(), 13);
}

fn model(seed: u64) -> MatrixAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MatrixAssignment::random_free(3, 2, B0Form::Radial, &mut rng)
}

#[test]
fn angular_oracle_on_b2() {
    for half in [Half::Functions, Half::Forms] {
        let b2 = compute_parametrix(&operator_symbol(half)).b2;
        for seed in 0..2 {
            let rep = angular_oracle(&b2, &model(seed), 256).unwrap();
            assert!(rep.rel_diff < 1e-8, "{:?}: {:e}", half, rep.rel_diff);
        }
        // single terms
        for (i, (w, p)) in b2.iter().enumerate().step_by(7) {
            let t = SymbolExpr::term(p.clone(), w.clone());
            let rep = angular_oracle(&t, &model(100 + i as u64), 256).unwrap();
            assert!(rep.rel_diff < 1e-8, "{}: {:e}", print_word(w), rep.rel_diff);
        }
    }
}

#[test]
fn radial_oracle_on_single_patterns() {
    let m = model(5);
    for s in [
        "-2*b0*k*d1^2(k)*b0",
        "6*r^2*b0^2*k^3*d1^2(k)*b0",
        "-4*r^4*b0^3*k^4*d1^2(k)*b0*k",
        "4*r^6*b0^2*k^2*d1(k)*b0^2*k^3*d2(k)*b0*k",
        "8*r^4*b0*k*d2(k)*b0^2*k^2*d1(k)*b0*k",
        "8*r^6*b0^3*k^5*d1(k)*b0*d1(k)*b0*k",
        "-2*r^2*b0*k^2*d1(k)*b0*d2(k)*b0",
    ] {
        let rep = radial_oracle(&e(s), &m, 1e-11).unwrap();
        assert!(rep.rel_diff < 1e-6, "{}: {:e}", s, rep.rel_diff);
    }
}

#[test]
fn radial_oracle_on_the_full_angular_output() {
    let m = model(9);
    for half in [Half::Functions, Half::Forms] {
        let rep = radial_oracle(&angular(half), &m, 1e-11).unwrap();
        assert!(rep.rel_diff < 1e-6, "{:?}: {:e}", half, rep.rel_diff);
    }
}

#[test]
fn grouped_expression_evaluates_like_the_radial_one() {
    let m = model(13);
    for half in [Half::Functions, Half::Forms] {
        let it = integrate_half(half).unwrap();
        let a = eval_modular(&it.radial, &m).unwrap();
        let b = eval_modular(&it.grouped.expr, &m).unwrap();
        assert!(crate::ncsymbol::rel_diff(&a, &b) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn angular_moments_match_the_trapezoid_rule(p in 0u32..7, qq in 0u32..7) {
        let n = 64;
        let mut s = 0.0;
        for k in 0..n {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            s += phi.cos().powi(p as i32) * phi.sin().powi(qq as i32);
        }
        let num = s * 2.0 / n as f64;
        let m = angular_moment(p, qq);
        let exact = num_traits::ToPrimitive::to_f64(&m).unwrap();
        prop_assert!((num - exact).abs() < 1e-12);
    }

    #[test]
    fn one_letter_patterns_integrate_by_the_lemma(
        m in 0u32..3,
        a1 in 0i32..3,
        dk in prop_oneof![Just("d1^2(k)"), Just("d1(k)*d2(k)"), Just("d2(k)*k*d1(k)*k^-1")],
        seed in 0u64..1000,
    ) {
        let e_y = if dk.contains('*') { 2 } else { 1 };
        let a0 = 2 * m as i32 + 2 - e_y - a1;
        let s = format!("r^{}*b0^{}*k^{}*{}*b0*k^{}", 2 * m, m + 1, a0, dk, a1);
        let rep = radial_oracle(&e(&s), &model(seed), 1e-11).unwrap();
        prop_assert!(rep.rel_diff < 1e-6, "{}: {:e}", s, rep.rel_diff);
    }
}
