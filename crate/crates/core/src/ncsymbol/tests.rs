use super::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn atom_strategy() -> impl Strategy<Value = Atom> {
    prop_oneof![
        3 => k_atom_strategy(),
        1 => (1u32..3).prop_map(Atom::B0pow),
    ]
}

/// Atoms without `b0`: on these words the free-algebra identities hold
/// literally. With `b0` they hold only modulo `b0 (q k² + 1) = 1`, which the
/// matrix-model tests cover.
fn k_atom_strategy() -> impl Strategy<Value = Atom> {
    prop_oneof![
        prop_oneof![(-2i32..0), (1i32..4)].prop_map(Atom::Kpow),
        prop_oneof![
            Just((1u8, 0u8)),
            Just((0, 1)),
            Just((2, 0)),
            Just((1, 1)),
            Just((0, 2))
        ]
        .prop_map(|(a, b)| Atom::DK(a, b)),
    ]
}

fn mono_strategy() -> impl Strategy<Value = ScalarMono> {
    (0i32..2, 0i32..2, 0i32..2, -1i32..2).prop_map(|(a, b, c, d)| ScalarMono {
        exps: [a, b, 0, c, d],
    })
}

fn expr_strategy() -> impl Strategy<Value = SymbolExpr> {
    expr_from(atom_strategy().boxed())
}

fn k_expr_strategy() -> impl Strategy<Value = SymbolExpr> {
    expr_from(k_atom_strategy().boxed())
}

fn expr_from(atoms: BoxedStrategy<Atom>) -> impl Strategy<Value = SymbolExpr> {
    prop::collection::vec(
        (
            -3i64..4,
            -2i64..3,
            mono_strategy(),
            prop::collection::vec(atoms, 0..4),
        ),
        1..4,
    )
    .prop_map(|terms| {
        let mut e = SymbolExpr::zero();
        for (re, im, m, atoms) in terms {
            let c = GaussRat::new(
                num_rational::BigRational::from_integer(re.into()),
                num_rational::BigRational::from_integer(im.into()),
            );
            e.add_term(Word::new(atoms), &ScalarPoly::term(c, m));
        }
        e
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn canonical_words() {
    let w = Word::new(vec![
        Atom::Kpow(2),
        Atom::B0pow(1),
        Atom::Kpow(-2),
        Atom::DK(1, 0),
        Atom::Kpow(1),
        Atom::B0pow(2),
    ]);
    assert_eq!(
        w.atoms(),
        &[
            Atom::B0pow(1),
            Atom::DK(1, 0),
            Atom::B0pow(2),
            Atom::Kpow(1)
        ]
    );
    assert!(w.is_canonical());
    assert!(!Word::raw(vec![Atom::Kpow(1), Atom::B0pow(1)]).is_canonical());
}

#[test]
fn delta_of_k_powers() {
    let d = delta(1, &SymbolExpr::kpow(2));
    assert_eq!(d, parse_expr("k*d1(k) + d1(k)*k").unwrap());
    let d = delta(2, &SymbolExpr::kpow(-1));
    assert_eq!(d, parse_expr("-k^-1*d2(k)*k^-1").unwrap());
    // δ(k^-1 k) = 0
    let prod = SymbolExpr::kpow(-1).mul(&SymbolExpr::k());
    assert!(delta(1, &prod).is_zero());
}

#[test]
fn delta_of_b0() {
    // δ1(b0) = -b0 q (k δ1k + δ1k k) b0
    let lhs = delta(1, &SymbolExpr::b0());
    let rhs = SymbolExpr::b0()
        .mul(&parse_expr("k*d1(k) + d1(k)*k").unwrap())
        .mul(&SymbolExpr::b0())
        .scale(&quad_form())
        .neg();
    assert_eq!(lhs, rhs);
}

#[test]
fn dxi_of_b0() {
    let lhs = dxi(1, &SymbolExpr::b0());
    let expect = parse_expr("-(2*x1 + 2*t1*x2)*b0^2*k^2").unwrap();
    assert_eq!(lhs, expect);
}

#[test]
fn orders() {
    let a2 = leading_symbol();
    let (w, c) = a2.iter().next().unwrap();
    assert_eq!(order_of(w, c).unwrap(), 2);
    assert_eq!(
        order_of(&Word::new(vec![Atom::B0pow(3)]), &ScalarPoly::var(Var::X1)).unwrap(),
        -5
    );
    let mixed = &ScalarPoly::var(Var::X1) + &ScalarPoly::one();
    assert!(order_of(&Word::empty(), &mixed).is_err());
    let e = parse_expr("x1*b0 + b0 + x1^2*k").unwrap();
    assert_eq!(extract_order(&e, -1), parse_expr("x1*b0").unwrap());
    assert_eq!(extract_order(&e, 2), parse_expr("x1^2*k").unwrap());
}

#[test]
fn star_signs() {
    let e = parse_expr("(2+I)*k*d1(k)*d1^2(k)*b0").unwrap();
    let s = star(&e);
    assert_eq!(s, parse_expr("-(2-I)*b0*d1^2(k)*d1(k)*k").unwrap());
}

#[test]
fn dual_number_derivative_matches_symbolic() {
    let mut r = rng(7);
    let m = MatrixAssignment::random_free(4, 3, B0Form::Xi, &mut r);
    let e = parse_expr("x1*x2*b0^2*k*d1(k)*b0*k^3 + t1*x2^3*b0*d2^2(k)*b0^3").unwrap();
    for i in 1..=2 {
        let num = m.eval_dxi(&e, i).unwrap();
        let sym = eval_matrix(&dxi(i, &e), &m).unwrap();
        assert!(rel_diff(&num, &sym) < 1e-10);
    }
}

#[test]
fn inner_model_delta_of_b0() {
    let mut r = rng(11);
    let m = MatrixAssignment::random_inner(4, 4, B0Form::Xi, &mut r);
    let b0 = eval_matrix(&SymbolExpr::b0(), &m).unwrap();
    for j in 1..=2 {
        let lhs = eval_matrix(&delta(j, &SymbolExpr::b0()), &m).unwrap();
        let rhs = m.apply_delta(j, &b0).unwrap();
        assert!(rel_diff(&lhs, &rhs) < 1e-10);
    }
}

#[test]
fn singular_b0_detected() {
    let mut r = rng(3);
    let mut m = MatrixAssignment::random_free(3, 1, B0Form::Radial, &mut r);
    // q k² + 1 is singular when q = -1/λ² for an eigenvalue λ of k.
    let lam = m.k.clone().symmetric_eigenvalues()[0];
    m.set_scalar(Var::Rv, num_complex::Complex64::new(0.0, 1.0 / lam));
    assert_eq!(
        eval_matrix(&SymbolExpr::b0(), &m).unwrap_err(),
        NcError::SingularB0
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mul_is_associative(a in expr_strategy(), b in expr_strategy(), c in expr_strategy()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn delta_is_a_derivation(a in k_expr_strategy(), b in k_expr_strategy(), j in 1u8..3) {
        let lhs = delta(j, &a.mul(&b));
        let rhs = delta(j, &a).mul(&b).add(&a.mul(&delta(j, &b)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dxi_is_a_derivation(a in expr_strategy(), b in expr_strategy(), i in 1u8..3) {
        let lhs = dxi(i, &a.mul(&b));
        let rhs = dxi(i, &a).mul(&b).add(&a.mul(&dxi(i, &b)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivations_commute(a in k_expr_strategy()) {
        prop_assert_eq!(delta(1, &delta(2, &a)), delta(2, &delta(1, &a)));
        prop_assert_eq!(dxi(1, &delta(2, &a)), delta(2, &dxi(1, &a)));
        prop_assert_eq!(dxi(1, &dxi(2, &a)), dxi(2, &dxi(1, &a)));
    }

    #[test]
    fn star_is_an_anti_involution(a in expr_strategy(), b in expr_strategy()) {
        prop_assert_eq!(star(&star(&a)), a.clone());
        prop_assert_eq!(star(&a.mul(&b)), star(&b).mul(&star(&a)));
    }

    #[test]
    fn star_commutes_with_delta(a in k_expr_strategy()) {
        prop_assert_eq!(star(&delta(1, &a)), delta(1, &star(&a)).neg());
    }

    #[test]
    fn print_parse_round_trip(a in expr_strategy(), grouped in any::<bool>()) {
        let txt = a.print(&PrintOptions { grouped_k2: grouped });
        prop_assert_eq!(parse_expr(&txt).unwrap(), a);
    }

    #[test]
    fn matrix_model_respects_products(a in expr_strategy(), b in expr_strategy(), seed in 0u64..1000) {
        let m = MatrixAssignment::random_free(3, 2, B0Form::Xi, &mut rng(seed));
        let ab = eval_matrix(&a.mul(&b), &m).unwrap();
        let prod = eval_matrix(&a, &m).unwrap() * eval_matrix(&b, &m).unwrap();
        prop_assert!(rel_diff(&ab, &prod) < 1e-10);
        let raw: Vec<Atom> = vec![Atom::Kpow(2), Atom::B0pow(1), Atom::Kpow(-1), Atom::B0pow(1)];
        let mut direct = CMat::identity(3, 3);
        for x in &raw {
            direct *= eval_matrix(&SymbolExpr::atom(*x), &m).unwrap();
        }
        let canon = eval_matrix(&SymbolExpr::word(Word::new(raw)), &m).unwrap();
        prop_assert!(rel_diff(&direct, &canon) < 1e-10);
    }

    #[test]
    fn matrix_model_respects_star(a in expr_strategy(), seed in 0u64..1000) {
        let m = MatrixAssignment::random_free(3, 2, B0Form::Xi, &mut rng(seed));
        let lhs = eval_matrix(&star(&a), &m).unwrap();
        let rhs = eval_matrix(&a, &m).unwrap().adjoint();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn inner_model_respects_delta(a in expr_strategy(), j in 1u8..3, seed in 0u64..1000) {
        let m = MatrixAssignment::random_inner(3, 4, B0Form::Xi, &mut rng(seed));
        let lhs = eval_matrix(&delta(j, &a), &m).unwrap();
        let rhs = m.apply_delta(j, &eval_matrix(&a, &m).unwrap()).unwrap();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-10);
        let d12 = eval_matrix(&delta(1, &delta(2, &a)), &m).unwrap();
        let d21 = eval_matrix(&delta(2, &delta(1, &a)), &m).unwrap();
        prop_assert!(rel_diff(&d12, &d21) < 1e-10);
        let sd = eval_matrix(&star(&delta(j, &a)), &m).unwrap();
        let ds = eval_matrix(&delta(j, &star(&a)), &m).unwrap();
        prop_assert!(rel_diff(&sd, &-ds) < 1e-10);
    }
}
