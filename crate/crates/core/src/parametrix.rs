//! Operator symbols of the two Laplacian halves and the resolvent parametrix
//! `b0 + b1 + b2` obtained from `(b0 + b1 + b2 + ...)∘((a2 + 1) + a1 + a0) ∼ 1`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::coeffring::{ScalarPoly, Var};
use crate::ncsymbol::{
    delta, delta_multi, dxi, dxi_multi, leading_symbol, quad_form, star, Atom, SymbolExpr, Word,
};

/// Which half of the Laplacian on the torus a symbol belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    /// `k ∂* ∂ k`, acting on functions.
    Functions,
    /// `∂* k² ∂`, acting on (1,0)-forms.
    Forms,
}

impl Half {
    pub fn name(self) -> &'static str {
        match self {
            Half::Functions => "functions",
            Half::Forms => "forms",
        }
    }

    pub fn from_name(s: &str) -> Option<Half> {
        match s {
            "functions" => Some(Half::Functions),
            "forms" => Some(Half::Forms),
            _ => None,
        }
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSymbol {
    pub a2: SymbolExpr,
    pub a1: SymbolExpr,
    pub a0: SymbolExpr,
    pub half: Half,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParametrixTerms {
    pub b0: SymbolExpr,
    pub b1: SymbolExpr,
    pub b2: SymbolExpr,
}

fn x(v: Var) -> ScalarPoly {
    ScalarPoly::var(v)
}

fn word(atoms: &[Atom]) -> Word {
    Word::new(atoms.to_vec())
}

pub fn symbol_functions() -> OperatorSymbol {
    let t1 = x(Var::T1);
    let tt = ScalarPoly::tau_abs2();
    let (x1, x2) = (x(Var::X1), x(Var::X2));
    let kd1 = word(&[Atom::Kpow(1), Atom::DK(1, 0)]);
    let kd2 = word(&[Atom::Kpow(1), Atom::DK(0, 1)]);
    let mut a1 = SymbolExpr::zero();
    a1.add_term(kd1.clone(), &x1.scale_int(2));
    a1.add_term(kd2.clone(), &(&tt * &x2).scale_int(2));
    a1.add_term(kd2, &(&t1 * &x1).scale_int(2));
    a1.add_term(kd1, &(&t1 * &x2).scale_int(2));
    let mut a0 = SymbolExpr::zero();
    a0.add_term(word(&[Atom::Kpow(1), Atom::DK(2, 0)]), &ScalarPoly::one());
    a0.add_term(word(&[Atom::Kpow(1), Atom::DK(0, 2)]), &tt);
    a0.add_term(word(&[Atom::Kpow(1), Atom::DK(1, 1)]), &t1.scale_int(2));
    OperatorSymbol {
        a2: leading_symbol(),
        a1,
        a0,
        half: Half::Functions,
    }
}

pub fn symbol_forms() -> OperatorSymbol {
    let k2 = SymbolExpr::kpow(2);
    let d1 = delta(1, &k2);
    let d2 = delta(2, &k2);
    let (x1, x2) = (x(Var::X1), x(Var::X2));
    let tau = ScalarPoly::tau();
    let tau_bar = ScalarPoly::tau_bar();
    let c1 = d1.add(&d2.scale(&tau)).scale(&x1).add(
        &d1.scale(&tau_bar)
            .add(&d2.scale(&ScalarPoly::tau_abs2()))
            .scale(&x2),
    );
    OperatorSymbol {
        a2: leading_symbol(),
        a1: c1,
        a0: SymbolExpr::zero(),
        half: Half::Forms,
    }
}

pub fn operator_symbol(half: Half) -> OperatorSymbol {
    match half {
        Half::Functions => symbol_functions(),
        Half::Forms => symbol_forms(),
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn inv_fact(l1: u32, l2: u32) -> BigRational {
    BigRational::new(BigInt::from(1), factorial(l1) * factorial(l2))
}

/// Maximal ξ-degree over all coefficients.
fn max_xi_degree(x: &SymbolExpr) -> i32 {
    x.iter()
        .flat_map(|(_, p)| p.iter().map(|(m, _)| m.xi_degree()))
        .max()
        .unwrap_or(0)
}

/// Asymptotic expansion of the adjoint symbol,
/// `Σ 1/(ℓ1!ℓ2!) ∂^ℓ δ^ℓ (x*)`. The input must be polynomial in ξ, so the
/// sum is finite.
pub fn adjoint_symbol(x: &SymbolExpr) -> SymbolExpr {
    assert!(
        x.words().all(|w| !w.has_b0()),
        "adjoint_symbol needs a symbol polynomial in xi"
    );
    let xs = star(x);
    let top = max_xi_degree(&xs).max(0) as u32;
    let mut out = SymbolExpr::zero();
    for l in 0..=top {
        for l1 in 0..=l {
            let l2 = l - l1;
            let t = dxi_multi(l1, l2, &delta_multi(l1, l2, &xs));
            out.add_assign(&t.scale_q(&inv_fact(l1, l2)));
        }
    }
    out
}

/// Largest literal order present in `x`.
fn max_order(x: &SymbolExpr) -> i32 {
    x.terms_by_order().keys().next_back().copied().unwrap_or(0)
}

/// Symbol of a product, `Σ 1/(ℓ1!ℓ2!) ∂^ℓ(x) δ^ℓ(y)`, keeping only terms of
/// order at least `min_order`.
pub fn compose_symbols(x: &SymbolExpr, y: &SymbolExpr, min_order: i32) -> SymbolExpr {
    if x.is_zero() || y.is_zero() {
        return SymbolExpr::zero();
    }
    let top = max_order(x) + max_order(y) - min_order;
    let mut out = SymbolExpr::zero();
    for l in 0..=top.max(0) as u32 {
        for l1 in 0..=l {
            let l2 = l - l1;
            let dx = dxi_multi(l1, l2, x);
            if dx.is_zero() {
                continue;
            }
            let dy = delta_multi(l1, l2, y);
            let t = dx.mul(&dy).scale_q(&inv_fact(l1, l2));
            for (ord, piece) in t.terms_by_order() {
                if ord >= min_order {
                    out.add_assign(&piece);
                }
            }
        }
    }
    out
}

/// Runs the recursion for `b1` and `b2`.
pub fn compute_parametrix(op: &OperatorSymbol) -> ParametrixTerms {
    let b0 = SymbolExpr::b0();
    let a2 = &op.a2;
    let a1 = &op.a1;
    let a0 = &op.a0;
    let tail = |x: &SymbolExpr| x.mul(&b0);

    let mut s1 = b0.mul(a1).mul(&b0);
    s1.add_assign(&tail(&dxi(1, &b0).mul(&delta(1, a2))));
    s1.add_assign(&tail(&dxi(2, &b0).mul(&delta(2, a2))));
    let b1 = s1.neg();

    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut s2 = b0.mul(a0).mul(&b0);
    s2.add_assign(&b1.mul(a1).mul(&b0));
    s2.add_assign(&tail(&dxi(1, &b0).mul(&delta(1, a1))));
    s2.add_assign(&tail(&dxi(2, &b0).mul(&delta(2, a1))));
    s2.add_assign(&tail(&dxi(1, &b1).mul(&delta(1, a2))));
    s2.add_assign(&tail(&dxi(2, &b1).mul(&delta(2, a2))));
    s2.add_assign(&tail(&dxi_multi(2, 0, &b0).mul(&delta_multi(2, 0, a2))).scale_q(&half));
    s2.add_assign(&tail(&dxi_multi(0, 2, &b0).mul(&delta_multi(0, 2, a2))).scale_q(&half));
    s2.add_assign(&tail(&dxi_multi(1, 1, &b0).mul(&delta_multi(1, 1, a2))));
    let b2 = s2.neg();

    ParametrixTerms { b0, b1, b2 }
}

/// Result of checking `(b0 + b1 + b2)∘((a2 + 1) + a1 + a0)` order by order.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Reduced residual at orders 0, −1, −2 (with `1` counted as order 2).
    pub residuals: Vec<(i32, SymbolExpr)>,
}

impl ResidualReport {
    pub fn ok(&self) -> bool {
        self.residuals.iter().all(|(ord, r)| {
            if *ord == 0 {
                *r == SymbolExpr::one()
            } else {
                r.is_zero()
            }
        })
    }
}

/// Rewrites with `b0 (q k² + 1) = 1` applied to the last commuting block of
/// each word until no coefficient monomial has ξ1-degree ≥ 2 in front of a
/// trailing `b0`. Since `q` is monic of degree 2 in ξ1 this is division by
/// a single relation and gives a unique normal form.
pub fn reduce_resolvent(x: &SymbolExpr) -> SymbolExpr {
    let rest_of_q = &quad_form() - &(&ScalarPoly::var(Var::X1) * &ScalarPoly::var(Var::X1));
    let mut cur = x.clone();
    loop {
        let mut keep = SymbolExpr::zero();
        let mut changed = false;
        for (w, p) in cur.iter() {
            let Some((prefix, j, n)) = last_block(w) else {
                keep.add_term(w.clone(), p);
                continue;
            };
            for (m, c) in p.iter() {
                let mono = ScalarPoly::term(c.clone(), *m);
                let e1 = m.exp(Var::X1);
                if j == 0 || e1 < 2 {
                    keep.add_term(w.clone(), &mono);
                    continue;
                }
                changed = true;
                // ξ1² b0^j k^n = b0^{j-1} k^{n-2} - b0^j k^{n-2} - (q - ξ1²) b0^j k^n
                let lowered = ScalarPoly::term(c.clone(), m.with_exp(Var::X1, e1 - 2));
                let shorter = with_block(&prefix, j - 1, n - 2);
                let same_j = with_block(&prefix, j, n - 2);
                keep.add_term(shorter, &lowered);
                keep.add_term(same_j, &-&lowered);
                keep.add_term(w.clone(), &-&(&lowered * &rest_of_q));
            }
        }
        cur = keep;
        if !changed {
            return cur;
        }
    }
}

/// Splits a word into the atoms before its trailing commuting block and the
/// block's `b0` and `k` exponents.
fn last_block(w: &Word) -> Option<(Vec<Atom>, u32, i32)> {
    let atoms = w.atoms();
    let start = atoms
        .iter()
        .rposition(|a| matches!(a, Atom::DK(..)))
        .map(|i| i + 1)
        .unwrap_or(0);
    let (mut j, mut n) = (0u32, 0i32);
    for a in &atoms[start..] {
        match a {
            Atom::B0pow(e) => j += e,
            Atom::Kpow(e) => n += e,
            Atom::DK(..) => unreachable!(),
        }
    }
    if j == 0 {
        return None;
    }
    Some((atoms[..start].to_vec(), j, n))
}

fn with_block(prefix: &[Atom], j: u32, n: i32) -> Word {
    let mut v = prefix.to_vec();
    if j > 0 {
        v.push(Atom::B0pow(j));
    }
    v.push(Atom::Kpow(n));
    Word::new(v)
}

/// Checks that the truncated composition is `1 + 0 + 0` at orders 0, −1, −2,
/// grading `b_j` as `−2−j` and `a_k'` as `k` (so `1` in `a2 + 1` has order 2).
pub fn verify_parametrix(p: &ParametrixTerms, op: &OperatorSymbol) -> ResidualReport {
    let bs = [&p.b0, &p.b1, &p.b2];
    let a2p = op.a2.add(&SymbolExpr::one());
    let as_ = [&a2p, &op.a1, &op.a0];
    let mut residuals = Vec::new();
    for n in 0..=2u32 {
        let mut total = SymbolExpr::zero();
        for (j, b) in bs.iter().enumerate() {
            for (kk, a) in as_.iter().enumerate() {
                let used = j as u32 + kk as u32;
                if used > n {
                    continue;
                }
                let l = n - used;
                for l1 in 0..=l {
                    let l2 = l - l1;
                    let db = dxi_multi(l1, l2, b);
                    let da = delta_multi(l1, l2, a);
                    total.add_assign(&db.mul(&da).scale_q(&inv_fact(l1, l2)));
                }
            }
        }
        residuals.push((-(n as i32), reduce_resolvent(&total)));
    }
    ResidualReport { residuals }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::{GaussRat, ScalarMono};
    use crate::ncsymbol::{order_of, parse_expr};

    fn mono(e: [i32; 5]) -> ScalarMono {
        ScalarMono { exps: e }
    }

    fn w(s: &str) -> Word {
        let e = parse_expr(s).unwrap();
        let first = e.words().next().unwrap().clone();
        first
    }

    #[test]
    fn functions_symbol_examples() {
        let op = symbol_functions();
        assert_eq!(
            op.a2.coeff_at(&w("k^2"), &mono([2, 0, 0, 0, 0])),
            GaussRat::one()
        );
        assert_eq!(
            op.a1.coeff_at(&w("k*d2(k)"), &mono([1, 0, 0, 1, 0])),
            GaussRat::from_int(2)
        );
        assert_eq!(
            op.a0.coeff_at(&w("k*d1d2(k)"), &mono([0, 0, 0, 1, 0])),
            GaussRat::from_int(2)
        );
    }

    #[test]
    fn forms_symbol_examples() {
        let op = symbol_forms();
        // τ at ξ1 on k·δ2(k), τ̄ at ξ2 on δ1(k)·k
        let kd2 = w("k*d2(k)");
        assert_eq!(
            op.a1.coeff_at(&kd2, &mono([1, 0, 0, 1, 0])),
            GaussRat::one()
        );
        assert_eq!(op.a1.coeff_at(&kd2, &mono([1, 0, 0, 0, 1])), GaussRat::i());
        let d1k = w("d1(k)*k");
        assert_eq!(
            op.a1.coeff_at(&d1k, &mono([0, 1, 0, 1, 0])),
            GaussRat::one()
        );
        assert_eq!(
            op.a1.coeff_at(&d1k, &mono([0, 1, 0, 0, 1])),
            -&GaussRat::i()
        );
        assert!(op.a0.is_zero());
    }

    fn sigma_d() -> SymbolExpr {
        SymbolExpr::scalar(
            &ScalarPoly::var(Var::X1) + &(&ScalarPoly::tau_bar() * &ScalarPoly::var(Var::X2)),
        )
    }

    fn sigma_d_star() -> SymbolExpr {
        SymbolExpr::scalar(
            &ScalarPoly::var(Var::X1) + &(&ScalarPoly::tau() * &ScalarPoly::var(Var::X2)),
        )
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(adjoint_symbol(&sigma_d()), sigma_d_star());
        assert_eq!(adjoint_symbol(&SymbolExpr::k()), SymbolExpr::k());
        let e = parse_expr("x1*d1(k)").unwrap();
        assert_eq!(adjoint_symbol(&adjoint_symbol(&e)), e);
    }

    #[test]
    fn compose_examples() {
        let x1 = parse_expr("x1").unwrap();
        assert_eq!(
            compose_symbols(&x1, &SymbolExpr::k(), 0),
            parse_expr("x1*k + d1(k)").unwrap()
        );
        assert_eq!(
            compose_symbols(&SymbolExpr::k(), &x1, -5),
            parse_expr("x1*k").unwrap()
        );
        let inner = compose_symbols(&SymbolExpr::kpow(2), &sigma_d(), -10);
        let full = compose_symbols(&sigma_d_star(), &inner, -10);
        let op = symbol_forms();
        assert_eq!(full, op.a2.add(&op.a1));
    }

    #[test]
    fn orders_are_homogeneous() {
        for half in [Half::Functions, Half::Forms] {
            let p = compute_parametrix(&operator_symbol(half));
            for (expr, ord) in [(&p.b1, -3), (&p.b2, -4)] {
                for (word, c) in expr.iter() {
                    assert_eq!(order_of(word, c).unwrap(), ord, "{} {}", half, word.len());
                }
            }
        }
    }

    #[test]
    fn residual_vanishes() {
        for half in [Half::Functions, Half::Forms] {
            let op = operator_symbol(half);
            let p = compute_parametrix(&op);
            let rep = verify_parametrix(&p, &op);
            for (ord, r) in &rep.residuals {
                assert!(r.len() < 5, "{} order {}: {}", half, ord, r);
            }
            assert!(rep.ok(), "{}", half);
        }
    }

    #[test]
    fn b2_spot_checks() {
        let p = compute_parametrix(&symbol_functions());
        let b2 = &p.b2;
        assert_eq!(
            b2.coeff_at(&w("b0*k*d1^2(k)*b0"), &ScalarMono::one()),
            GaussRat::from_int(-1)
        );
        assert_eq!(
            b2.coeff_at(&w("b0^2*k^2*d1(k)*d1(k)*b0"), &mono([2, 0, 0, 0, 0])),
            GaussRat::from_int(6)
        );
        assert_eq!(
            b2.coeff_at(&w("b0^3*k^4*d1(k)*b0*k*d1(k)*b0*k"), &mono([6, 0, 0, 0, 0])),
            GaussRat::from_int(8)
        );
        // one literal term plus two from the expansion of 2ξ1²b0²k²δ1²(k²)b0
        let p = compute_parametrix(&symbol_forms());
        assert_eq!(
            p.b2.coeff_at(&w("b0^2*k^3*d1^2(k)*b0"), &mono([2, 0, 0, 0, 0])),
            GaussRat::from_int(3)
        );
    }
}
