//! Free noncommutative symbol algebra over the atoms `k^n`, `δ1^a δ2^b(k)` and
//! `b0^j`, with [`ScalarPoly`] coefficients.
//!
//! `b0` stands for `(A2 + 1)^{-1}` where
//! `A2 = (ξ1² + 2τ1ξ1ξ2 + (τ1²+τ2²)ξ2²)·k²` is the leading symbol shared by
//! both Laplacian halves. Since `b0` is a function of `k` it commutes with
//! `k`, which is what the block ordering rule of canonical words encodes.

mod matrix;
mod text;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::coeffring::{GaussRat, ScalarMono, ScalarPoly, Var};

pub use matrix::{
    commutator, eval_matrix, random_hermitian, random_positive, random_unitary, rel_diff, B0Form,
    CMat, MatrixAssignment,
};
pub use text::{parse_expr, print_word, ParseError, PrintOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NcError {
    #[error("coefficient of word {0} is not xi-homogeneous")]
    MixedDegree(String),
    #[error("A2 + 1 is numerically singular for this assignment")]
    SingularB0,
    #[error("assignment lacks {0}")]
    MissingAssignment(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `k^n`, n ≠ 0.
    Kpow(i32),
    /// `δ1^a δ2^b (k)`, a + b ≥ 1.
    DK(u8, u8),
    /// `b0^j`, j ≥ 1.
    B0pow(u32),
}

impl Atom {
    pub fn dk_order(&self) -> u32 {
        match self {
            Atom::DK(a, b) => (*a + *b) as u32,
            _ => 0,
        }
    }
}

/// A word in canonical form (see [`Word::canonical`]).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Atom>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a canonical word from any atom sequence.
    pub fn new(atoms: Vec<Atom>) -> Self {
        Word(canonicalize(&atoms))
    }

    /// Wraps atoms without canonicalizing; used to test canonicalization itself.
    pub fn raw(atoms: Vec<Atom>) -> Self {
        Word(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn canonical(&self) -> Word {
        Word::new(self.0.clone())
    }

    pub fn is_canonical(&self) -> bool {
        canonicalize(&self.0) == self.0
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        Word::new(v)
    }

    pub fn b0_total(&self) -> i32 {
        self.0
            .iter()
            .map(|a| match a {
                Atom::B0pow(j) => *j as i32,
                _ => 0,
            })
            .sum()
    }

    pub fn k_total(&self) -> i32 {
        self.0
            .iter()
            .map(|a| match a {
                Atom::Kpow(n) => *n,
                _ => 0,
            })
            .sum()
    }

    pub fn dk_count(&self) -> usize {
        self.0.iter().filter(|a| matches!(a, Atom::DK(..))).count()
    }

    pub fn has_b0(&self) -> bool {
        self.0.iter().any(|a| matches!(a, Atom::B0pow(_)))
    }

    /// Reversed word with `DK(a,b)` signs collected; the sign is returned separately.
    fn starred(&self) -> (Word, bool) {
        let mut neg = false;
        let mut v: Vec<Atom> = self.0.clone();
        v.reverse();
        for a in &v {
            if let Atom::DK(x, y) = a {
                if (x + y) % 2 == 1 {
                    neg = !neg;
                }
            }
        }
        (Word::new(v), neg)
    }
}

/// Merges adjacent `k` and `b0` powers and puts `b0` first inside each
/// commuting block.
fn canonicalize(atoms: &[Atom]) -> Vec<Atom> {
    let mut out = Vec::with_capacity(atoms.len());
    let mut kexp = 0i32;
    let mut bexp = 0u32;
    let flush = |out: &mut Vec<Atom>, kexp: &mut i32, bexp: &mut u32| {
        if *bexp > 0 {
            out.push(Atom::B0pow(*bexp));
        }
        if *kexp != 0 {
            out.push(Atom::Kpow(*kexp));
        }
        *kexp = 0;
        *bexp = 0;
    };
    for a in atoms {
        match a {
            Atom::Kpow(n) => kexp += n,
            Atom::B0pow(j) => bexp += j,
            Atom::DK(..) => {
                flush(&mut out, &mut kexp, &mut bexp);
                out.push(*a);
            }
        }
    }
    flush(&mut out, &mut kexp, &mut bexp);
    out
}

/// Linear combination of canonical words.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymbolExpr {
    terms: BTreeMap<Word, ScalarPoly>,
}

impl SymbolExpr {
    pub fn zero() -> Self {
        SymbolExpr::default()
    }

    pub fn one() -> Self {
        SymbolExpr::scalar(ScalarPoly::one())
    }

    pub fn scalar(c: ScalarPoly) -> Self {
        SymbolExpr::term(c, Word::empty())
    }

    pub fn word(w: Word) -> Self {
        SymbolExpr::term(ScalarPoly::one(), w)
    }

    pub fn atom(a: Atom) -> Self {
        SymbolExpr::word(Word::new(vec![a]))
    }

    pub fn k() -> Self {
        SymbolExpr::atom(Atom::Kpow(1))
    }

    pub fn kpow(n: i32) -> Self {
        if n == 0 {
            SymbolExpr::one()
        } else {
            SymbolExpr::atom(Atom::Kpow(n))
        }
    }

    pub fn b0() -> Self {
        SymbolExpr::atom(Atom::B0pow(1))
    }

    pub fn dk(a: u8, b: u8) -> Self {
        SymbolExpr::atom(Atom::DK(a, b))
    }

    pub fn term(c: ScalarPoly, w: Word) -> Self {
        let mut e = SymbolExpr::zero();
        e.add_term(w, &c);
        e
    }

    pub fn add_term(&mut self, w: Word, c: &ScalarPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &ScalarPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> ScalarPoly {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    /// Coefficient of a word at one scalar monomial.
    pub fn coeff_at(&self, w: &Word, m: &ScalarMono) -> GaussRat {
        self.terms
            .get(w)
            .map(|p| p.coeff(m))
            .unwrap_or_else(GaussRat::zero)
    }

    /// Number of (word, monomial) pairs.
    pub fn monomial_count(&self) -> usize {
        self.terms.values().map(|p| p.len()).sum()
    }

    pub fn scale(&self, c: &ScalarPoly) -> SymbolExpr {
        let mut out = SymbolExpr::zero();
        for (w, p) in &self.terms {
            out.add_term(w.clone(), &(p * c));
        }
        out
    }

    pub fn scale_int(&self, n: i64) -> SymbolExpr {
        self.scale(&ScalarPoly::int(n))
    }

    pub fn scale_q(&self, q: &num_rational::BigRational) -> SymbolExpr {
        self.scale(&ScalarPoly::constant(GaussRat::real(q.clone())))
    }

    pub fn map_coeffs(&self, f: impl Fn(&ScalarPoly) -> ScalarPoly) -> SymbolExpr {
        let mut out = SymbolExpr::zero();
        for (w, p) in &self.terms {
            out.add_term(w.clone(), &f(p));
        }
        out
    }

    pub fn add(&self, o: &SymbolExpr) -> SymbolExpr {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }

    pub fn add_assign(&mut self, o: &SymbolExpr) {
        for (w, p) in &o.terms {
            self.add_term(w.clone(), p);
        }
    }

    pub fn sub(&self, o: &SymbolExpr) -> SymbolExpr {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> SymbolExpr {
        self.scale_int(-1)
    }

    pub fn mul(&self, o: &SymbolExpr) -> SymbolExpr {
        nc_mul(self, o)
    }

    /// Splits every coefficient into ξ-homogeneous pieces.
    pub fn terms_by_order(&self) -> BTreeMap<i32, SymbolExpr> {
        let mut out: BTreeMap<i32, SymbolExpr> = BTreeMap::new();
        for (w, p) in &self.terms {
            for (d, piece) in p.split_xi_degree() {
                out.entry(d - 2 * w.b0_total())
                    .or_default()
                    .add_term(w.clone(), &piece);
            }
        }
        out
    }

    /// Every word of `self` and its coefficient, as owned pairs.
    pub fn to_vec(&self) -> Vec<(Word, ScalarPoly)> {
        self.terms
            .iter()
            .map(|(w, p)| (w.clone(), p.clone()))
            .collect()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    /// Largest DK multi-index order present.
    pub fn max_dk_order(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|w| w.atoms().iter().map(|a| a.dk_order()))
            .max()
            .unwrap_or(0)
    }

    pub fn print(&self, opts: &PrintOptions) -> String {
        text::print_expr(self, opts)
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::print_expr(self, &PrintOptions::default()))
    }
}

impl std::str::FromStr for SymbolExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_expr(s)
    }
}

/// Product in the free algebra followed by canonicalization.
pub fn nc_mul(x: &SymbolExpr, y: &SymbolExpr) -> SymbolExpr {
    let mut out = SymbolExpr::zero();
    for (w1, p1) in &x.terms {
        for (w2, p2) in &y.terms {
            out.add_term(w1.concat(w2), &(p1 * p2));
        }
    }
    out
}

/// The quadratic form q(ξ) = ξ1² + 2τ1ξ1ξ2 + (τ1²+τ2²)ξ2² with A2 = q·k².
pub fn quad_form() -> ScalarPoly {
    let x1 = ScalarPoly::var(Var::X1);
    let x2 = ScalarPoly::var(Var::X2);
    let t1 = ScalarPoly::var(Var::T1);
    let a = &x1 * &x1;
    let b = (&(&x1 * &x2) * &t1).scale_int(2);
    let c = &(&x2 * &x2) * &ScalarPoly::tau_abs2();
    &(&a + &b) + &c
}

/// A2 = q(ξ)·k².
pub fn leading_symbol() -> SymbolExpr {
    SymbolExpr::kpow(2).scale(&quad_form())
}

fn dk_unit(j: u8) -> Atom {
    if j == 1 {
        Atom::DK(1, 0)
    } else {
        Atom::DK(0, 1)
    }
}

/// δj of a single atom.
fn delta_atom(j: u8, a: &Atom) -> SymbolExpr {
    match *a {
        Atom::Kpow(n) if n > 0 => {
            let mut out = SymbolExpr::zero();
            for i in 0..n {
                out.add_term(
                    Word::new(vec![Atom::Kpow(i), dk_unit(j), Atom::Kpow(n - 1 - i)]),
                    &ScalarPoly::one(),
                );
            }
            out
        }
        Atom::Kpow(n) => {
            // k^{-m} = (k^{-1})^m and δ(k^{-1}) = -k^{-1}δ(k)k^{-1}.
            let m = -n;
            let mut out = SymbolExpr::zero();
            for i in 0..m {
                out.add_term(
                    Word::new(vec![Atom::Kpow(-(i + 1)), dk_unit(j), Atom::Kpow(-(m - i))]),
                    &ScalarPoly::int(-1),
                );
            }
            out
        }
        Atom::DK(a1, b1) => {
            if j == 1 {
                SymbolExpr::dk(a1 + 1, b1)
            } else {
                SymbolExpr::dk(a1, b1 + 1)
            }
        }
        Atom::B0pow(m) => {
            // δ(b0) = -b0 δ(A2) b0, spread over the m factors.
            let da2 = delta(j, &leading_symbol());
            let one = SymbolExpr::b0().mul(&da2).mul(&SymbolExpr::b0()).neg();
            let mut out = SymbolExpr::zero();
            for i in 0..m {
                let left = b0_pow_expr(i);
                let right = b0_pow_expr(m - 1 - i);
                out.add_assign(&left.mul(&one).mul(&right));
            }
            out
        }
    }
}

fn b0_pow_expr(j: u32) -> SymbolExpr {
    if j == 0 {
        SymbolExpr::one()
    } else {
        SymbolExpr::atom(Atom::B0pow(j))
    }
}

/// Applies a per-atom derivation by the Leibniz rule.
fn leibniz(x: &SymbolExpr, d: impl Fn(&Atom) -> SymbolExpr) -> SymbolExpr {
    let mut out = SymbolExpr::zero();
    for (w, p) in &x.terms {
        let atoms = w.atoms();
        for (i, a) in atoms.iter().enumerate() {
            let da = d(a);
            if da.is_zero() {
                continue;
            }
            let pre = Word::raw(atoms[..i].to_vec());
            let post = Word::raw(atoms[i + 1..].to_vec());
            for (w2, p2) in &da.terms {
                let mut v = pre.0.clone();
                v.extend_from_slice(&w2.0);
                v.extend_from_slice(&post.0);
                out.add_term(Word::new(v), &(p * p2));
            }
        }
    }
    out
}

/// The derivation δj (j = 1, 2).
pub fn delta(j: u8, x: &SymbolExpr) -> SymbolExpr {
    assert!(j == 1 || j == 2, "derivation index must be 1 or 2");
    // Coefficients are scalars, constant for δj.
    leibniz(x, |a| delta_atom(j, a))
}

/// ∂/∂ξi acting on coefficients and on `b0` atoms.
pub fn dxi(i: u8, x: &SymbolExpr) -> SymbolExpr {
    assert!(i == 1 || i == 2, "xi index must be 1 or 2");
    let v = if i == 1 { Var::X1 } else { Var::X2 };
    let dq = quad_form().diff(v);
    let mut out = SymbolExpr::zero();
    for (w, p) in &x.terms {
        out.add_term(w.clone(), &p.diff(v));
    }
    let b0_rule = |a: &Atom| -> SymbolExpr {
        match *a {
            Atom::B0pow(m) => {
                let one = SymbolExpr::b0()
                    .mul(&SymbolExpr::kpow(2).scale(&dq))
                    .mul(&SymbolExpr::b0())
                    .neg();
                let mut acc = SymbolExpr::zero();
                for i in 0..m {
                    acc.add_assign(&b0_pow_expr(i).mul(&one).mul(&b0_pow_expr(m - 1 - i)));
                }
                acc
            }
            _ => SymbolExpr::zero(),
        }
    };
    out.add_assign(&leibniz(x, b0_rule));
    out
}

/// Repeated derivations: δ1^a δ2^b.
pub fn delta_multi(a: u32, b: u32, x: &SymbolExpr) -> SymbolExpr {
    let mut y = x.clone();
    for _ in 0..a {
        y = delta(1, &y);
    }
    for _ in 0..b {
        y = delta(2, &y);
    }
    y
}

/// Repeated ξ-partials: ∂1^a ∂2^b.
pub fn dxi_multi(a: u32, b: u32, x: &SymbolExpr) -> SymbolExpr {
    let mut y = x.clone();
    for _ in 0..a {
        y = dxi(1, &y);
    }
    for _ in 0..b {
        y = dxi(2, &y);
    }
    y
}

/// The involution: reverse words, `δ(k)* = -δ(k)` per derivative, conjugate coefficients.
pub fn star(x: &SymbolExpr) -> SymbolExpr {
    let mut out = SymbolExpr::zero();
    for (w, p) in &x.terms {
        let (sw, neg) = w.starred();
        let c = p.conj();
        out.add_term(sw, &if neg { -&c } else { c });
    }
    out
}

/// Order of one term: ξ-degree minus twice the total `b0` power.
pub fn order_of(w: &Word, c: &ScalarPoly) -> Result<i32, NcError> {
    let d = c
        .xi_degree()
        .ok_or_else(|| NcError::MixedDegree(text::print_word(w)))?;
    Ok(d - 2 * w.b0_total())
}

/// The sum of the terms of exactly order `n`.
pub fn extract_order(x: &SymbolExpr, n: i32) -> SymbolExpr {
    x.terms_by_order().remove(&n).unwrap_or_default()
}

#[cfg(test)]
mod tests;
