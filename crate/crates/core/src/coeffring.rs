//! Exact commutative coefficients: Gaussian rationals and Laurent polynomials
//! in the scalar indeterminates ξ1, ξ2, r, τ1, τ2.
//!
//! Only τ2 may carry a negative exponent. |τ|² never appears as an
//! indeterminate of its own; callers expand it as τ1² + τ2².

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::mp::{self, MpComplex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("no value assigned to indeterminate {0}")]
    MissingAssignment(Var),
    #[error("tau2 = 0 with a negative tau2 exponent")]
    DivisionByZero,
}

/// A Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        GaussRat::new(BigRational::new(n.into(), d.into()), BigRational::zero())
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat::new(re, BigRational::zero())
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn zero() -> Self {
        GaussRat::from_int(0)
    }

    pub fn one() -> Self {
        GaussRat::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        GaussRat::new(&self.re * q, &self.im * q)
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for GaussRat {
    /// Prints `(a/b)`, `(c/d*I)` or `(a/b+c/d*I)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "({})", fmt_rat(&self.re))
        } else if self.re.is_zero() {
            write!(f, "({}*I)", fmt_rat(&self.im))
        } else if self.im.is_negative() {
            write!(
                f,
                "({}-{}*I)",
                fmt_rat(&self.re),
                fmt_rat(&-self.im.clone())
            )
        } else {
            write!(f, "({}+{}*I)", fmt_rat(&self.re), fmt_rat(&self.im))
        }
    }
}

/// Scalar indeterminates, in the order used by the monomial ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X1 = 0,
    X2 = 1,
    Rv = 2,
    T1 = 3,
    T2 = 4,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::X1, Var::X2, Var::Rv, Var::T1, Var::T2];

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::Rv => "r",
            Var::T1 => "t1",
            Var::T2 => "t2",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector over (ξ1, ξ2, r, τ1, τ2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ScalarMono {
    pub exps: [i32; 5],
}

impl ScalarMono {
    pub fn one() -> Self {
        ScalarMono::default()
    }

    pub fn var(v: Var) -> Self {
        ScalarMono::var_pow(v, 1)
    }

    pub fn var_pow(v: Var, e: i32) -> Self {
        let mut m = ScalarMono::default();
        m.exps[v as usize] = e;
        m
    }

    pub fn exp(&self, v: Var) -> i32 {
        self.exps[v as usize]
    }

    pub fn degree(&self) -> i32 {
        self.exps.iter().sum()
    }

    /// Degree in ξ1, ξ2 only.
    pub fn xi_degree(&self) -> i32 {
        self.exps[0] + self.exps[1]
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, o: &ScalarMono) -> ScalarMono {
        let mut exps = self.exps;
        for (e, f) in exps.iter_mut().zip(o.exps) {
            *e += f;
        }
        ScalarMono { exps }
    }

    pub fn with_exp(&self, v: Var, e: i32) -> ScalarMono {
        let mut m = *self;
        m.exps[v as usize] = e;
        m
    }
}

impl Ord for ScalarMono {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| self.exps.cmp(&o.exps))
    }
}

impl PartialOrd for ScalarMono {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for ScalarMono {
    /// `t1^j*t2^j*x1^j*x2^j*r^j`, unit exponents and absent factors omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in [Var::T1, Var::T2, Var::X1, Var::X2, Var::Rv] {
            let e = self.exp(v);
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", v)?;
            } else {
                write!(f, "{}^{}", v, e)?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Laurent polynomial with Gaussian-rational coefficients; zero entries never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ScalarPoly {
    terms: BTreeMap<ScalarMono, GaussRat>,
}

impl ScalarPoly {
    pub fn zero() -> Self {
        ScalarPoly::default()
    }

    pub fn one() -> Self {
        ScalarPoly::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Self {
        ScalarPoly::term(c, ScalarMono::one())
    }

    pub fn int(n: i64) -> Self {
        ScalarPoly::constant(GaussRat::from_int(n))
    }

    pub fn var(v: Var) -> Self {
        ScalarPoly::term(GaussRat::one(), ScalarMono::var(v))
    }

    pub fn term(c: GaussRat, m: ScalarMono) -> Self {
        let mut p = ScalarPoly::zero();
        p.add_term(m, c);
        p
    }

    /// τ1² + τ2².
    pub fn tau_abs2() -> Self {
        let t1 = ScalarPoly::var(Var::T1);
        let t2 = ScalarPoly::var(Var::T2);
        &(&t1 * &t1) + &(&t2 * &t2)
    }

    /// τ1 + iτ2.
    pub fn tau() -> Self {
        &ScalarPoly::var(Var::T1) + &ScalarPoly::var(Var::T2).scale_g(&GaussRat::i())
    }

    /// τ1 − iτ2.
    pub fn tau_bar() -> Self {
        &ScalarPoly::var(Var::T1) - &ScalarPoly::var(Var::T2).scale_g(&GaussRat::i())
    }

    pub fn add_term(&mut self, m: ScalarMono, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
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

    pub fn iter(&self) -> impl Iterator<Item = (&ScalarMono, &GaussRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &ScalarMono) -> GaussRat {
        self.terms.get(m).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn scale_g(&self, c: &GaussRat) -> ScalarPoly {
        let mut out = ScalarPoly::zero();
        for (m, d) in &self.terms {
            out.add_term(*m, d * c);
        }
        out
    }

    pub fn scale_q(&self, q: &BigRational) -> ScalarPoly {
        self.scale_g(&GaussRat::real(q.clone()))
    }

    pub fn scale_int(&self, n: i64) -> ScalarPoly {
        self.scale_g(&GaussRat::from_int(n))
    }

    pub fn mul_mono(&self, m: &ScalarMono) -> ScalarPoly {
        ScalarPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn conj(&self) -> ScalarPoly {
        ScalarPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, c.conj())).collect(),
        }
    }

    /// Partial derivative in a non-Laurent indeterminate or in τ2.
    pub fn diff(&self, v: Var) -> ScalarPoly {
        let mut out = ScalarPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e != 0 {
                out.add_term(
                    m.with_exp(v, e - 1),
                    c.scale(&BigRational::from_integer(e.into())),
                );
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> ScalarPoly {
        let mut acc = ScalarPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes polynomials for some indeterminates; the rest stay as they are.
    pub fn substitute(&self, subs: &[(Var, ScalarPoly)]) -> ScalarPoly {
        let mut out = ScalarPoly::zero();
        for (m, c) in &self.terms {
            let mut rest = *m;
            let mut acc = ScalarPoly::constant(c.clone());
            for (v, p) in subs {
                let e = m.exp(*v);
                if e != 0 {
                    assert!(e > 0, "cannot substitute into a negative power");
                    acc = &acc * &p.pow(e as u32);
                    rest = rest.with_exp(*v, 0);
                }
            }
            out = &out + &acc.mul_mono(&rest);
        }
        out
    }

    /// Splits into ξ-homogeneous parts keyed by ξ-degree.
    pub fn split_xi_degree(&self) -> BTreeMap<i32, ScalarPoly> {
        let mut out: BTreeMap<i32, ScalarPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.xi_degree())
                .or_default()
                .add_term(*m, c.clone());
        }
        out
    }

    /// The ξ-degree when every monomial shares it.
    pub fn xi_degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|m| m.xi_degree());
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn min_exp(&self, v: Var) -> Option<i32> {
        self.terms.keys().map(|m| m.exp(v)).min()
    }

    pub fn max_exp(&self, v: Var) -> Option<i32> {
        self.terms.keys().map(|m| m.exp(v)).max()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exp(v) != 0)
    }

    /// Exact value at rational points, as a Gaussian rational.
    pub fn eval_exact(&self, assign: &[(Var, GaussRat)]) -> Result<GaussRat, CoeffError> {
        let mut total = GaussRat::zero();
        for (m, c) in &self.terms {
            let mut acc = c.clone();
            for v in Var::ALL {
                let e = m.exp(v);
                if e == 0 {
                    continue;
                }
                let x = assign
                    .iter()
                    .find(|(w, _)| *w == v)
                    .map(|(_, x)| x.clone())
                    .ok_or(CoeffError::MissingAssignment(v))?;
                let base = if e < 0 {
                    if x.is_zero() {
                        return Err(CoeffError::DivisionByZero);
                    }
                    gauss_inv(&x)
                } else {
                    x
                };
                for _ in 0..e.unsigned_abs() {
                    acc = &acc * &base;
                }
            }
            total = &total + &acc;
        }
        Ok(total)
    }

    /// Fast double-precision evaluation.
    pub fn eval_c64(
        &self,
        assign: &[(Var, num_complex::Complex64)],
    ) -> Result<num_complex::Complex64, CoeffError> {
        let mut total = num_complex::Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut acc = c.to_c64();
            for v in Var::ALL {
                let e = m.exp(v);
                if e == 0 {
                    continue;
                }
                let x = assign
                    .iter()
                    .find(|(w, _)| *w == v)
                    .map(|(_, x)| *x)
                    .ok_or(CoeffError::MissingAssignment(v))?;
                if e < 0 && x == num_complex::Complex64::new(0.0, 0.0) {
                    return Err(CoeffError::DivisionByZero);
                }
                acc *= x.powi(e);
            }
            total += acc;
        }
        Ok(total)
    }
}

fn gauss_inv(x: &GaussRat) -> GaussRat {
    let n = &x.re * &x.re + &x.im * &x.im;
    GaussRat::new(&x.re / &n, -(&x.im / &n))
}

/// Evaluates `p` at a complex point to `digits` significant decimal digits.
///
/// Double-precision inputs are exact dyadic rationals, so the value is first
/// formed exactly and then rounded once.
pub fn poly_eval(
    p: &ScalarPoly,
    assign: &[(Var, num_complex::Complex64)],
    digits: usize,
) -> Result<MpComplex, CoeffError> {
    let exact: Vec<(Var, GaussRat)> = assign
        .iter()
        .map(|(v, z)| (*v, GaussRat::new(rat_from_f64(z.re), rat_from_f64(z.im))))
        .collect();
    let val = p.eval_exact(&exact)?;
    let bits = mp::digits_to_bits(digits);
    Ok(MpComplex {
        re: mp::from_rational(&val.re, bits),
        im: mp::from_rational(&val.im, bits),
    })
}

fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn poly_add(a: &ScalarPoly, b: &ScalarPoly) -> ScalarPoly {
    a + b
}

pub fn poly_mul(a: &ScalarPoly, b: &ScalarPoly) -> ScalarPoly {
    a * b
}

impl Add for &ScalarPoly {
    type Output = ScalarPoly;
    fn add(self, o: &ScalarPoly) -> ScalarPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl AddAssign<&ScalarPoly> for ScalarPoly {
    fn add_assign(&mut self, o: &ScalarPoly) {
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl Sub for &ScalarPoly {
    type Output = ScalarPoly;
    fn sub(self, o: &ScalarPoly) -> ScalarPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Neg for &ScalarPoly {
    type Output = ScalarPoly;
    fn neg(self) -> ScalarPoly {
        ScalarPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Mul for &ScalarPoly {
    type Output = ScalarPoly;
    fn mul(self, o: &ScalarPoly) -> ScalarPoly {
        let mut out = ScalarPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for ScalarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("(0)");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{}", c)?;
            } else {
                write!(f, "{}*{}", c, m)?;
            }
        }
        Ok(())
    }
}

/// Integer helper shared by the angular integrator.
pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn x(v: Var) -> ScalarPoly {
        ScalarPoly::var(v)
    }

    #[test]
    fn conjugate_pair_sums_to_two() {
        let a = ScalarPoly::constant(GaussRat::new(BigRational::one(), BigRational::one()));
        let b = ScalarPoly::constant(GaussRat::new(BigRational::one(), -BigRational::one()));
        assert_eq!(&a + &b, ScalarPoly::int(2));
    }

    #[test]
    fn tau_times_conjugate_is_abs2() {
        assert_eq!(
            &ScalarPoly::tau() * &ScalarPoly::tau_bar(),
            ScalarPoly::tau_abs2()
        );
        let t2sq = &x(Var::T2) * &x(Var::T2);
        assert_eq!(&ScalarPoly::tau_abs2() - &t2sq, &x(Var::T1) * &x(Var::T1));
    }

    #[test]
    fn laurent_tau2() {
        let inv = ScalarPoly::term(GaussRat::one(), ScalarMono::var_pow(Var::T2, -1));
        let p = &(&x(Var::X1) + &(&x(Var::T1) * &x(Var::X2))) * &inv;
        assert_eq!(p.to_string(), "(1)*t2^-1*x1 + (1)*t1*t2^-1*x2");
        let v = poly_eval(&inv, &[(Var::T2, Complex64::new(2.0, 0.0))], 20).unwrap();
        assert_eq!(v.to_c64(), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn eval_examples() {
        let p = &(&x(Var::X1) * &x(Var::X1)) * &x(Var::T1);
        let v = poly_eval(
            &p,
            &[
                (Var::X1, Complex64::new(2.0, 0.0)),
                (Var::T1, Complex64::new(3.0, 0.0)),
            ],
            20,
        )
        .unwrap();
        assert_eq!(v.to_c64(), Complex64::new(12.0, 0.0));
        let v = poly_eval(
            &ScalarPoly::tau_abs2(),
            &[
                (Var::T1, Complex64::new(0.0, 0.0)),
                (Var::T2, Complex64::new(1.0, 0.0)),
            ],
            20,
        )
        .unwrap();
        assert_eq!(v.to_c64(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn eval_errors() {
        let inv = ScalarPoly::term(GaussRat::one(), ScalarMono::var_pow(Var::T2, -1));
        assert_eq!(
            poly_eval(&inv, &[(Var::T2, Complex64::new(0.0, 0.0))], 20).unwrap_err(),
            CoeffError::DivisionByZero
        );
        assert_eq!(
            poly_eval(&x(Var::X1), &[], 20).unwrap_err(),
            CoeffError::MissingAssignment(Var::X1)
        );
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let a = ScalarMono::var_pow(Var::X1, 2);
        let b = ScalarMono::var(Var::X1).mul(&ScalarMono::var(Var::X2));
        let c = ScalarMono::var(Var::X1);
        assert!(c < b && b < a);
    }

    fn arb_poly() -> impl Strategy<Value = ScalarPoly> {
        let term = (
            -5i64..6,
            -3i64..4,
            1i64..4,
            proptest::array::uniform5(0i32..3),
        );
        proptest::collection::vec(term, 0..7).prop_map(|ts| {
            let mut p = ScalarPoly::zero();
            for (re, im, d, mut e) in ts {
                e[4] -= 1;
                if e[..4].iter().sum::<i32>() > 4 {
                    continue;
                }
                p.add_term(
                    ScalarMono { exps: e },
                    GaussRat::new(
                        BigRational::new(re.into(), d.into()),
                        BigRational::from_integer(im.into()),
                    ),
                );
            }
            p
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(p in arb_poly(), q in arb_poly(), s in arb_poly()) {
            prop_assert_eq!(&(&p + &q) + &s, &p + &(&q + &s));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&p * &(&q + &s), &(&p * &q) + &(&p * &s));
            prop_assert_eq!(&(&p * &q) * &s, &p * &(&q * &s));
        }

        #[test]
        fn eval_is_multiplicative(p in arb_poly(), q in arb_poly(),
                                  vals in proptest::array::uniform5(0.3f64..2.0)) {
            let assign: Vec<(Var, Complex64)> =
                Var::ALL.iter().zip(vals).map(|(v, x)| (*v, Complex64::new(x, 0.5 * x))).collect();
            let pq = poly_eval(&(&p * &q), &assign, 20).unwrap().to_c64();
            let a = poly_eval(&p, &assign, 20).unwrap().to_c64();
            let b = poly_eval(&q, &assign, 20).unwrap().to_c64();
            let scale = pq.norm().max((a * b).norm()).max(1e-300);
            prop_assert!((pq - a * b).norm() <= 1e-14 * scale);
        }
    }
}
