//! Rational functions with a factored denominator.
//!
//! Denominators are kept as products of normalized factors, split over a
//! small fixed list of atoms (`u^{1/4} − 1`, `log u`, `u^{1/4}v^{1/4} − 1`, …)
//! so that sums use a least common multiple instead of a full product.
//! Equality is decided by cross multiplication and is exact.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use astro_float::BigFloat;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::lpoly::{Exps, LPoly, EU, EV, LU, LV};
use crate::mp::{self, RM};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RatFun {
    num: LPoly,
    den: BTreeMap<LPoly, u32>,
}

fn atoms() -> &'static [LPoly] {
    static ATOMS: OnceLock<Vec<LPoly>> = OnceLock::new();
    ATOMS.get_or_init(|| {
        let one = LPoly::one();
        let m = LPoly::root_mono;
        let mut v = Vec::new();
        for (a, b) in [(1, 0), (0, 1), (1, 1)] {
            v.push(m(a, b).sub(&one));
            v.push(m(a, b).add(&one));
            v.push(m(2 * a, 2 * b).add(&one));
        }
        v.push(m(1, 0).sub(&m(0, 1)));
        v.push(m(1, 0).add(&m(0, 1)));
        v.push(m(2, 0).add(&m(0, 2)));
        v.push(LPoly::var(LU).add(&LPoly::var(LV)));
        v.push(LPoly::var(LU).sub(&LPoly::var(LV)));
        v
    })
}

/// `p = c · x^m · Π fᵢ^{eᵢ}` where the log part of `x^m` is returned among
/// the factors (as `lu`, `lv`) and `x^m` keeps only root exponents.
fn factor(p: &LPoly) -> (BigRational, Exps, Vec<(LPoly, u32)>) {
    let (c, m, mut rest) = p.normalize();
    let mut out: Vec<(LPoly, u32)> = Vec::new();
    for (i, gen) in [(LU, LPoly::var(LU)), (LV, LPoly::var(LV))] {
        if m[i] > 0 {
            out.push((gen, m[i] as u32));
        }
    }
    for a in atoms() {
        let mut e = 0;
        while rest.len() > 1 {
            match rest.exact_div(a) {
                Some(qt) => {
                    rest = qt;
                    e += 1;
                }
                None => break,
            }
        }
        if e > 0 {
            out.push((a.clone(), e));
        }
    }
    if rest.as_constant().is_none() {
        let (c2, m2, r2) = rest.normalize();
        debug_assert!(c2.is_one() && m2 == [0; 4]);
        out.push((r2, 1));
    }
    (c, [m[0], m[1], 0, 0], out)
}

impl RatFun {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_poly(LPoly::one())
    }

    pub fn int(n: i64) -> Self {
        Self::from_poly(LPoly::int(n))
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(LPoly::constant(c))
    }

    pub fn from_poly(p: LPoly) -> Self {
        RatFun {
            num: p,
            den: BTreeMap::new(),
        }
    }

    /// `u^{a/4} v^{b/4}`.
    pub fn root(a: i32, b: i32) -> Self {
        Self::from_poly(LPoly::root_mono(a, b))
    }

    pub fn log_u() -> Self {
        Self::from_poly(LPoly::var(LU))
    }

    pub fn log_v() -> Self {
        Self::from_poly(LPoly::var(LV))
    }

    pub fn numerator(&self) -> &LPoly {
        &self.num
    }

    pub fn denominator_factors(&self) -> impl Iterator<Item = (&LPoly, u32)> {
        self.den.iter().map(|(f, e)| (f, *e))
    }

    pub fn denominator(&self) -> LPoly {
        self.den
            .iter()
            .fold(LPoly::one(), |acc, (f, e)| acc.mul(&f.pow(*e)))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else if self.num.is_zero() {
            Some(BigRational::zero())
        } else {
            None
        }
    }

    /// True when the function involves `v` at all.
    pub fn uses_v(&self) -> bool {
        self.num.uses(EV) || self.num.uses(LV) || self.den.keys().any(|f| f.uses(EV) || f.uses(LV))
    }

    pub fn uses_u(&self) -> bool {
        self.num.uses(EU) || self.num.uses(LU) || self.den.keys().any(|f| f.uses(EU) || f.uses(LU))
    }

    fn lcm_with(&self, o: &RatFun) -> BTreeMap<LPoly, u32> {
        let mut l = self.den.clone();
        for (f, e) in &o.den {
            let x = l.entry(f.clone()).or_insert(0);
            *x = (*x).max(*e);
        }
        l
    }

    fn num_over(&self, l: &BTreeMap<LPoly, u32>) -> LPoly {
        let mut n = self.num.clone();
        for (f, e) in l {
            let have = self.den.get(f).copied().unwrap_or(0);
            if *e > have {
                n = n.mul(&f.pow(e - have));
            }
        }
        n
    }

    pub fn add(&self, o: &RatFun) -> RatFun {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let l = self.lcm_with(o);
        let num = self.num_over(&l).add(&o.num_over(&l));
        RatFun { num, den: l }.trimmed()
    }

    pub fn sub(&self, o: &RatFun) -> RatFun {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> RatFun {
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
        .trimmed()
    }

    pub fn mul(&self, o: &RatFun) -> RatFun {
        if self.is_zero() || o.is_zero() {
            return RatFun::zero();
        }
        let mut den = self.den.clone();
        for (f, e) in &o.den {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        RatFun {
            num: self.num.mul(&o.num),
            den,
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> RatFun {
        assert!(!self.is_zero(), "inverse of the zero function");
        let (c, m, facs) = factor(&self.num);
        let mut num = LPoly::monomial(m.map(|x| -x), BigRational::one() / c);
        for (f, e) in &self.den {
            num = num.mul(&f.pow(*e));
        }
        let mut den = BTreeMap::new();
        for (f, e) in facs {
            *den.entry(f).or_insert(0) += e;
        }
        RatFun { num, den }
    }

    pub fn div(&self, o: &RatFun) -> RatFun {
        self.mul(&o.inv())
    }

    pub fn pow(&self, n: i32) -> RatFun {
        let base = if n < 0 { self.inv() } else { self.clone() };
        let mut r = RatFun::one();
        for _ in 0..n.unsigned_abs() {
            r = r.mul(&base);
        }
        r
    }

    fn trimmed(mut self) -> RatFun {
        if self.num.is_zero() {
            self.den.clear();
        }
        self
    }

    /// Cancels denominator factors that divide the numerator.
    pub fn reduced(&self) -> RatFun {
        let mut num = self.num.clone();
        let mut den = BTreeMap::new();
        for (f, e) in &self.den {
            let mut e = *e;
            while e > 0 {
                match num.exact_div(f) {
                    Some(qt) => {
                        num = qt;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e > 0 {
                den.insert(f.clone(), e);
            }
        }
        RatFun { num, den }.trimmed()
    }

    pub fn equals(&self, o: &RatFun) -> bool {
        let l = self.lcm_with(o);
        self.num_over(&l) == o.num_over(&l)
    }

    /// Applies the ring map `eu ↦ roots[0]`, `ev ↦ roots[1]`, `lu ↦ logs[0]`,
    /// `lv ↦ logs[1]`; used to form `f(uv)`, `f(v)`, `f(1/u)`, and so on.
    pub fn substitute(&self, roots: &[Exps; 2], logs: &[LPoly; 2]) -> RatFun {
        let num = self.num.substitute(roots, logs);
        let mut r = RatFun::from_poly(num);
        for (f, e) in &self.den {
            let g = f.substitute(roots, logs);
            let (c, m, facs) = factor(&g);
            let scale = LPoly::monomial(m.map(|x| -x), BigRational::one() / c);
            let mut part = RatFun {
                num: scale,
                den: BTreeMap::new(),
            };
            for (h, k) in facs {
                *part.den.entry(h).or_insert(0) += k;
            }
            r = r.mul(&part.pow(*e as i32));
        }
        r
    }

    /// `f(u) ↦ f(uv)`.
    pub fn at_product(&self) -> RatFun {
        self.substitute(
            &[[1, 1, 0, 0], [0, 1, 0, 0]],
            &[LPoly::var(LU).add(&LPoly::var(LV)), LPoly::var(LV)],
        )
    }

    /// `f(u) ↦ f(v)`.
    pub fn in_v(&self) -> RatFun {
        self.substitute(
            &[[0, 1, 0, 0], [0, 1, 0, 0]],
            &[LPoly::var(LV), LPoly::var(LV)],
        )
    }

    pub fn swap_uv(&self) -> RatFun {
        RatFun {
            num: self.num.swap_uv(),
            den: self.den.iter().map(|(f, e)| (f.swap_uv(), *e)).collect(),
        }
    }

    /// Evaluation at `u = e^s`, `v = e^t` in double precision.
    pub fn eval_f64(&self, s: f64, t: f64) -> f64 {
        let num = eval_poly_f64(&self.num, s, t);
        let den = self.den.iter().fold(1.0, |acc, (f, e)| {
            acc * eval_poly_f64(f, s, t).powi(*e as i32)
        });
        num / den
    }

    /// Direct evaluation at `u = e^s`, `v = e^t` with `p` mantissa bits. No
    /// protection against cancellation near the singular sets.
    pub fn eval_direct(&self, s: &BigFloat, t: &BigFloat, p: usize) -> BigFloat {
        let vals = GenValues::new(s, t, p);
        let num = vals.eval(&self.num, p);
        let mut den = mp::one(p);
        for (f, e) in &self.den {
            den = den.mul(&vals.eval(f, p).powi(*e as usize, p, RM), p, RM);
        }
        num.div(&den, p, RM)
    }
}

pub(crate) fn eval_poly_f64(p: &LPoly, s: f64, t: f64) -> f64 {
    p.iter()
        .map(|(e, c)| {
            let cf = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN);
            cf * (0.25 * (e[EU] as f64 * s + e[EV] as f64 * t)).exp()
                * s.powi(e[LU])
                * t.powi(e[LV])
        })
        .sum()
}

/// Values of the four generators at a point, with cached powers.
pub(crate) struct GenValues {
    eu: BigFloat,
    ev: BigFloat,
    lu: BigFloat,
    lv: BigFloat,
}

impl GenValues {
    pub fn new(s: &BigFloat, t: &BigFloat, p: usize) -> Self {
        let quarter = mp::from_f64(0.25, p);
        GenValues {
            eu: mp::exp(&s.mul(&quarter, p, RM), p),
            ev: mp::exp(&t.mul(&quarter, p, RM), p),
            lu: s.clone(),
            lv: t.clone(),
        }
    }

    pub fn eval(&self, poly: &LPoly, p: usize) -> BigFloat {
        let mut cache: std::collections::HashMap<(usize, i32), BigFloat> = Default::default();
        let mut pw = |i: usize, n: i32| -> BigFloat {
            cache
                .entry((i, n))
                .or_insert_with(|| {
                    let base = match i {
                        EU => &self.eu,
                        EV => &self.ev,
                        LU => &self.lu,
                        _ => &self.lv,
                    };
                    mp::powi(base, n as i64, p)
                })
                .clone()
        };
        let mut acc = mp::zero(p);
        for (e, c) in poly.iter() {
            let mut t = mp::from_rational(c, p);
            for (i, n) in e.iter().enumerate() {
                if *n != 0 {
                    t = t.mul(&pw(i, *n), p, RM);
                }
            }
            acc = acc.add(&t, p, RM);
        }
        acc
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({})/(", self.num)?;
        let parts: Vec<String> = self
            .den
            .iter()
            .map(|(p, e)| {
                if *e == 1 {
                    format!("({})", p)
                } else {
                    format!("({})^{}", p, e)
                }
            })
            .collect();
        write!(f, "{})", parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> RatFun {
        RatFun::root(4, 0)
    }

    #[test]
    fn field_operations() {
        let one = RatFun::one();
        let a = u().sub(&one).inv();
        let b = u().add(&one).inv();
        // 1/(u-1) - 1/(u+1) = 2/(u²-1)
        let lhs = a.sub(&b);
        let rhs = RatFun::int(2).div(&u().mul(&u()).sub(&one));
        assert!(lhs.equals(&rhs));
        assert!(!lhs.equals(&a));
        let x = lhs.mul(&rhs.inv());
        assert_eq!(x.reduced().as_constant(), Some(BigRational::one()));
    }

    #[test]
    fn substitution_forms_products() {
        let f = u().sub(&RatFun::one()).inv().mul(&RatFun::log_u());
        let g = f.at_product();
        let uv = RatFun::root(4, 4);
        let expect = RatFun::log_u()
            .add(&RatFun::log_v())
            .div(&uv.sub(&RatFun::one()));
        assert!(g.equals(&expect));
    }

    #[test]
    fn direct_evaluation() {
        let f = RatFun::log_u().div(&u().sub(&RatFun::one()));
        let p = 128;
        let s = mp::from_f64(0.7, p);
        let t = mp::zero(p);
        let got = mp::to_f64(&f.eval_direct(&s, &t, p));
        let expect = 0.7 / (0.7f64.exp() - 1.0);
        assert!((got - expect).abs() < 1e-15);
        assert!((f.eval_f64(0.7, 0.0) - expect).abs() < 1e-14);
    }
}
