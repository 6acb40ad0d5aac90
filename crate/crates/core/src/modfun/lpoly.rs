//! Laurent polynomials over ℚ in the four generators
//! `eu = u^{1/4}`, `ev = v^{1/4}`, `lu = log u`, `lv = log v`.
//!
//! The root generators may carry negative exponents; the log generators may
//! not. Quarter roots are needed because `sinh(x/4)` appears in the
//! curvature functions.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub const EU: usize = 0;
pub const EV: usize = 1;
pub const LU: usize = 2;
pub const LV: usize = 3;

pub type Exps = [i32; 4];

const NAMES: [&str; 4] = ["eu", "ev", "lu", "lv"];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LPoly {
    terms: BTreeMap<Exps, BigRational>,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl LPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(q(n))
    }

    pub fn monomial(e: Exps, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    /// `u^{a/4} v^{b/4}`.
    pub fn root_mono(a: i32, b: i32) -> Self {
        Self::monomial([a, b, 0, 0], BigRational::one())
    }

    pub fn add_term(&mut self, e: Exps, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
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

    pub fn iter(&self) -> impl Iterator<Item = (&Exps, &BigRational)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&[0; 4]).cloned(),
            _ => None,
        }
    }

    /// The single term, if there is exactly one.
    pub fn as_monomial(&self) -> Option<(Exps, BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(e, c)| (*e, c.clone()))
        } else {
            None
        }
    }

    pub fn uses(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] != 0)
    }

    pub fn max_exp(&self, i: usize) -> i32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn min_exp(&self, i: usize) -> i32 {
        self.terms.keys().map(|e| e[i]).min().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<(&Exps, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, o: &LPoly) -> LPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &LPoly) -> LPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, -c.clone());
        }
        r
    }

    pub fn neg(&self) -> LPoly {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, c: &BigRational) -> LPoly {
        if c.is_zero() {
            return LPoly::zero();
        }
        LPoly {
            terms: self.terms.iter().map(|(e, d)| (*e, d * c)).collect(),
        }
    }

    pub fn shift(&self, s: &Exps) -> LPoly {
        LPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (add_exps(e, s), c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, o: &LPoly) -> LPoly {
        let mut r = LPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term(add_exps(e1, e2), c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> LPoly {
        let mut r = LPoly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                r = r.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        r
    }

    /// Ring map sending `eu`, `ev` to root monomials and `lu`, `lv` to
    /// arbitrary polynomials.
    pub fn substitute(&self, roots: &[Exps; 2], logs: &[LPoly; 2]) -> LPoly {
        let mut r = LPoly::zero();
        let mut log_pows: [Vec<LPoly>; 2] = [vec![LPoly::one()], vec![LPoly::one()]];
        for (e, c) in &self.terms {
            let mut m = [0i32; 4];
            for (k, root) in roots.iter().enumerate() {
                for i in 0..4 {
                    m[i] += root[i] * e[k];
                }
            }
            let mut t = LPoly::monomial(m, c.clone());
            for k in 0..2 {
                let d = e[LU + k] as usize;
                while log_pows[k].len() <= d {
                    let next = log_pows[k].last().unwrap().mul(&logs[k]);
                    log_pows[k].push(next);
                }
                if d > 0 {
                    t = t.mul(&log_pows[k][d]);
                }
            }
            r = r.add(&t);
        }
        r
    }

    /// Swaps the roles of `u` and `v`.
    pub fn swap_uv(&self) -> LPoly {
        LPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| ([e[1], e[0], e[3], e[2]], c.clone()))
                .collect(),
        }
    }

    /// Splits `self = c · x^m · p` with `c` rational, `x^m` a monomial and `p`
    /// primitive with integer coefficients, minimal exponents zero in every
    /// generator, and positive leading coefficient.
    pub fn normalize(&self) -> (BigRational, Exps, LPoly) {
        if self.is_zero() {
            return (BigRational::zero(), [0; 4], LPoly::zero());
        }
        let mut m = [0i32; 4];
        for (i, mi) in m.iter_mut().enumerate() {
            *mi = self.min_exp(i);
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = BigRational::new(num_gcd, den_lcm);
        if self.leading().unwrap().1.is_negative() {
            content = -content;
        }
        let neg_m = m.map(|x| -x);
        let p = LPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (add_exps(e, &neg_m), c / &content))
                .collect(),
        };
        (content, m, p)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    /// Both are first shifted to have non-negative exponents; `d` must have
    /// no monomial factor for the answer to be meaningful in the Laurent ring.
    pub fn exact_div(&self, d: &LPoly) -> Option<LPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LPoly::zero());
        }
        let mut dm = [0i32; 4];
        let mut am = [0i32; 4];
        for i in 0..4 {
            dm[i] = d.min_exp(i);
            am[i] = self.min_exp(i);
        }
        let dd = d.shift(&dm.map(|x| -x));
        let mut rem = self.shift(&am.map(|x| -x));
        let (ld, lc) = {
            let (e, c) = dd.leading().unwrap();
            (*e, c.clone())
        };
        let mut quo = LPoly::zero();
        let mut guard = 0usize;
        while let Some((le, lcoef)) = rem.leading().map(|(e, c)| (*e, c.clone())) {
            let mut qe = [0i32; 4];
            for i in 0..4 {
                qe[i] = le[i] - ld[i];
                if qe[i] < 0 {
                    return None;
                }
            }
            let qc = lcoef / &lc;
            let t = LPoly::monomial(qe, qc);
            rem = rem.sub(&t.mul(&dd));
            quo = quo.add(&t);
            guard += 1;
            if guard > 1_000_000 {
                return None;
            }
        }
        let mut s = [0i32; 4];
        for i in 0..4 {
            s[i] = am[i] - dm[i];
        }
        let quo = quo.shift(&s);
        if quo.min_exp(LU) < 0 || quo.min_exp(LV) < 0 {
            return None;
        }
        Some(quo)
    }

    /// Terms grouped by the exponent of generator `i`.
    pub fn coefficients_in(&self, i: usize) -> BTreeMap<i32, LPoly> {
        let mut out: BTreeMap<i32, LPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut f = *e;
            f[i] = 0;
            out.entry(e[i]).or_default().add_term(f, c.clone());
        }
        out
    }
}

pub fn add_exps(a: &Exps, b: &Exps) -> Exps {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

impl fmt::Display for LPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut parts = Vec::new();
            if !a.is_one() || e.iter().all(|x| *x == 0) {
                parts.push(format!("{}", a));
            }
            for i in 0..4 {
                match e[i] {
                    0 => {}
                    1 => parts.push(NAMES[i].to_string()),
                    n => parts.push(format!("{}^{}", NAMES[i], n)),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(Exps, i64)]) -> LPoly {
        let mut r = LPoly::zero();
        for (e, c) in terms {
            r.add_term(*e, q(*c));
        }
        r
    }

    #[test]
    fn division_round_trip() {
        let a = p(&[([1, 0, 0, 0], 1), ([0, 0, 0, 0], -1)]);
        let b = p(&[([2, 1, 0, 0], 1), ([0, 0, 1, 0], 3), ([0, -1, 0, 0], 2)]);
        let prod = a.mul(&b);
        assert_eq!(prod.exact_div(&a), Some(b.clone()));
        let c = p(&[([1, 0, 0, 0], 1), ([0, 0, 0, 0], 1)]);
        assert_eq!(prod.exact_div(&c), None);
        let lu = LPoly::var(LU);
        assert_eq!(LPoly::var(LV).exact_div(&lu), None);
        assert_eq!(lu.mul(&a).exact_div(&lu), Some(a));
    }

    #[test]
    fn normalize_extracts_content() {
        let a = p(&[([3, 0, 0, 0], -4), ([1, 0, 1, 0], 6)]);
        let (c, m, prim) = a.normalize();
        assert_eq!(c, q(-2));
        assert_eq!(m, [1, 0, 0, 0]);
        assert_eq!(prim, p(&[([2, 0, 0, 0], 2), ([0, 0, 1, 0], -3)]));
    }

    #[test]
    fn substitution_is_a_ring_map() {
        let a = p(&[([1, 0, 1, 0], 2), ([0, 0, 0, 0], -1)]);
        let b = p(&[([-1, 0, 0, 0], 1), ([0, 0, 2, 0], 1)]);
        let roots = [[1, 1, 0, 0], [0, 1, 0, 0]];
        let logs = [LPoly::var(LU).add(&LPoly::var(LV)), LPoly::var(LV)];
        let lhs = a.mul(&b).substitute(&roots, &logs);
        let rhs = a
            .substitute(&roots, &logs)
            .mul(&b.substitute(&roots, &logs));
        assert_eq!(lhs, rhs);
    }
}
