//! Extended-precision evaluation with exact Taylor expansion near the
//! singular sets `s = 0`, `t = 0`, `s + t = 0`.
//!
//! Near a single line the function is rewritten so that the line is `a = 0`
//! and numerator and denominator are expanded in `a` with coefficients that
//! stay exact polynomials in the other variable. Near a corner the
//! two-variable Taylor polynomial is recovered exactly from expansions along
//! rational rays.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::lpoly::{LPoly, EU, EV, LU, LV};
use super::ratfun::GenValues;
use super::{ModFun, View};
use crate::mp::{self, RM};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    /// Decimal digits, at least 33.
    pub precision: usize,
    /// Radius of the singular zones.
    pub eps: f64,
    /// Taylor order inside the zones, at least 6.
    pub taylor_order: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            precision: 33,
            eps: 1e-3,
            taylor_order: 10,
        }
    }
}

impl EvalConfig {
    pub fn with_precision(precision: usize) -> Self {
        EvalConfig {
            precision,
            ..Default::default()
        }
    }

    fn bits(&self) -> usize {
        mp::digits_to_bits(self.precision.max(33) + 60)
    }

    /// The requested order, raised when the precision asks for more terms
    /// than `eps^(order+1)` can deliver.
    fn order(&self) -> usize {
        let per_term = (-self.eps.log10()).max(1.0);
        let need = ((self.precision.max(33) as f64 - 3.0) / per_term).ceil() as usize;
        self.taylor_order.max(6).max(need)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Line {
    S,
    T,
    ST,
}

struct LineSeries {
    num: Vec<LPoly>,
    den: Vec<LPoly>,
}

struct CornerSeries {
    /// `c[n][k]` multiplies `s^{n−k} t^k`.
    c: Vec<Vec<BigRational>>,
}

#[derive(Default)]
pub(crate) struct Zones {
    lines: HashMap<(Line, usize), Arc<Option<LineSeries>>>,
    corners: HashMap<usize, Arc<Option<CornerSeries>>>,
}

impl std::fmt::Debug for Zones {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Zones({} lines, {} corners)",
            self.lines.len(),
            self.corners.len()
        )
    }
}

const MAX_ORDER: usize = 64;

fn inv_factorials() -> &'static [BigRational] {
    static F: OnceLock<Vec<BigRational>> = OnceLock::new();
    F.get_or_init(|| {
        let mut v = vec![BigRational::one()];
        for i in 1..=160 {
            let next = v[i - 1].clone() / BigRational::from_integer(BigInt::from(i));
            v.push(next);
        }
        v
    })
}

fn rq(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Coefficient of `a^n` where `a = log u` and `u^{1/4} = e^{a/4}`; the
/// result is a polynomial in `ev`, `lv` only.
fn coeff_in_s(p: &LPoly, n: usize) -> LPoly {
    let fact = inv_factorials();
    let mut out = LPoly::zero();
    let mut pows: HashMap<(i32, usize), BigRational> = HashMap::new();
    for (e, c) in p.iter() {
        let k = e[LU] as usize;
        if k > n {
            continue;
        }
        let m = n - k;
        let pw = pows
            .entry((e[EU], m))
            .or_insert_with(|| num_traits::pow(rq(e[EU] as i64, 4), m))
            .clone();
        out.add_term([0, e[EV], 0, e[LV]], c * pw * &fact[m]);
    }
    out
}

/// Coefficients of `ε^n`, `n ≤ nmax`, along `s = ε`, `t = λε`.
fn ray_series(p: &LPoly, lam: &BigRational, nmax: usize) -> Vec<BigRational> {
    let fact = inv_factorials();
    let mut out = vec![BigRational::zero(); nmax + 1];
    for (e, c) in p.iter() {
        let k = (e[LU] + e[LV]) as usize;
        if k > nmax {
            continue;
        }
        let pre = c * num_traits::pow(lam.clone(), e[LV] as usize);
        let base = (BigRational::from_integer(e[EU].into())
            + lam * BigRational::from_integer(e[EV].into()))
            / BigRational::from_integer(4.into());
        let mut pw = BigRational::one();
        for m in 0..=(nmax - k) {
            out[k + m] += &pre * &pw * &fact[m];
            pw *= &base;
        }
    }
    out
}

/// Monomial coefficients of the interpolating polynomial through `(x_k, y_k)`.
fn interpolate(xs: &[BigRational], ys: &[BigRational]) -> Vec<BigRational> {
    let n = xs.len();
    let mut coeffs = vec![BigRational::zero(); n];
    for k in 0..n {
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for m in 0..n {
            if m == k {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b;
                next[i] -= b * &xs[m];
            }
            basis = next;
            denom *= &xs[k] - &xs[m];
        }
        let scale = &ys[k] / denom;
        for (i, b) in basis.iter().enumerate() {
            coeffs[i] += b * &scale;
        }
    }
    coeffs
}

fn poly_at(c: &[BigRational], x: &BigRational) -> BigRational {
    c.iter()
        .rev()
        .fold(BigRational::zero(), |acc, ci| acc * x + ci)
}

impl ModFun {
    fn line_polys(&self, line: Line) -> (LPoly, LPoly) {
        let n = self.rat.numerator().clone();
        let d = self.rat.denominator();
        match line {
            Line::S => (n, d),
            Line::T => (n.swap_uv(), d.swap_uv()),
            Line::ST => {
                let roots = [[1, -1, 0, 0], [0, 1, 0, 0]];
                let logs = [LPoly::var(LU).sub(&LPoly::var(LV)), LPoly::var(LV)];
                (n.substitute(&roots, &logs), d.substitute(&roots, &logs))
            }
        }
    }

    fn line_series(&self, line: Line, order: usize) -> Arc<Option<LineSeries>> {
        if let Some(x) = self.zones.lock().unwrap().lines.get(&(line, order)) {
            return x.clone();
        }
        let (n, d) = self.line_polys(line);
        let mut res = None;
        if let Some(ad) = (0..=MAX_ORDER).find(|k| !coeff_in_s(&d, *k).is_zero()) {
            if (0..ad).all(|k| coeff_in_s(&n, k).is_zero()) {
                res = Some(LineSeries {
                    num: (0..=order).map(|j| coeff_in_s(&n, ad + j)).collect(),
                    den: (0..=order).map(|j| coeff_in_s(&d, ad + j)).collect(),
                });
            }
        }
        let res = Arc::new(res);
        self.zones
            .lock()
            .unwrap()
            .lines
            .insert((line, order), res.clone());
        res
    }

    fn corner_series(&self, order: usize) -> Arc<Option<CornerSeries>> {
        if let Some(x) = self.zones.lock().unwrap().corners.get(&order) {
            return x.clone();
        }
        let res = Arc::new(self.build_corner(order));
        self.zones
            .lock()
            .unwrap()
            .corners
            .insert(order, res.clone());
        res
    }

    fn build_corner(&self, order: usize) -> Option<CornerSeries> {
        let n = self.rat.numerator();
        let d = self.rat.denominator();
        let need = order + 2;
        let mut ord_d: Option<usize> = None;
        let mut lams: Vec<BigRational> = Vec::new();
        let mut qs: Vec<Vec<BigRational>> = Vec::new();
        let mut k = 0i64;
        while lams.len() < need {
            if k > 4 * need as i64 + 20 {
                return None;
            }
            let lam = rq(2 * k + 3, 5 * k + 11);
            k += 1;
            let nmax = ord_d.map_or(MAX_ORDER, |o| o + order);
            let ds = ray_series(&d, &lam, nmax);
            let Some(o) = ds.iter().position(|x| !x.is_zero()) else {
                continue;
            };
            match ord_d {
                Some(cur) if o > cur => continue,
                Some(cur) if o == cur => {}
                _ => {
                    ord_d = Some(o);
                    lams.clear();
                    qs.clear();
                }
            }
            let ns = ray_series(n, &lam, o + order);
            if ns[..o].iter().any(|x| !x.is_zero()) {
                return None;
            }
            let mut q: Vec<BigRational> = Vec::with_capacity(order + 1);
            for j in 0..=order {
                let mut acc = ns[o + j].clone();
                for (i, qi) in q.iter().enumerate() {
                    acc -= qi * &ds[o + j - i];
                }
                q.push(acc / &ds[o]);
            }
            lams.push(lam);
            qs.push(q);
        }
        let mut c = Vec::with_capacity(order + 1);
        for j in 0..=order {
            let ys: Vec<BigRational> = qs.iter().map(|q| q[j].clone()).collect();
            let poly = interpolate(&lams[..=j], &ys[..=j]);
            for (lam, y) in lams.iter().zip(&ys).skip(j + 1) {
                if poly_at(&poly, lam) != *y {
                    return None;
                }
            }
            c.push(poly);
        }
        Some(CornerSeries { c })
    }

    fn eval_line(
        &self,
        line: Line,
        a: &BigFloat,
        y: &BigFloat,
        cfg: &EvalConfig,
    ) -> Option<BigFloat> {
        let order = cfg.order();
        let series = self.line_series(line, order);
        let ls = series.as_ref().as_ref()?;
        let p = cfg.bits();
        let vals = GenValues::new(&mp::zero(p), y, p);
        let nv: Vec<BigFloat> = ls.num.iter().map(|x| vals.eval(x, p)).collect();
        let dv: Vec<BigFloat> = ls.den.iter().map(|x| vals.eval(x, p)).collect();
        if dv[0].is_zero() {
            return None;
        }
        let mut q: Vec<BigFloat> = Vec::with_capacity(order + 1);
        for j in 0..=order {
            let mut acc = nv[j].clone();
            for (i, qi) in q.iter().enumerate() {
                acc = acc.sub(&qi.mul(&dv[j - i], p, RM), p, RM);
            }
            q.push(acc.div(&dv[0], p, RM));
        }
        let mut r = mp::zero(p);
        for qj in q.iter().rev() {
            r = r.mul(a, p, RM).add(qj, p, RM);
        }
        Some(r)
    }

    fn eval_corner(&self, s: &BigFloat, t: &BigFloat, cfg: &EvalConfig) -> Option<BigFloat> {
        let series = self.corner_series(cfg.order());
        let cs = series.as_ref().as_ref()?;
        let p = cfg.bits();
        let mut total = mp::zero(p);
        for (n, row) in cs.c.iter().enumerate() {
            for (k, ck) in row.iter().enumerate() {
                if ck.is_zero() {
                    continue;
                }
                let term = mp::from_rational(ck, p)
                    .mul(&mp::powi(s, (n - k) as i64, p), p, RM)
                    .mul(&mp::powi(t, k as i64, p), p, RM);
                total = total.add(&term, p, RM);
            }
        }
        Some(total)
    }

    /// Exact Taylor coefficients at `s = t = 0`: entry `[n][k]` multiplies
    /// `s^{n−k} t^k`. `None` when the function has a pole at the origin.
    pub fn taylor_at_origin(&self, order: usize) -> Option<Vec<Vec<BigRational>>> {
        self.corner_series(order)
            .as_ref()
            .as_ref()
            .map(|c| c.c.clone())
    }

    /// Value at `u = e^s`, `v = e^t`.
    pub fn eval_st_big(&self, s: &BigFloat, t: &BigFloat, cfg: &EvalConfig) -> BigFloat {
        let p = cfg.bits();
        let uses_u = self.rat.uses_u();
        let uses_v = self.rat.uses_v();
        let sf = mp::to_f64(s).abs();
        let tf = mp::to_f64(t).abs();
        let st = s.add(t, p, RM);
        let mut near = Vec::new();
        if uses_u && sf < cfg.eps {
            near.push(Line::S);
        }
        if uses_v && tf < cfg.eps {
            near.push(Line::T);
        }
        if uses_u && uses_v && mp::to_f64(&st).abs() < cfg.eps {
            near.push(Line::ST);
        }
        let zone = match near.as_slice() {
            [] => None,
            [Line::S] => self.eval_line(Line::S, s, t, cfg),
            [Line::T] => self.eval_line(Line::T, t, s, cfg),
            [Line::ST] => self.eval_line(Line::ST, &st, t, cfg),
            _ => self.eval_corner(s, t, cfg),
        };
        zone.unwrap_or_else(|| self.rat.eval_direct(s, t, p))
    }

    pub fn eval_st(&self, s: f64, t: f64, cfg: &EvalConfig) -> BigFloat {
        let p = cfg.bits();
        self.eval_st_big(&mp::from_f64(s, p), &mp::from_f64(t, p), cfg)
    }

    /// Value at a point given in the function's own view: `(u, v)` for the
    /// rational view, `(s, t)` for the exponential view. The second
    /// coordinate is ignored by one-variable functions.
    pub fn eval(&self, a: f64, b: f64, cfg: &EvalConfig) -> BigFloat {
        let p = cfg.bits();
        match self.view {
            View::Exponential => self.eval_st(a, b, cfg),
            View::Rational => {
                let b = if self.arity == 1 { 1.0 } else { b };
                let s = mp::ln(&mp::from_f64(a, p), p);
                let t = mp::ln(&mp::from_f64(b, p), p);
                self.eval_st_big(&s, &t, cfg)
            }
        }
    }

    /// Double-precision value at `(s, t)` through the default configuration.
    pub fn value_st(&self, s: f64, t: f64) -> f64 {
        mp::to_f64(&self.eval_st(s, t, &EvalConfig::default()))
    }
}
