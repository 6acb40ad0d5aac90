//! Passage from the `k`-derivative basis to derivatives of `log k`, and the
//! assembly of the curvature functions.
//!
//! Functions here live in the exponential view: a one-variable function is
//! applied to `log Δ`, a two-variable one to `(log Δ(1), log Δ(2))`. They are
//! stored as rational functions of `u = e^s`, `v = e^t`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::coeffring::{GaussRat, ScalarMono, ScalarPoly, Var};
use crate::modfun::{ModFun, ModFunError, RatFun, Registry, View};
use crate::ncsymbol::Atom;
use crate::parametrix::Half;
use crate::reduce::{Application, Grouped};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogFormError {
    #[error("no log-basis target fits {0}")]
    UnmatchedTarget(String),
    #[error("coefficients do not have the expected shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Function(#[from] ModFunError),
}

/// What a function of the modular operator is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogTarget {
    /// `δ1^a δ2^b (log k)` with `a + b = 2`.
    Linear(u8, u8),
    /// `δi(log k) · δj(log k)`, `i, j ∈ {1, 2}`.
    Pair(u8, u8),
}

impl LogTarget {
    pub fn arity(self) -> u8 {
        match self {
            LogTarget::Linear(..) => 1,
            LogTarget::Pair(..) => 2,
        }
    }
}

impl fmt::Display for LogTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LogTarget::Linear(2, 0) => write!(f, "δ1²(log k)"),
            LogTarget::Linear(0, 2) => write!(f, "δ2²(log k)"),
            LogTarget::Linear(a, b) => write!(f, "δ1^{}δ2^{}(log k)", a, b),
            LogTarget::Pair(i, j) => write!(f, "δ{}(log k)·δ{}(log k)", i, j),
        }
    }
}

/// `Σ coeff · f(log Δ)(target)`. When `minus_pi_over_tau2` is set the true
/// value is `−π/τ2` times the sum.
#[derive(Clone, Debug, Default)]
pub struct LogBasisExpr {
    terms: BTreeMap<(String, LogTarget), (ModFun, ScalarPoly)>,
    pub minus_pi_over_tau2: bool,
}

impl LogBasisExpr {
    pub fn new(minus_pi_over_tau2: bool) -> Self {
        LogBasisExpr {
            terms: BTreeMap::new(),
            minus_pi_over_tau2,
        }
    }

    pub fn add(&mut self, c: &ScalarPoly, fun: &ModFun, target: LogTarget) {
        let key = (fun.name().to_string(), target);
        let e = self
            .terms
            .entry(key.clone())
            .or_insert_with(|| (fun.clone(), ScalarPoly::zero()));
        e.1 += c;
        if e.1.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ScalarPoly, &ModFun, LogTarget)> {
        self.terms.iter().map(|((_, t), (f, c))| (c, f, *t))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, fun: &str, target: LogTarget) -> ScalarPoly {
        self.terms
            .get(&(fun.to_string(), target))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(ScalarPoly::zero)
    }

    /// The function with this name, if some term uses it.
    pub fn function(&self, name: &str) -> Option<&ModFun> {
        self.terms
            .iter()
            .find(|((n, _), _)| n == name)
            .map(|(_, (f, _))| f)
    }

    pub fn function_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.terms.keys().map(|(n, _)| n.clone()).collect();
        v.dedup();
        v
    }

    /// Checks that the terms are exactly
    /// `lin(δ1² + |τ|²δ2² + 2τ1δ1δ2) + bil(δ1δ1 + |τ|²δ2δ2 + τ1δ1δ2 + τ1δ2δ1)`,
    /// plus `sign·iτ2·w(δ1δ2 − δ2δ1)` when `w` is given.
    pub fn check_shape(
        &self,
        lin: &str,
        bil: &str,
        w: Option<(&str, i64)>,
    ) -> Result<(), LogFormError> {
        let want = expected_shape(lin, bil, w);
        let mut keys: Vec<(String, LogTarget)> = self.terms.keys().cloned().collect();
        keys.extend(want.keys().cloned());
        keys.sort();
        keys.dedup();
        for (n, t) in keys {
            let got = self.coeff(&n, t);
            let exp = want
                .get(&(n.clone(), t))
                .cloned()
                .unwrap_or_else(ScalarPoly::zero);
            if got != exp {
                return Err(LogFormError::Shape(format!(
                    "{} on {}: have {}, expected {}",
                    n, t, got, exp
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for LogBasisExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        if self.minus_pi_over_tau2 {
            f.write_str("-π/τ2 × [\n")?;
        }
        for (c, fun, t) in self.iter() {
            let args = if t.arity() == 1 {
                "log Δ"
            } else {
                "log Δ1, log Δ2"
            };
            writeln!(f, "  ({}) {}({})({})", c, fun.name(), args, t)?;
        }
        if self.minus_pi_over_tau2 {
            f.write_str("]\n")?;
        }
        Ok(())
    }
}

fn expected_shape(
    lin: &str,
    bil: &str,
    w: Option<(&str, i64)>,
) -> BTreeMap<(String, LogTarget), ScalarPoly> {
    use LogTarget::*;
    let one = ScalarPoly::one();
    let tt = ScalarPoly::tau_abs2();
    let t1 = ScalarPoly::var(Var::T1);
    let mut m = BTreeMap::new();
    m.insert((lin.to_string(), Linear(2, 0)), one.clone());
    m.insert((lin.to_string(), Linear(0, 2)), tt.clone());
    m.insert((lin.to_string(), Linear(1, 1)), t1.scale_int(2));
    m.insert((bil.to_string(), Pair(1, 1)), one);
    m.insert((bil.to_string(), Pair(2, 2)), tt);
    m.insert((bil.to_string(), Pair(1, 2)), t1.clone());
    m.insert((bil.to_string(), Pair(2, 1)), t1);
    if let Some((name, sign)) = w {
        let it2 = ScalarPoly::term(
            GaussRat::new(BigRational::zero(), q(sign)),
            ScalarMono::var(Var::T2),
        );
        m.insert((name.to_string(), Pair(1, 2)), it2.clone());
        m.insert((name.to_string(), Pair(2, 1)), -&it2);
    }
    m
}

/// The curvature functional in closed form: named closed forms from the
/// registry in the shape checked by [`LogBasisExpr::check_shape`].
pub fn closed_curvature(graded: bool) -> Result<LogBasisExpr, LogFormError> {
    let reg = Registry::standard();
    let (lin, bil, sign) = if graded {
        ("R1g", "R2g", 1)
    } else {
        ("R1", "R2", -1)
    };
    let mut out = LogBasisExpr::new(true);
    for ((n, t), c) in expected_shape(lin, bil, Some(("W", sign))) {
        out.add(&c, &reg.closed_form(&n)?, t);
    }
    Ok(out)
}

/// One half of the curvature functional with its registered closed forms:
/// `K, H` for functions, `S, T, W` for forms.
pub fn half_form(half: Half) -> Result<LogBasisExpr, LogFormError> {
    let reg = Registry::standard();
    let shape = match half {
        Half::Functions => expected_shape("K", "H", None),
        Half::Forms => expected_shape("S", "T", Some(("W", -1))),
    };
    let mut out = LogBasisExpr::new(true);
    for ((n, t), c) in shape {
        out.add(&c, &reg.closed_form(&n)?, t);
    }
    Ok(out)
}

// Rational-view factors for the passage to log k.

fn sqrt_u() -> RatFun {
    RatFun::root(2, 0)
}

fn sqrt_v() -> RatFun {
    RatFun::root(0, 2)
}

/// `2(Δ^{1/2} − 1)/log Δ`, the symbol of `k⁻¹δ(k)` in terms of `δ(log k)`.
fn right_letter_u() -> RatFun {
    sqrt_u()
        .sub(&RatFun::one())
        .scale(&q(2))
        .div(&RatFun::log_u())
}

fn right_letter_v() -> RatFun {
    sqrt_v()
        .sub(&RatFun::one())
        .scale(&q(2))
        .div(&RatFun::log_v())
}

/// `−2(Δ^{−1/2} − 1)/log Δ`, the symbol of `δ(k)k⁻¹`.
fn left_letter_u() -> RatFun {
    RatFun::root(-2, 0)
        .sub(&RatFun::one())
        .scale(&q(-2))
        .div(&RatFun::log_u())
}

/// `4 (Δ − Δ^{1/2})/log Δ ⊗ (Δ^{1/2} − 1)/log Δ`, for `k⁻²δi(k)δj(k)`.
fn product_factor() -> RatFun {
    let a = RatFun::root(4, 0).sub(&sqrt_u()).div(&RatFun::log_u());
    let b = sqrt_v().sub(&RatFun::one()).div(&RatFun::log_v());
    a.mul(&b).scale(&q(4))
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn g_function() -> Result<RatFun, LogFormError> {
    Ok(Registry::standard().closed_form("g")?.rat().clone())
}

fn first_order(a: &Atom) -> Option<u8> {
    match *a {
        Atom::DK(1, 0) => Some(1),
        Atom::DK(0, 1) => Some(2),
        _ => None,
    }
}

/// Indices of `δ1^a δ2^b` as an ordered pair `(i, j)`.
fn second_indices(a: u8, b: u8) -> (u8, u8) {
    match (a, b) {
        (2, 0) => (1, 1),
        (0, 2) => (2, 2),
        _ => (1, 2),
    }
}

/// Contributions of one grouped application: `(target, rational factor)`
/// with the applied function already composed in.
fn rewrite(app: &Application, g: &RatFun) -> Option<Vec<(LogTarget, RatFun)>> {
    let letters = app.letters();
    if letters.iter().any(|l| l.q2 != 0) {
        return None;
    }
    let f = app.fun().rat();
    match letters.as_slice() {
        [l] => match l.base.atoms() {
            [Atom::Kpow(-1), Atom::DK(a, b)] if a + b == 2 => {
                let (i, j) = second_indices(*a, *b);
                let lin = f.mul(&right_letter_u());
                let bil = f.at_product().mul(g);
                Some(vec![
                    (LogTarget::Linear(*a, *b), lin),
                    (LogTarget::Pair(j, i), bil.clone()),
                    (LogTarget::Pair(i, j), bil),
                ])
            }
            [Atom::Kpow(-2), x, y] => {
                let (i, j) = (first_order(x)?, first_order(y)?);
                Some(vec![(
                    LogTarget::Pair(i, j),
                    f.at_product().mul(&product_factor()),
                )])
            }
            _ => None,
        },
        [l, r] => match (l.base.atoms(), r.base.atoms()) {
            ([x, Atom::Kpow(-1)], [Atom::Kpow(-1), y]) => {
                let (i, j) = (first_order(x)?, first_order(y)?);
                let fac = left_letter_u().mul(&right_letter_v());
                Some(vec![(LogTarget::Pair(i, j), f.mul(&fac))])
            }
            _ => None,
        },
        _ => None,
    }
}

type Parts = BTreeMap<LogTarget, BTreeMap<ScalarMono, [RatFun; 2]>>;

fn accumulate(parts: &mut Parts, target: LogTarget, coeff: &ScalarPoly, f: &RatFun) {
    let slot = parts.entry(target).or_default();
    for (mono, c) in coeff.iter() {
        let e = slot
            .entry(*mono)
            .or_insert_with(|| [RatFun::zero(), RatFun::zero()]);
        if !c.re.is_zero() {
            e[0] = e[0].add(&f.scale(&c.re));
        }
        if !c.im.is_zero() {
            e[1] = e[1].add(&f.scale(&c.im));
        }
    }
}

/// Anchor of a named function: where it is read off and with which factor.
struct Anchor {
    name: &'static str,
    target: LogTarget,
    mono: ScalarMono,
    imag: bool,
    sign: i64,
}

fn anchor(name: &'static str, target: LogTarget) -> Anchor {
    Anchor {
        name,
        target,
        mono: ScalarMono::one(),
        imag: false,
        sign: 1,
    }
}

fn w_anchor(name: &'static str, sign: i64) -> Anchor {
    Anchor {
        name,
        target: LogTarget::Pair(1, 2),
        mono: ScalarMono::var(Var::T2),
        imag: true,
        sign,
    }
}

/// Names the anchor functions and expresses every part as a rational
/// multiple of one of them. An anchor with nothing at its slot names no
/// function.
fn name_parts(parts: &Parts, anchors: &[Anchor], flag: bool) -> Result<LogBasisExpr, LogFormError> {
    let mut out = LogBasisExpr::new(flag);
    let mut funs: Vec<ModFun> = Vec::new();
    for a in anchors {
        let f = parts
            .get(&a.target)
            .and_then(|m| m.get(&a.mono))
            .map(|p| p[a.imag as usize].scale(&q(a.sign)).reduced())
            .filter(|f| !f.is_zero());
        if let Some(f) = f {
            funs.push(ModFun::new(a.name, a.target.arity(), View::Exponential, f));
        }
    }
    for (target, m) in parts {
        for (mono, pair) in m {
            for (imag, r) in pair.iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                let hit = funs
                    .iter()
                    .filter(|f| f.arity() == target.arity())
                    .find_map(|f| Some((f, r.div(f.rat()).reduced().as_constant()?)));
                let (fun, c) = hit.ok_or_else(|| {
                    LogFormError::UnmatchedTarget(format!("{} at {}", target, mono))
                })?;
                let g = if imag == 1 {
                    GaussRat::new(BigRational::zero(), c)
                } else {
                    GaussRat::new(c, BigRational::zero())
                };
                out.add(&ScalarPoly::term(g, *mono), fun, *target);
            }
        }
    }
    Ok(out)
}

fn half_anchors(half: Half) -> Vec<Anchor> {
    match half {
        Half::Functions => vec![
            anchor("K", LogTarget::Linear(2, 0)),
            anchor("H", LogTarget::Pair(1, 1)),
        ],
        Half::Forms => vec![
            anchor("S", LogTarget::Linear(2, 0)),
            anchor("T", LogTarget::Pair(1, 1)),
            w_anchor("W", -1),
        ],
    }
}

/// Rewrites a grouped half into the `log k` basis, applying the overall
/// sign `−1` of the curvature recipe. The named functions are `K, H` for
/// the functions half and `S, T, W` for the forms half.
pub fn k_to_log(x: &Grouped) -> Result<LogBasisExpr, LogFormError> {
    let g = g_function()?;
    let mut parts = Parts::new();
    let minus = ScalarPoly::int(-1);
    for (c, app) in x.expr.iter() {
        let pieces =
            rewrite(app, &g).ok_or_else(|| LogFormError::UnmatchedTarget(app.to_string()))?;
        let c = c * &minus;
        for (t, f) in pieces {
            accumulate(&mut parts, t, &c, &f);
        }
    }
    name_parts(&parts, &half_anchors(x.half), x.expr.pi)
}

/// Sum (ungraded) or difference (graded) of the two halves, named
/// `R1, R2, W` or `R1g, R2g, W`.
pub fn assemble_curvature(
    functions: &LogBasisExpr,
    forms: &LogBasisExpr,
    graded: bool,
) -> Result<LogBasisExpr, LogFormError> {
    let mut parts = Parts::new();
    for (c, f, t) in functions.iter() {
        accumulate(&mut parts, t, c, f.rat());
    }
    let sign = ScalarPoly::int(if graded { -1 } else { 1 });
    for (c, f, t) in forms.iter() {
        accumulate(&mut parts, t, &(c * &sign), f.rat());
    }
    let anchors = if graded {
        [
            anchor("R1g", LogTarget::Linear(2, 0)),
            anchor("R2g", LogTarget::Pair(1, 1)),
            w_anchor("W", 1),
        ]
    } else {
        [
            anchor("R1", LogTarget::Linear(2, 0)),
            anchor("R2", LogTarget::Pair(1, 1)),
            w_anchor("W", -1),
        ]
    };
    let flag = functions.minus_pi_over_tau2 || forms.minus_pi_over_tau2;
    name_parts(&parts, &anchors, flag)
}

#[cfg(test)]
mod tests;
