//! Integration of `b2` over the ξ-plane: the polar change of variables,
//! exact angular integration, and radial integration into applications of
//! modified logarithms of the modular operator `Δ(x) = k⁻² x k²`.
//!
//! Radial integration works one word at a time. A word
//! `u^p b0^{j0} k^{a0} Y1 b0^{j1} k^{a1} Y2 b0 k^{a2}` is read in an
//! eigenbasis of `k`; every power of `k` is either absorbed by the weight
//! of the rearrangement lemma or becomes a power of `Δ` on one of the normalised letters
//! `Y1 k^{-e1}` and `k^{-e2} Y2`.

mod collect;
mod numeric;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::coeffring::{GaussRat, ScalarMono, ScalarPoly, Var};
use crate::modfun::{ModFun, ModFunError, Registry};
use crate::ncsymbol::{print_word, Atom, NcError, SymbolExpr, Word};
use crate::parametrix::{compute_parametrix, operator_symbol, Half};

pub use collect::{collect_to_basis, Grouped, SlotKind};
pub use numeric::{angular_oracle, eval_modular, radial_oracle, OracleReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("negative power of t2 survives angular integration in {0}")]
    ResidualTau2(String),
    #[error("no lemma pattern fits {0}")]
    PatternMismatch(String),
    #[error("no basis slot fits {0}")]
    UnmatchedTarget(String),
    #[error(transparent)]
    Function(#[from] ModFunError),
    #[error(transparent)]
    Matrix(#[from] NcError),
}

/// `coeff · cos^p φ · sin^q φ · word`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrigTerm {
    pub coeff: ScalarPoly,
    pub trig: (u32, u32),
    pub word: Word,
}

type TrigPoly = BTreeMap<(u32, u32), ScalarPoly>;

fn trig_mul(a: &TrigPoly, b: &TrigPoly) -> TrigPoly {
    let mut out = TrigPoly::new();
    for (&(p1, q1), c1) in a {
        for (&(p2, q2), c2) in b {
            let e = out
                .entry((p1 + p2, q1 + q2))
                .or_insert_with(ScalarPoly::zero);
            *e += &(c1 * c2);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn mono(c: i64, v: &[(Var, i32)]) -> ScalarPoly {
    let mut m = ScalarMono::one();
    for &(x, e) in v {
        m = m.with_exp(x, e);
    }
    ScalarPoly::term(GaussRat::from_int(c), m)
}

/// Powers of `ξ1 = r cos φ − r (τ1/τ2) sin φ` and `ξ2 = (r/τ2) sin φ`.
struct PolarPowers {
    xi1: Vec<TrigPoly>,
    xi2: Vec<TrigPoly>,
}

impl PolarPowers {
    fn new() -> Self {
        let one: TrigPoly = [((0, 0), ScalarPoly::one())].into_iter().collect();
        let xi1: TrigPoly = [
            ((1, 0), mono(1, &[(Var::Rv, 1)])),
            (
                (0, 1),
                mono(-1, &[(Var::Rv, 1), (Var::T1, 1), (Var::T2, -1)]),
            ),
        ]
        .into_iter()
        .collect();
        let xi2: TrigPoly = [((0, 1), mono(1, &[(Var::Rv, 1), (Var::T2, -1)]))]
            .into_iter()
            .collect();
        PolarPowers {
            xi1: vec![one.clone(), xi1],
            xi2: vec![one, xi2],
        }
    }

    fn get(v: &mut Vec<TrigPoly>, n: usize) -> TrigPoly {
        while v.len() <= n {
            let next = trig_mul(v.last().unwrap(), &v[1]);
            v.push(next);
        }
        v[n].clone()
    }

    fn of(&mut self, a: i32, b: i32) -> TrigPoly {
        let x = Self::get(&mut self.xi1, a as usize);
        let y = Self::get(&mut self.xi2, b as usize);
        trig_mul(&x, &y)
    }
}

/// Expands every ξ monomial through the polar substitution. `b0` keeps its
/// meaning, now read as `(r²k² + 1)⁻¹`.
pub fn polar_substitute(x: &SymbolExpr) -> Vec<TrigTerm> {
    let mut pw = PolarPowers::new();
    let mut acc: BTreeMap<(Word, (u32, u32)), ScalarPoly> = BTreeMap::new();
    for (w, p) in x.iter() {
        for (m, c) in p.iter() {
            let (a, b) = (m.exp(Var::X1), m.exp(Var::X2));
            assert!(a >= 0 && b >= 0, "negative power of xi");
            let rest = ScalarPoly::term(c.clone(), m.with_exp(Var::X1, 0).with_exp(Var::X2, 0));
            for (pq, t) in pw.of(a, b) {
                let e = acc.entry((w.clone(), pq)).or_insert_with(ScalarPoly::zero);
                *e += &(&t * &rest);
            }
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((word, trig), coeff)| TrigTerm { coeff, trig, word })
        .collect()
}

fn double_factorial(n: i64) -> BigInt {
    let mut r = BigInt::from(1);
    let mut k = n;
    while k > 1 {
        r *= k;
        k -= 2;
    }
    r
}

/// `(1/π) ∫₀^{2π} cos^p φ sin^q φ dφ`.
pub fn angular_moment(p: u32, q: u32) -> BigRational {
    if p % 2 == 1 || q % 2 == 1 {
        return BigRational::from_integer(0.into());
    }
    let (p, q) = (p as i64, q as i64);
    BigRational::new(
        double_factorial(p - 1) * double_factorial(q - 1) * 2,
        double_factorial(p + q),
    )
}

/// Integrates over φ. The result is the coefficient of `π`; the Jacobian
/// `r/τ2` is left out.
pub fn angular_integrate(ts: &[TrigTerm]) -> Result<SymbolExpr, ReduceError> {
    let mut out = SymbolExpr::zero();
    for t in ts {
        let w = angular_moment(t.trig.0, t.trig.1);
        if w == BigRational::from_integer(0.into()) {
            continue;
        }
        out.add_term(t.word.clone(), &t.coeff.scale_q(&w));
    }
    for (w, p) in out.iter() {
        if p.min_exp(Var::T2).is_some_and(|e| e < 0) {
            return Err(ReduceError::ResidualTau2(print_word(w)));
        }
    }
    Ok(out)
}

/// A letter `Δ^{q}(base)` with `q = q2/2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModLetter {
    pub q2: i32,
    pub base: Word,
}

impl ModLetter {
    pub fn new(q2: i32, base: Word) -> Self {
        assert!(!base.has_b0(), "letters carry no b0");
        ModLetter { q2, base }
    }

    pub fn q(&self) -> f64 {
        self.q2 as f64 / 2.0
    }
}

fn half_string(q2: i32) -> String {
    if q2 % 2 == 0 {
        format!("{}", q2 / 2)
    } else {
        format!("{}/2", q2)
    }
}

impl fmt::Display for ModLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q2 == 0 {
            write!(f, "({})", print_word(&self.base))
        } else {
            write!(f, "Δ^{}({})", half_string(self.q2), print_word(&self.base))
        }
    }
}

#[derive(Clone, Debug)]
pub enum Application {
    One {
        fun: ModFun,
        arg: ModLetter,
    },
    Two {
        fun: ModFun,
        left: ModLetter,
        right: ModLetter,
    },
}

impl Application {
    pub fn fun(&self) -> &ModFun {
        match self {
            Application::One { fun, .. } | Application::Two { fun, .. } => fun,
        }
    }

    pub fn letters(&self) -> Vec<&ModLetter> {
        match self {
            Application::One { arg, .. } => vec![arg],
            Application::Two { left, right, .. } => vec![left, right],
        }
    }

    fn key(&self) -> (String, Vec<ModLetter>) {
        (
            self.fun().name().to_string(),
            self.letters().into_iter().cloned().collect(),
        )
    }
}

impl fmt::Display for Application {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Application::One { fun, arg } => write!(f, "{}(Δ){}", fun.name(), arg),
            Application::Two { fun, left, right } => {
                write!(f, "{}(Δ1,Δ2)({}·{})", fun.name(), left, right)
            }
        }
    }
}

/// Sum of `coeff · application`, coefficients polynomial in τ. When `pi`
/// is set the whole sum carries an overall factor `π`.
#[derive(Clone, Debug, Default)]
pub struct ModularExpr {
    terms: BTreeMap<(String, Vec<ModLetter>), (Application, ScalarPoly)>,
    pub pi: bool,
}

impl ModularExpr {
    pub fn new(pi: bool) -> Self {
        ModularExpr {
            terms: BTreeMap::new(),
            pi,
        }
    }

    pub fn add(&mut self, c: &ScalarPoly, app: Application) {
        let key = app.key();
        let e = self
            .terms
            .entry(key.clone())
            .or_insert_with(|| (app, ScalarPoly::zero()));
        e.1 += c;
        if e.1.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ScalarPoly, &Application)> {
        self.terms.values().map(|(a, c)| (c, a))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the application with this function name and letters.
    pub fn coeff(&self, fun: &str, letters: &[ModLetter]) -> ScalarPoly {
        self.terms
            .get(&(fun.to_string(), letters.to_vec()))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(ScalarPoly::zero)
    }
}

impl fmt::Display for ModularExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        if self.pi {
            f.write_str("π × [\n")?;
        }
        for (c, a) in self.iter() {
            writeln!(f, "  ({}) {}", c, a)?;
        }
        if self.pi {
            f.write_str("]\n")?;
        }
        Ok(())
    }
}

/// A word brought to lemma form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    /// Power of `k` the lemma needs in front: `2m+2` for one letter,
    /// `2(m+m')` for two.
    pub sigma: i32,
    /// Power of `u = r²`.
    pub u_power: i32,
    /// `b0` exponents of the blocks, the last one being 1.
    pub b0: Vec<u32>,
    pub letters: Vec<ModLetter>,
}

impl Pattern {
    /// Registry name of the function the lemma produces.
    pub fn function(&self) -> String {
        match self.b0.as_slice() {
            [j0, _] => format!("L{}", j0 - 1),
            [j0, j1, _] => format!("D{}{}", j0, j1),
            _ => unreachable!(),
        }
    }
}

/// Total weight of a `b0`-free word, counting `k` and each `δ(k)` as 1.
fn weight(atoms: &[Atom]) -> i32 {
    atoms
        .iter()
        .map(|a| match a {
            Atom::Kpow(n) => *n,
            Atom::DK(..) => 1,
            Atom::B0pow(_) => 0,
        })
        .sum()
}

/// Splits a word into its `b0` blocks `(j, k-power)` and the letters
/// between them.
fn blocks(w: &Word) -> Option<(Vec<(u32, i32)>, Vec<Vec<Atom>>)> {
    let mut bl: Vec<(u32, i32)> = Vec::new();
    let mut letters: Vec<Vec<Atom>> = Vec::new();
    let mut cur: Vec<Atom> = Vec::new();
    for a in w.atoms() {
        match *a {
            Atom::B0pow(j) => {
                if !cur.is_empty() {
                    if bl.len() == letters.len() {
                        return None;
                    }
                    letters.push(std::mem::take(&mut cur));
                }
                bl.push((j, 0));
            }
            Atom::Kpow(n) => {
                if cur.is_empty() && bl.len() > letters.len() {
                    bl.last_mut().unwrap().1 += n;
                } else {
                    cur.push(*a);
                }
            }
            Atom::DK(..) => {
                if bl.len() == letters.len() {
                    return None;
                }
                cur.push(*a);
            }
        }
    }
    if !cur.is_empty() || bl.len() != letters.len() + 1 {
        return None;
    }
    Some((bl, letters))
}

fn with_k(pre: i32, atoms: &[Atom], post: i32) -> Word {
    let mut v = vec![Atom::Kpow(pre)];
    v.extend_from_slice(atoms);
    v.push(Atom::Kpow(post));
    Word::new(v.into_iter().filter(|a| *a != Atom::Kpow(0)).collect())
}

/// Reads `u^p · w` as a lemma pattern. One letter:
/// `u^m b0^{m+1} k^{a0} Y b0 k^{a1}` with `ρ = Δ^{a1/2}(k^{-e} Y)`. Two letters:
/// `u^{m+m'-1} b0^m k^{a0} Y1 b0^{m'} k^{a1} Y2 b0 k^{a2}` with
/// `Δ^{-a0/2}(Y1 k^{-e1})` and `Δ^{a2/2}(k^{-e2} Y2)`.
pub fn delta_twist_normalize(w: &Word, p: i32) -> Result<Pattern, ReduceError> {
    let mismatch = || ReduceError::PatternMismatch(format!("r^{}*{}", 2 * p, print_word(w)));
    let (bl, letters) = blocks(w).ok_or_else(mismatch)?;
    if bl.iter().any(|b| b.0 == 0) || bl.last().map(|b| b.0) != Some(1) {
        return Err(mismatch());
    }
    let total_k: i32 =
        bl.iter().map(|b| b.1).sum::<i32>() + letters.iter().map(|l| weight(l)).sum::<i32>();
    let b0: Vec<u32> = bl.iter().map(|b| b.0).collect();
    match (bl.as_slice(), letters.as_slice()) {
        ([(j0, a0), (_, a1)], [y]) => {
            let m = *j0 as i32 - 1;
            let sigma = 2 * m + 2;
            if p != m || total_k != sigma {
                return Err(mismatch());
            }
            let _ = a0;
            let e = weight(y);
            Ok(Pattern {
                sigma,
                u_power: p,
                b0,
                letters: vec![ModLetter::new(*a1, with_k(-e, y, 0))],
            })
        }
        ([(j0, a0), (j1, _), (_, a2)], [y1, y2]) => {
            let (m, mp) = (*j0 as i32, *j1 as i32);
            let sigma = 2 * (m + mp);
            if p != m + mp - 1 || total_k != sigma {
                return Err(mismatch());
            }
            Ok(Pattern {
                sigma,
                u_power: p,
                b0,
                letters: vec![
                    ModLetter::new(-a0, with_k(0, y1, -weight(y1))),
                    ModLetter::new(*a2, with_k(-weight(y2), y2, 0)),
                ],
            })
        }
        _ => Err(mismatch()),
    }
}

/// `∫₀^∞ · r dr` of the angular output (a coefficient of `π`), through the
/// one- and two-letter lemmas; the ½ of `r dr = du/2` is applied here.
pub fn radial_integrate(x: &SymbolExpr) -> Result<ModularExpr, ReduceError> {
    radial_integrate_with(x, Registry::standard())
}

pub fn radial_integrate_with(x: &SymbolExpr, reg: &Registry) -> Result<ModularExpr, ReduceError> {
    let half = BigRational::new(1.into(), 2.into());
    let mut out = ModularExpr::new(true);
    for (w, poly) in x.iter() {
        for (m, c) in poly.iter() {
            let r = m.exp(Var::Rv);
            if r % 2 != 0 || m.exp(Var::X1) != 0 || m.exp(Var::X2) != 0 {
                return Err(ReduceError::PatternMismatch(format!(
                    "{}*{}",
                    m,
                    print_word(w)
                )));
            }
            let pat = delta_twist_normalize(w, r / 2)?;
            let fun = reg.closed_form(&pat.function())?;
            let coeff = ScalarPoly::term(c.scale(&half), m.with_exp(Var::Rv, 0));
            let app = match pat.letters.as_slice() {
                [a] => Application::One {
                    fun,
                    arg: a.clone(),
                },
                [l, r] => Application::Two {
                    fun,
                    left: l.clone(),
                    right: r.clone(),
                },
                _ => unreachable!(),
            };
            out.add(&coeff, app);
        }
    }
    Ok(out)
}

/// The three stages of integrating `b2` of one half.
#[derive(Clone, Debug)]
pub struct Integrated {
    pub half: Half,
    pub b2: SymbolExpr,
    /// Coefficient of π after the φ-integration.
    pub angular: SymbolExpr,
    pub radial: ModularExpr,
    pub grouped: Grouped,
}

pub fn integrate_half(half: Half) -> Result<Integrated, ReduceError> {
    let b2 = compute_parametrix(&operator_symbol(half)).b2;
    let angular = angular_integrate(&polar_substitute(&b2))?;
    let radial = radial_integrate(&angular)?;
    let grouped = collect_to_basis(&radial, half)?;
    Ok(Integrated {
        half,
        b2,
        angular,
        radial,
        grouped,
    })
}

#[cfg(test)]
mod tests;
