//! Grouping of the radial output on the basis `k⁻¹δᵢδⱼ(k)`,
//! `k⁻²δᵢ(k)δⱼ(k)` and `(δᵢ(k)k⁻¹)(k⁻¹δⱼ(k))`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::{Application, ModLetter, ModularExpr, ReduceError};
use crate::coeffring::{GaussRat, ScalarMono, ScalarPoly, Var};
use crate::modfun::{ModFun, RatFun, View};
use crate::ncsymbol::{print_word, Atom, Word};
use crate::parametrix::Half;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    /// `k⁻¹ δᵢδⱼ(k)`
    Second,
    /// `k⁻² δᵢ(k) δⱼ(k)`
    Product,
    /// `(δᵢ(k) k⁻¹)(k⁻¹ δⱼ(k))`
    Pair,
}

/// Output of [`collect_to_basis`]: the grouped expression and the
/// two-variable and one-variable functions it was assembled from.
#[derive(Clone, Debug)]
pub struct Grouped {
    pub half: Half,
    pub expr: ModularExpr,
    pub assembled: BTreeMap<String, RatFun>,
}

impl Grouped {
    pub fn function(&self, name: &str) -> Option<&RatFun> {
        self.assembled.get(name)
    }
}

fn first_order(a: &Atom) -> Option<(u8, u8)> {
    match *a {
        Atom::DK(x, y) if x + y == 1 => Some((x, y)),
        _ => None,
    }
}

fn classify(slot: &[Word]) -> Option<SlotKind> {
    match slot {
        [w] => match w.atoms() {
            [Atom::Kpow(-1), Atom::DK(x, y)] if x + y == 2 => Some(SlotKind::Second),
            [Atom::Kpow(-2), a, b] if first_order(a).is_some() && first_order(b).is_some() => {
                Some(SlotKind::Product)
            }
            _ => None,
        },
        [l, r] => match (l.atoms(), r.atoms()) {
            ([a, Atom::Kpow(-1)], [Atom::Kpow(-1), b])
                if first_order(a).is_some() && first_order(b).is_some() =>
            {
                Some(SlotKind::Pair)
            }
            _ => None,
        },
        _ => None,
    }
}

fn dk(x: u8, y: u8) -> Atom {
    Atom::DK(x, y)
}

pub(crate) fn second_slot(x: u8, y: u8) -> Vec<Word> {
    vec![Word::new(vec![Atom::Kpow(-1), dk(x, y)])]
}

pub(crate) fn product_slot(i: (u8, u8), j: (u8, u8)) -> Vec<Word> {
    vec![Word::new(vec![Atom::Kpow(-2), dk(i.0, i.1), dk(j.0, j.1)])]
}

pub(crate) fn pair_slot(i: (u8, u8), j: (u8, u8)) -> Vec<Word> {
    vec![
        Word::new(vec![dk(i.0, i.1), Atom::Kpow(-1)]),
        Word::new(vec![Atom::Kpow(-1), dk(j.0, j.1)]),
    ]
}

const D1: (u8, u8) = (1, 0);
const D2: (u8, u8) = (0, 1);

/// Where each basis function is read off, with the coefficient it has there:
/// `(name, slot, τ-monomial, imaginary part, sign)`.
fn anchors(half: Half) -> Vec<(&'static str, Vec<Word>, ScalarMono, bool, i64)> {
    let one = ScalarMono::one();
    let names = match half {
        Half::Functions => ["f1", "f2", "F"],
        Half::Forms => ["g1", "g2", "G"],
    };
    let mut v = vec![
        (names[0], second_slot(2, 0), one, false, 1),
        (names[1], product_slot(D1, D1), one, false, 1),
        (names[2], pair_slot(D1, D1), one, false, 1),
    ];
    if half == Half::Forms {
        v.push(("L", pair_slot(D1, D2), ScalarMono::var(Var::T2), true, -1));
    }
    v
}

fn candidates(half: Half, kind: SlotKind) -> &'static [&'static str] {
    match (half, kind) {
        (Half::Functions, SlotKind::Second) => &["f1"],
        (Half::Functions, SlotKind::Product) => &["f2"],
        (Half::Functions, SlotKind::Pair) => &["F"],
        (Half::Forms, SlotKind::Second) => &["g1"],
        (Half::Forms, SlotKind::Product) => &["g2"],
        (Half::Forms, SlotKind::Pair) => &["G", "L"],
    }
}

/// `f · u^{q1} v^{q2}` for the letters' Δ-powers.
fn absorbed(app: &Application) -> (RatFun, Vec<Word>) {
    match app {
        Application::One { fun, arg } => (
            fun.rat().mul(&RatFun::root(2 * arg.q2, 0)),
            vec![arg.base.clone()],
        ),
        Application::Two { fun, left, right } => (
            fun.rat().mul(&RatFun::root(2 * left.q2, 2 * right.q2)),
            vec![left.base.clone(), right.base.clone()],
        ),
    }
}

fn slot_string(slot: &[Word]) -> String {
    slot.iter()
        .map(|w| format!("({})", print_word(w)))
        .collect::<Vec<_>>()
        .join("·")
}

type Parts = BTreeMap<ScalarMono, [RatFun; 2]>;

/// Sums the Δ-decorations into the functions and groups the result on the
/// basis. Each basis function is assembled from its anchor slot; every
/// other slot must be a rational multiple of one of them.
pub fn collect_to_basis(m: &ModularExpr, half: Half) -> Result<Grouped, ReduceError> {
    let mut slots: BTreeMap<Vec<Word>, Parts> = BTreeMap::new();
    for (coeff, app) in m.iter() {
        let (f, slot) = absorbed(app);
        let parts = slots.entry(slot).or_default();
        for (mono, c) in coeff.iter() {
            let e = parts
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
    let mut kinds = BTreeMap::new();
    for slot in slots.keys() {
        let kind = classify(slot).ok_or_else(|| ReduceError::UnmatchedTarget(slot_string(slot)))?;
        kinds.insert(slot.clone(), kind);
    }

    let mut assembled = BTreeMap::new();
    let mut funs = BTreeMap::new();
    if !slots.is_empty() {
        for (name, slot, mono, imag, sign) in anchors(half) {
            let f = slots
                .get(&slot)
                .and_then(|p| p.get(&mono))
                .map(|p| p[imag as usize].scale(&BigRational::from_integer(sign.into())))
                .ok_or_else(|| ReduceError::UnmatchedTarget(format!("{} anchor", name)))?
                .reduced();
            let arity = if slot.len() == 1 { 1 } else { 2 };
            funs.insert(name, ModFun::new(name, arity, View::Rational, f.clone()));
            assembled.insert(name.to_string(), f);
        }
    }

    let mut out = ModularExpr::new(m.pi);
    for (slot, parts) in &slots {
        let kind = kinds[slot];
        for (mono, pair) in parts {
            for (imag, r) in pair.iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                let hit = candidates(half, kind).iter().find_map(|n| {
                    let c = r.div(funs[n].rat()).reduced().as_constant()?;
                    Some((*n, c))
                });
                let (name, c) = hit.ok_or_else(|| {
                    ReduceError::UnmatchedTarget(format!("{} at {}", slot_string(slot), mono))
                })?;
                let zero = BigRational::zero();
                let g = if imag == 1 {
                    GaussRat::new(zero, c)
                } else {
                    GaussRat::new(c, zero)
                };
                let fun = funs[name].clone();
                let letters: Vec<ModLetter> =
                    slot.iter().map(|w| ModLetter::new(0, w.clone())).collect();
                let app = match letters.as_slice() {
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
                out.add(&ScalarPoly::term(g, *mono), app);
            }
        }
    }
    Ok(Grouped {
        half,
        expr: out,
        assembled,
    })
}
