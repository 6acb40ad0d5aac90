//! Text form of symbol expressions.
//!
//! Terms are `coeff*monomial*word` joined by ` + `, one term per scalar
//! monomial. Words are atoms joined by `*`: `k`, `k^n`, `d1(k)`, `d2(k)`,
//! `d1^2(k)`, `d1d2(k)`, `d2^2(k)`, `b0`, `b0^j`. The parser also accepts
//! grouped forms such as `d1(k^2)` and arbitrary parenthesized sums.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use super::{delta_multi, Atom, SymbolExpr, Word};
use crate::coeffring::{GaussRat, ScalarMono, ScalarPoly, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PrintOptions {
    /// Fold `k δ(k) + δ(k) k` pairs with equal coefficients into `d(k^2)`.
    pub grouped_k2: bool,
}

fn dk_name(a: u8, b: u8) -> String {
    let mut s = String::new();
    if a > 0 {
        s.push_str("d1");
        if a > 1 {
            s.push_str(&format!("^{}", a));
        }
    }
    if b > 0 {
        s.push_str("d2");
        if b > 1 {
            s.push_str(&format!("^{}", b));
        }
    }
    s
}

fn print_atom(a: &Atom) -> String {
    match *a {
        Atom::Kpow(1) => "k".to_string(),
        Atom::Kpow(n) => format!("k^{}", n),
        Atom::DK(a, b) => format!("{}(k)", dk_name(a, b)),
        Atom::B0pow(1) => "b0".to_string(),
        Atom::B0pow(j) => format!("b0^{}", j),
    }
}

pub fn print_word(w: &Word) -> String {
    w.atoms()
        .iter()
        .map(print_atom)
        .collect::<Vec<_>>()
        .join("*")
}

fn print_term(c: &GaussRat, m: &ScalarMono, body: &str) -> String {
    let mut s = c.to_string();
    if !m.is_one() {
        s.push('*');
        s.push_str(&m.to_string());
    }
    if !body.is_empty() {
        s.push('*');
        s.push_str(body);
    }
    s
}

pub(super) fn print_expr(x: &SymbolExpr, opts: &PrintOptions) -> String {
    let mut triples: Vec<(Word, ScalarMono, GaussRat)> = Vec::new();
    for (w, p) in x.iter() {
        for (m, c) in p.iter() {
            triples.push((w.clone(), *m, c.clone()));
        }
    }
    if triples.is_empty() {
        return "0".to_string();
    }
    let mut out = Vec::with_capacity(triples.len());
    if !opts.grouped_k2 {
        for (w, m, c) in &triples {
            out.push(print_term(c, m, &print_word(w)));
        }
        return out.join(" + ");
    }
    let index: std::collections::BTreeMap<(Word, ScalarMono), usize> = triples
        .iter()
        .enumerate()
        .map(|(i, (w, m, _))| ((w.clone(), *m), i))
        .collect();
    let mut used = BTreeSet::new();
    for (i, (w, m, c)) in triples.iter().enumerate() {
        if used.contains(&i) {
            continue;
        }
        let mut printed = None;
        for (partner, body) in k2_pairs(w) {
            if let Some(&j) = index.get(&(partner, *m)) {
                if j != i && !used.contains(&j) && triples[j].2 == *c {
                    used.insert(j);
                    printed = Some(body);
                    break;
                }
            }
        }
        used.insert(i);
        let body = printed.unwrap_or_else(|| print_word(w));
        out.push(print_term(c, m, &body));
    }
    out.join(" + ")
}

/// For each first-order `δj(k)` in `w` preceded by a positive `k` power,
/// the partner word with that `k` moved to the right and the grouped text.
fn k2_pairs(w: &Word) -> Vec<(Word, String)> {
    let atoms = w.atoms();
    let mut res = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        let j = match a {
            Atom::DK(1, 0) => 1,
            Atom::DK(0, 1) => 2,
            _ => continue,
        };
        let Some(Atom::Kpow(n)) = i.checked_sub(1).map(|p| atoms[p]) else {
            continue;
        };
        if n < 1 {
            continue;
        }
        let mut left: Vec<Atom> = atoms[..i - 1].to_vec();
        if n > 1 {
            left.push(Atom::Kpow(n - 1));
        }
        let right: Vec<Atom> = atoms[i + 1..].to_vec();
        let mut partner = left.clone();
        partner.push(*a);
        partner.push(Atom::Kpow(1));
        partner.extend_from_slice(&right);
        let partner = Word::new(partner);
        let mut parts: Vec<String> = left.iter().map(print_atom).collect();
        parts.push(format!("d{}(k^2)", j));
        parts.extend(right.iter().map(print_atom));
        res.push((partner, parts.join("*")));
    }
    res
}

pub fn parse_expr(s: &str) -> Result<SymbolExpr, ParseError> {
    let mut p = Parser {
        s: s.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<SymbolExpr, ParseError> {
        let mut acc = SymbolExpr::zero();
        let mut sign = 1i64;
        if self.eat(b'-') {
            sign = -1;
        } else {
            self.eat(b'+');
        }
        loop {
            let t = self.term()?;
            acc.add_assign(&t.scale_int(sign));
            if self.eat(b'+') {
                sign = 1;
            } else if self.eat(b'-') {
                sign = -1;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SymbolExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let f = self.factor()?;
                acc = acc.mul(&f);
            } else if self.eat(b'/') {
                let d = self.integer()?;
                if d == BigInt::from(0) {
                    return Err(self.err("division by zero"));
                }
                acc = acc.scale_q(&BigRational::new(BigInt::from(1), d));
            } else {
                return Ok(acc);
            }
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        Ok(txt.parse().expect("digits parse"))
    }

    /// `^n`, `^-n` or `^(-n)`; absent means 1.
    fn exponent(&mut self) -> Result<i64, ParseError> {
        if !self.eat(b'^') {
            return Ok(1);
        }
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let n: i64 = self
            .integer()?
            .try_into()
            .map_err(|_| self.err("exponent too large"))?;
        if paren {
            self.expect(b')')?;
        }
        Ok(if neg { -n } else { n })
    }

    fn ident(&mut self) -> String {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn factor(&mut self) -> Result<SymbolExpr, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(SymbolExpr::scalar(ScalarPoly::constant(GaussRat::real(
                    BigRational::from_integer(n),
                ))))
            }
            Some(b'd')
                if self
                    .s
                    .get(self.pos + 1)
                    .is_some_and(|c| *c == b'1' || *c == b'2') =>
            {
                self.derivative()
            }
            Some(_) => {
                let start = self.pos;
                let id = self.ident();
                match id.as_str() {
                    "I" => Ok(SymbolExpr::scalar(ScalarPoly::constant(GaussRat::i()))),
                    "k" => {
                        let n = self.exponent()?;
                        Ok(SymbolExpr::kpow(n as i32))
                    }
                    "b0" => {
                        let n = self.exponent()?;
                        if n < 0 {
                            return Err(self.err("negative b0 power"));
                        }
                        Ok(if n == 0 {
                            SymbolExpr::one()
                        } else {
                            SymbolExpr::atom(Atom::B0pow(n as u32))
                        })
                    }
                    "" => Err(self.err("unexpected character")),
                    name => match Var::from_name(name) {
                        Some(v) => {
                            let n = self.exponent()?;
                            Ok(SymbolExpr::scalar(ScalarPoly::term(
                                GaussRat::one(),
                                ScalarMono::var_pow(v, n as i32),
                            )))
                        }
                        None => {
                            self.pos = start;
                            Err(self.err(&format!("unknown identifier '{}'", name)))
                        }
                    },
                }
            }
        }
    }

    /// `d1^a d2^b(k^n)`, in any order of `d1`/`d2` pieces.
    fn derivative(&mut self) -> Result<SymbolExpr, ParseError> {
        let (mut a, mut b) = (0i64, 0i64);
        while self.s.get(self.pos) == Some(&b'd') {
            let which = self.s.get(self.pos + 1).copied();
            self.pos += 2;
            let n = self.exponent()?;
            if n < 0 {
                return Err(self.err("negative derivative order"));
            }
            match which {
                Some(b'1') => a += n,
                Some(b'2') => b += n,
                _ => return Err(self.err("expected d1 or d2")),
            }
        }
        self.expect(b'(')?;
        let inner = self.expr()?;
        self.expect(b')')?;
        if a + b == 0 {
            return Err(self.err("empty derivative"));
        }
        Ok(delta_multi(a as u32, b as u32, &inner))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_print_and_parse() {
        let w = Word::new(vec![
            Atom::B0pow(2),
            Atom::Kpow(3),
            Atom::DK(1, 0),
            Atom::B0pow(1),
            Atom::DK(1, 1),
            Atom::Kpow(-1),
            Atom::DK(0, 2),
        ]);
        let txt = print_word(&w);
        assert_eq!(txt, "b0^2*k^3*d1(k)*b0*d1d2(k)*k^-1*d2^2(k)");
        assert_eq!(parse_expr(&txt).unwrap(), SymbolExpr::word(w));
    }

    #[test]
    fn coefficients_and_monomials() {
        let e = parse_expr("(1/2+3/4*I)*x1^2*t2^-1*k*d1(k) - (2)*r^4*b0").unwrap();
        let again = parse_expr(&e.to_string()).unwrap();
        assert_eq!(e, again);
        let w = Word::new(vec![Atom::Kpow(1), Atom::DK(1, 0)]);
        let m = ScalarMono::var_pow(Var::X1, 2).mul(&ScalarMono::var_pow(Var::T2, -1));
        assert_eq!(
            e.coeff_at(&w, &m),
            GaussRat::new(
                BigRational::new(1.into(), 2.into()),
                BigRational::new(3.into(), 4.into())
            )
        );
    }

    #[test]
    fn grouped_square() {
        let e = parse_expr("d1(k^2)*b0").unwrap();
        let direct = parse_expr("k*d1(k)*b0 + d1(k)*k*b0").unwrap();
        assert_eq!(e, direct);
        let g = e.print(&PrintOptions { grouped_k2: true });
        assert_eq!(g, "(1)*d1(k^2)*b0");
        assert_eq!(parse_expr(&g).unwrap(), e);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_expr("k*").is_err());
        assert!(parse_expr("zz").is_err());
        assert!(parse_expr("(1/0)").is_err());
    }
}
