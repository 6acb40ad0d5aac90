//! Transcribed reference data: selected `b2` terms of both halves, and the
//! reference φ-integrated lists (coefficients of π).
//!
//! Each `b2` line is one `coeff*monomial*word` and carries the full
//! coefficient of that (word, monomial) pair.

use crate::coeffring::GaussRat;
use crate::ncsymbol::{parse_expr, print_word, ParseError, SymbolExpr};
use crate::parametrix::Half;

const B2_FUNCTIONS: &str = include_str!("../data/b2_functions.txt");
const B2_FORMS: &str = include_str!("../data/b2_forms.txt");
const ANGULAR_FUNCTIONS: &str = include_str!("../data/angular_functions.txt");
const ANGULAR_FORMS: &str = include_str!("../data/angular_forms.txt");

fn lines(txt: &str) -> impl Iterator<Item = &str> {
    txt.lines().map(str::trim).filter(|l| !l.is_empty())
}

pub fn b2_text(half: Half) -> &'static str {
    match half {
        Half::Functions => B2_FUNCTIONS,
        Half::Forms => B2_FORMS,
    }
}

pub fn angular_text(half: Half) -> &'static str {
    match half {
        Half::Functions => ANGULAR_FUNCTIONS,
        Half::Forms => ANGULAR_FORMS,
    }
}

/// The reference φ-integrated list as one expression.
pub fn angular_list(half: Half) -> Result<SymbolExpr, ParseError> {
    let mut sum = SymbolExpr::zero();
    for l in lines(angular_text(half)) {
        sum.add_assign(&parse_expr(l)?);
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GoldenCheck {
    pub term: String,
    pub expected: String,
    pub actual: String,
    pub matches: bool,
}

/// Compares every transcribed `b2` term with the coefficient found in `b2`.
pub fn check_b2(half: Half, b2: &SymbolExpr) -> Result<Vec<GoldenCheck>, ParseError> {
    let mut out = Vec::new();
    for l in lines(b2_text(half)) {
        let e = parse_expr(l)?;
        for (w, p) in e.iter() {
            for (m, c) in p.iter() {
                let got: GaussRat = b2.coeff_at(w, m);
                out.push(GoldenCheck {
                    term: format!("{}*{}", m, print_word(w)),
                    expected: c.to_string(),
                    actual: got.to_string(),
                    matches: &got == c,
                });
            }
        }
    }
    Ok(out)
}
