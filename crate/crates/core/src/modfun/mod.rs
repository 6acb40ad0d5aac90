//! Modified logarithms, the two-variable functions built from them, and the
//! curvature functions of the logarithmic view.
//!
//! Every function is stored exactly as an element of
//! `ℚ(u^{1/4}, v^{1/4})[log u, log v]`; the exponential view `u = e^s`,
//! `v = e^t` is the same ring with `s = log u`.

mod eval;
pub mod expr;
pub mod lpoly;
pub mod ratfun;
pub mod registry;

use std::sync::{Arc, Mutex};

use thiserror::Error;

pub use eval::EvalConfig;
pub use ratfun::RatFun;
pub use registry::{Entry, Registry};

use crate::quad;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModFunError {
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("not rational in (u^(1/4), v^(1/4), log u, log v): {0}")]
    NotRational(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Whether points are given as `(u, v)` or as `(s, t) = (log u, log v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum View {
    Rational,
    Exponential,
}

#[derive(Clone, Debug)]
pub struct ModFun {
    name: String,
    arity: u8,
    view: View,
    rat: Arc<RatFun>,
    zones: Arc<Mutex<eval::Zones>>,
}

impl ModFun {
    pub fn new(name: &str, arity: u8, view: View, rat: RatFun) -> Self {
        ModFun {
            name: name.to_string(),
            arity,
            view,
            rat: Arc::new(rat),
            zones: Default::default(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> u8 {
        self.arity
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn rat(&self) -> &RatFun {
        &self.rat
    }

    /// Same function, other variable convention.
    pub fn with_view(&self, view: View) -> ModFun {
        ModFun {
            view,
            ..self.clone()
        }
    }
}

/// Exact equality of normal forms.
pub fn normal_equal(a: &ModFun, b: &ModFun) -> bool {
    a.rat.equals(&b.rat)
}

/// `L_m(u) = ∫₀^∞ x^m (x+1)^{−m−1} (xu+1)^{−1} dx` or
/// `D_{m,m'}(u,v) = ∫₀^∞ (x/u+1)^{−m} x^{m+m'−1} (x+1)^{−m'} (xv+1)^{−1} dx`,
/// by adaptive quadrature. Names are `L<m>` and `D<m><m'>`.
pub fn quadrature_oracle(name: &str, u: f64, v: f64) -> Result<f64, ModFunError> {
    let unknown = || ModFunError::UnknownFunction(name.to_string());
    let digits: Vec<i32> = name
        .chars()
        .skip(1)
        .map(|c| c.to_digit(10).map(|d| d as i32))
        .collect::<Option<_>>()
        .ok_or_else(unknown)?;
    let tol = 1e-12;
    match (name.chars().next(), digits.as_slice()) {
        (Some('L'), [m]) => {
            let m = *m;
            Ok(quad::integrate_semi_infinite(
                |x| x.powi(m) / (x + 1.0).powi(m + 1) / (x * u + 1.0),
                tol,
            ))
        }
        (Some('D'), [m, mp]) if *m > 0 && *mp > 0 => {
            let (m, mp) = (*m, *mp);
            Ok(quad::integrate_semi_infinite(
                |x| {
                    (x / u + 1.0).powi(-m) * x.powi(m + mp - 1) / (x + 1.0).powi(mp) / (x * v + 1.0)
                },
                tol,
            ))
        }
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests;
