//! Functional calculus of `log Δ = ad` for a general self-adjoint Weyl
//! exponent `h = Σ h_n(U)Vⁿ`, through Taylor series at the origin:
//! `f(log Δ)(x) = Σ cₙ adⁿ(x)` and
//! `f(log Δ(1), log Δ(2))(x·y) = Σ c_{ab} adᵃ(x) adᵇ(y)`, where
//! `ad(x) = x h − h x`.
//!
//! The series is trusted only while `2 Σₙ sup|h_n| < 2`; within that bound
//! and at order 24 the truncation error stays far below the checks when
//! `sup|h| ≲ 0.3`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use super::{to_f64, ModularCalculus, TorusElem, TorusError, TorusParams};
use crate::modfun::ModFun;

pub const DEFAULT_ORDER: usize = 24;

type Coeffs = Arc<Vec<Vec<f64>>>;

pub struct SeriesWeyl {
    pub params: TorusParams,
    pub h: TorusElem,
    pub order: usize,
    coeffs: Mutex<HashMap<String, Coeffs>>,
}

impl SeriesWeyl {
    pub fn new(h: TorusElem, params: &TorusParams, order: usize) -> Result<Self, TorusError> {
        if h.g != params.g || h.grid != params.grid {
            return Err(TorusError::IncompatibleParams);
        }
        let est = 2.0 * h.norm_bound();
        if est >= 2.0 {
            return Err(TorusError::SeriesGuard(est));
        }
        let defect = super::hermiticity_defect(&h)?;
        if defect > 1e-12 {
            return Err(TorusError::InvalidParams(format!(
                "h is not self-adjoint (defect {:e})",
                defect
            )));
        }
        Ok(SeriesWeyl {
            params: params.clone(),
            h,
            order,
            coeffs: Default::default(),
        })
    }

    fn ad(&self, x: &TorusElem) -> Result<TorusElem, TorusError> {
        x.mul(&self.h)?.sub(&self.h.mul(x)?)
    }

    /// `x, ad(x), …, ad^order(x)`.
    fn ad_powers(&self, x: &TorusElem) -> Result<Vec<TorusElem>, TorusError> {
        let mut v = vec![x.clone()];
        for _ in 0..self.order {
            let next = self.ad(v.last().unwrap())?.pruned(1e-300);
            v.push(next);
        }
        Ok(v)
    }

    fn taylor(&self, f: &ModFun) -> Result<Coeffs, TorusError> {
        let key = format!("{}|{}", f.name(), f.rat());
        if let Some(c) = self.coeffs.lock().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let exact = f
            .taylor_at_origin(self.order)
            .ok_or_else(|| TorusError::NoExpansion(f.name().to_string()))?;
        let c: Coeffs = Arc::new(
            exact
                .iter()
                .map(|row| row.iter().map(to_f64).collect())
                .collect(),
        );
        self.coeffs.lock().unwrap().insert(key, c.clone());
        Ok(c)
    }
}

/// `e^x` by scaling and squaring.
pub fn te_exp(x: &TorusElem) -> Result<TorusElem, TorusError> {
    let p = TorusParams {
        g: x.g,
        grid: x.grid,
        tau: Complex64::new(0.0, 1.0),
    };
    let norm = x.norm_bound();
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.25 {
        s += 1;
    }
    let y = x.scale(Complex64::new(f64::powi(2.0, -s), 0.0));
    let mut term = TorusElem::one(&p);
    let mut sum = term.clone();
    for j in 1..=30 {
        term = term.mul(&y)?.scale(Complex64::new(1.0 / j as f64, 0.0));
        sum = sum.add(&term)?;
    }
    for _ in 0..s {
        sum = sum.mul(&sum)?;
    }
    Ok(sum.pruned(1e-300))
}

impl ModularCalculus for SeriesWeyl {
    fn params(&self) -> &TorusParams {
        &self.params
    }

    fn log_k(&self) -> TorusElem {
        self.h.scale(Complex64::new(0.5, 0.0))
    }

    fn k_pow(&self, e: f64) -> Result<TorusElem, TorusError> {
        te_exp(&self.h.scale(Complex64::new(0.5 * e, 0.0)))
    }

    fn apply1(&self, f: &ModFun, x: &TorusElem) -> Result<TorusElem, TorusError> {
        let c = self.taylor(f)?;
        let pw = self.ad_powers(x)?;
        let mut out = TorusElem::zero(&self.params);
        for (n, y) in pw.iter().enumerate() {
            out = out.add(&y.scale(Complex64::new(c[n][0], 0.0)))?;
        }
        Ok(out)
    }

    fn apply2(&self, f: &ModFun, x: &TorusElem, y: &TorusElem) -> Result<TorusElem, TorusError> {
        let c = self.taylor(f)?;
        let xs = self.ad_powers(x)?;
        let ys = self.ad_powers(y)?;
        let mut out = TorusElem::zero(&self.params);
        for (a, xa) in xs.iter().enumerate() {
            let mut z = TorusElem::zero(&self.params);
            for (b, yb) in ys.iter().enumerate().take(self.order + 1 - a) {
                let cab = c[a + b][b];
                if cab != 0.0 {
                    z = z.add(&yb.scale(Complex64::new(cab, 0.0)))?;
                }
            }
            out = out.add(&xa.mul(&z)?)?;
        }
        Ok(out)
    }
}

/// A random self-adjoint `h = h0(U) + c(U)V + (c(U)V)*` with trigonometric
/// coefficients of degree `modes`, scaled to `Σₙ sup|h_n| = amp`.
pub fn random_weyl2(
    params: &TorusParams,
    modes: usize,
    amp: f64,
    rng: &mut impl rand::Rng,
) -> Result<TorusElem, TorusError> {
    let g = params.grid;
    let h0 = super::random_weyl(g, modes, 1.0, rng);
    let mut cm = Vec::new();
    for m in -(modes as i64)..=(modes as i64) {
        cm.push((
            m,
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ));
    }
    let c = super::CircleFun::from_fourier(g, &cm);
    let cv = TorusElem::with_component(params, 1, c);
    let h = TorusElem::circle(params, h0).add(&cv)?.add(&cv.adjoint())?;
    Ok(h.scale(Complex64::new(amp / h.norm_bound(), 0.0)))
}
