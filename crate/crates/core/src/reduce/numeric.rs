//! Matrix-level checks of the angular and radial integration.
//!
//! Modular functions are applied in an eigenbasis of `k`: with
//! `k = Σ λᵢ Pᵢ`, `f(Δ)(x)` has entries `f(λⱼ²/λᵢ²) xᵢⱼ` and
//! `F(Δ(1), Δ(2))(x·y)` has entries `Σⱼ F(λⱼ²/λᵢ², λₗ²/λⱼ²) xᵢⱼ yⱼₗ`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    angular_integrate, polar_substitute, radial_integrate, Application, ModularExpr, ReduceError,
};
use crate::coeffring::{ScalarPoly, Var};
use crate::ncsymbol::{eval_matrix, rel_diff, B0Form, CMat, MatrixAssignment, NcError, SymbolExpr};
use crate::quad;

fn coeff_value(c: &ScalarPoly, m: &MatrixAssignment) -> Result<Complex64, NcError> {
    c.eval_c64(&m.scalars)
        .map_err(|e| NcError::MissingAssignment(e.to_string()))
}

/// Value of a [`ModularExpr`] in a matrix model, the factor `π` included
/// when the expression carries it.
pub fn eval_modular(x: &ModularExpr, m: &MatrixAssignment) -> Result<CMat, ReduceError> {
    let n = m.dim;
    let eig = m.k.clone().symmetric_eigen();
    let p = eig.eigenvectors.clone();
    let pa = p.adjoint();
    let logs: Vec<f64> = eig.eigenvalues.iter().map(|l| l.ln()).collect();
    let to_eigen = |w: &crate::ncsymbol::Word| -> Result<CMat, ReduceError> {
        let v = eval_matrix(&SymbolExpr::word(w.clone()), m)?;
        Ok(&pa * v * &p)
    };
    let mut cache: HashMap<(String, usize, usize, usize), f64> = HashMap::new();
    let mut total = CMat::zeros(n, n);
    for (c, app) in x.iter() {
        let cv = coeff_value(c, m)?;
        let name = app.fun().name().to_string();
        let mut y = CMat::zeros(n, n);
        match app {
            Application::One { fun, arg } => {
                let rho = to_eigen(&arg.base)?;
                for i in 0..n {
                    for j in 0..n {
                        let s = 2.0 * (logs[j] - logs[i]);
                        let f = *cache
                            .entry((name.clone(), i, j, usize::MAX))
                            .or_insert_with(|| fun.value_st(s, 0.0));
                        y[(i, j)] = rho[(i, j)] * f * (arg.q() * s).exp();
                    }
                }
            }
            Application::Two { fun, left, right } => {
                let a = to_eigen(&left.base)?;
                let b = to_eigen(&right.base)?;
                for i in 0..n {
                    for l in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for j in 0..n {
                            let s = 2.0 * (logs[j] - logs[i]);
                            let t = 2.0 * (logs[l] - logs[j]);
                            let f = *cache
                                .entry((name.clone(), i, j, l))
                                .or_insert_with(|| fun.value_st(s, t));
                            acc += a[(i, j)] * b[(j, l)] * f * (left.q() * s + right.q() * t).exp();
                        }
                        y[(i, l)] = acc;
                    }
                }
            }
        }
        total += (&p * y * &pa).map(|z| z * cv);
    }
    if x.pi {
        total = total.map(|z| z * PI);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug)]
pub struct OracleReport {
    pub rel_diff: f64,
    pub quadrature_error: f64,
}

/// Trapezoid rule in φ over `n_phi` points (exact for the trigonometric
/// polynomials involved) against `π ×` the angular output, at the `r` and
/// τ of `m`.
pub fn angular_oracle(
    pre: &SymbolExpr,
    m: &MatrixAssignment,
    n_phi: usize,
) -> Result<OracleReport, ReduceError> {
    let ang = angular_integrate(&polar_substitute(pre))?;
    let get = |v: Var| {
        m.scalar(v)
            .map(|z| z.re)
            .ok_or_else(|| NcError::MissingAssignment(v.name().into()))
    };
    let (r, t1, t2) = (get(Var::Rv)?, get(Var::T1)?, get(Var::T2)?);
    let mut mx = m.clone();
    mx.form = B0Form::Xi;
    let mut sum = CMat::zeros(m.dim, m.dim);
    for k in 0..n_phi {
        let phi = 2.0 * PI * k as f64 / n_phi as f64;
        let (s, c) = phi.sin_cos();
        mx.set_scalar(Var::X1, Complex64::new(r * (c - t1 / t2 * s), 0.0));
        mx.set_scalar(Var::X2, Complex64::new(r / t2 * s, 0.0));
        sum += eval_matrix(pre, &mx)?;
    }
    let numeric = sum.map(|z| z * (2.0 * PI / n_phi as f64));
    let mut mr = m.clone();
    mr.form = B0Form::Radial;
    let exact = eval_matrix(&ang, &mr)?.map(|z| z * PI);
    Ok(OracleReport {
        rel_diff: rel_diff(&numeric, &exact),
        quadrature_error: 0.0,
    })
}

/// Adaptive quadrature of `½ ∫₀^∞ π·x(r = √u) du` against the modular
/// evaluation of [`radial_integrate`]`(x)`.
pub fn radial_oracle(
    x: &SymbolExpr,
    m: &MatrixAssignment,
    tol: f64,
) -> Result<OracleReport, ReduceError> {
    let modular = radial_integrate(x)?;
    let exact = eval_modular(&modular, m)?;
    let n = m.dim;
    let mut mr = m.clone();
    mr.form = B0Form::Radial;
    let failure = std::cell::RefCell::new(None);
    let res = quad::integrate_semi_infinite_vec(
        |u| {
            let mut mu = mr.clone();
            mu.set_scalar(Var::Rv, Complex64::new(u.sqrt(), 0.0));
            match eval_matrix(x, &mu) {
                Ok(v) => v.iter().flat_map(|z| [z.re, z.im]).collect(),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    vec![0.0; 2 * n * n]
                }
            }
        },
        tol,
        4000,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    let numeric = CMat::from_fn(n, n, |i, j| {
        let k = 2 * (j * n + i);
        Complex64::new(res.value[k], res.value[k + 1]) * (0.5 * PI)
    });
    Ok(OracleReport {
        rel_diff: rel_diff(&numeric, &exact),
        quadrature_error: res.error * 0.5 * PI,
    })
}
