//! Heat-trace oracle for `P = k ∂*∂ k` with `k = e^{h(U)/2}` acting by left
//! multiplication on `L²(A_θ)`. In the basis `U^m Vⁿ` the operator is block
//! diagonal in `n`: each block is `K Dₙ K` with `K` the Toeplitz matrix of
//! `k` and `Dₙ = diag|m + τ̄n|²`, `|m| ≤ M`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;

use super::{CircleFun, TorusError, TorusParams};

#[derive(Clone, Debug, serde::Serialize)]
pub struct HeatOptions {
    /// Modes `|m|, |n| ≤ M`.
    pub truncation: usize,
    pub t_grid: Vec<f64>,
}

impl Default for HeatOptions {
    fn default() -> Self {
        HeatOptions {
            truncation: 48,
            t_grid: vec![0.02, 0.025, 0.03, 0.04, 0.05, 0.06],
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct HeatEstimate {
    /// Fit `c₋₁/t + c₀ + c₁t`.
    pub c_minus1: f64,
    pub c0: f64,
    pub c1: f64,
    /// `c₋₁` of the flat operator relative to `π/τ2`, minus one.
    pub calibration_error: f64,
    pub traces: Vec<(f64, f64)>,
}

fn toeplitz(coeffs: &[Complex64], m: usize) -> DMatrix<Complex64> {
    let g = coeffs.len() as i64;
    let n = 2 * m + 1;
    DMatrix::from_fn(n, n, |i, j| {
        let p = i as i64 - j as i64;
        coeffs[p.rem_euclid(g) as usize]
    })
}

/// `Trace(a e^{−tP})` on each `t` of the grid.
fn traces(k: &CircleFun, a: &CircleFun, tau: Complex64, opts: &HeatOptions) -> Vec<f64> {
    let m = opts.truncation;
    let kk = toeplitz(&k.fourier(), m);
    let aa = toeplitz(&a.fourier(), m);
    let tau_bar = tau.conj();
    let mut out = vec![0.0; opts.t_grid.len()];
    for n in -(m as i64)..=(m as i64) {
        let d = DMatrix::from_fn(2 * m + 1, 2 * m + 1, |i, j| {
            if i == j {
                let mm = i as f64 - m as f64;
                Complex64::new((tau_bar * n as f64 + mm).norm_sqr(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let p = &kk * d * &kk;
        let eig = p.symmetric_eigen();
        let q = &eig.eigenvectors;
        let w = q.adjoint() * &aa * q;
        for (slot, t) in out.iter_mut().zip(&opts.t_grid) {
            let mut s = 0.0;
            for (i, lam) in eig.eigenvalues.iter().enumerate() {
                s += (w[(i, i)].re) * (-t * lam).exp();
            }
            *slot += s;
        }
    }
    out
}

/// Least squares fit of `c₋₁/t + c₀ + c₁t`.
fn fit(ts: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (t, y) in ts.iter().zip(ys) {
        let row = Vector3::new(1.0 / t, 1.0, *t);
        ata += row * row.transpose();
        aty += row * *y;
    }
    let c = ata.lu().solve(&aty).unwrap_or_else(Vector3::zeros);
    (c[0], c[1], c[2])
}

/// The constant term of `Trace(a e^{−tP})` at small `t`, after checking on
/// the flat operator that `c₋₁ = π/τ2` within 1%.
pub fn heat_oracle(
    h: &CircleFun,
    a: &CircleFun,
    params: &TorusParams,
    opts: &HeatOptions,
) -> Result<HeatEstimate, TorusError> {
    let g = params.grid;
    if h.grid() != g || a.grid() != g {
        return Err(TorusError::IncompatibleParams);
    }
    if 4 * opts.truncation + 1 > g {
        return Err(TorusError::TruncationTooSmall(format!(
            "grid {} cannot carry Toeplitz blocks of size {}",
            g,
            2 * opts.truncation + 1
        )));
    }
    if opts.t_grid.len() < 3 {
        return Err(TorusError::InvalidParams(
            "need at least three t values".into(),
        ));
    }
    let one = CircleFun::constant(g, Complex64::new(1.0, 0.0));
    let flat = traces(&one, &one, params.tau, opts);
    let (cm1_flat, _, _) = fit(&opts.t_grid, &flat);
    let expect = PI / params.tau.im;
    let calibration_error = cm1_flat / expect - 1.0;
    if calibration_error.abs() > 0.01 {
        return Err(TorusError::TruncationTooSmall(format!(
            "flat c₋₁ = {} against π/τ2 = {}",
            cm1_flat, expect
        )));
    }
    let k = h.map(|z| Complex64::new((0.5 * z.re).exp(), 0.0));
    let ys = traces(&k, a, params.tau, opts);
    let (c_minus1, c0, c1) = fit(&opts.t_grid, &ys);
    Ok(HeatEstimate {
        c_minus1,
        c0,
        c1,
        calibration_error,
        traces: opts.t_grid.iter().copied().zip(ys).collect(),
    })
}
