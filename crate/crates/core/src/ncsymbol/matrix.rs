//! Finite-dimensional matrix models of the symbol algebra.
//!
//! A [`MatrixAssignment`] gives every atom a complex matrix and every scalar
//! variable a number. In the free model the derivatives of `k` are unrelated
//! random matrices with the right adjointness. In the inner model
//! `δj = [Aj, ·]` for commuting Hermitian `Aj`, so Leibniz-type identities
//! hold at the matrix level.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{quad_form, Atom, NcError, SymbolExpr};
use crate::coeffring::{ScalarPoly, Var};

pub type CMat = DMatrix<Complex64>;

/// How `b0` is realised: from ξ and τ, or from the radial variable `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum B0Form {
    Xi,
    Radial,
}

#[derive(Clone, Debug)]
pub struct MatrixAssignment {
    pub dim: usize,
    pub k: CMat,
    k_inv: CMat,
    pub dk: BTreeMap<(u8, u8), CMat>,
    pub scalars: Vec<(Var, Complex64)>,
    pub form: B0Form,
    /// Generators of inner derivations, when the model has them.
    pub generators: Option<[CMat; 2]>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&g + g.adjoint()).scale(0.5)
}

/// Unitary from the QR factorisation of a random complex matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    g.qr().q()
}

/// Positive definite `k` with spectrum in `[lo, hi]`.
pub fn random_positive(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> CMat {
    let u = random_unitary(n, rng);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        c(rng.random_range(lo..hi))
    }));
    &u * d * u.adjoint()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Random real scalars: ξ in [-1.5, 1.5], τ1 in [-1, 1], τ2 in [0.5, 1.5], r in [0.2, 2].
pub fn random_scalars(rng: &mut impl Rng) -> Vec<(Var, Complex64)> {
    vec![
        (Var::X1, c(rng.random_range(-1.5..1.5))),
        (Var::X2, c(rng.random_range(-1.5..1.5))),
        (Var::Rv, c(rng.random_range(0.2..2.0))),
        (Var::T1, c(rng.random_range(-1.0..1.0))),
        (Var::T2, c(rng.random_range(0.5..1.5))),
    ]
}

impl MatrixAssignment {
    /// Free model: derivatives of odd order anti-Hermitian, even order Hermitian.
    pub fn random_free(dim: usize, max_order: u8, form: B0Form, rng: &mut impl Rng) -> Self {
        let k = random_positive(dim, 0.5, 2.0, rng);
        let mut dk = BTreeMap::new();
        for n in 1..=max_order {
            for a in 0..=n {
                let h = random_hermitian(dim, rng);
                let m = if n % 2 == 1 {
                    h.map(|z| z * Complex64::i())
                } else {
                    h
                };
                dk.insert((a, n - a), m);
            }
        }
        let scalars = random_scalars(rng);
        Self::assemble(k, dk, scalars, form, None)
    }

    /// Inner model: `δj = [Aj, ·]` with `A1`, `A2` real diagonal, so odd
    /// derivatives of `k` come out anti-Hermitian as in the free model.
    pub fn random_inner(dim: usize, max_order: u8, form: B0Form, rng: &mut impl Rng) -> Self {
        let k = random_positive(dim, 0.5, 2.0, rng);
        let mut gen = || {
            CMat::from_diagonal(&nalgebra::DVector::from_fn(dim, |_, _| {
                c(rng.random_range(-1.0..1.0))
            }))
        };
        let a1 = gen();
        let a2 = gen();
        let mut dk = BTreeMap::new();
        for n in 1..=max_order {
            for a in 0..=n {
                let mut m = k.clone();
                for _ in 0..(n - a) {
                    m = commutator(&a2, &m);
                }
                for _ in 0..a {
                    m = commutator(&a1, &m);
                }
                dk.insert((a, n - a), m);
            }
        }
        let scalars = random_scalars(rng);
        Self::assemble(k, dk, scalars, form, Some([a1, a2]))
    }

    fn assemble(
        k: CMat,
        dk: BTreeMap<(u8, u8), CMat>,
        scalars: Vec<(Var, Complex64)>,
        form: B0Form,
        generators: Option<[CMat; 2]>,
    ) -> Self {
        let k_inv = k.clone().try_inverse().expect("positive definite k");
        MatrixAssignment {
            dim: k.nrows(),
            k,
            k_inv,
            dk,
            scalars,
            form,
            generators,
        }
    }

    pub fn k_inv(&self) -> &CMat {
        &self.k_inv
    }

    pub fn scalar(&self, v: Var) -> Option<Complex64> {
        self.scalars.iter().find(|(w, _)| *w == v).map(|(_, z)| *z)
    }

    pub fn set_scalar(&mut self, v: Var, z: Complex64) {
        if let Some(e) = self.scalars.iter_mut().find(|(w, _)| *w == v) {
            e.1 = z;
        } else {
            self.scalars.push((v, z));
        }
    }

    /// Applies the inner derivation δj at the matrix level.
    pub fn apply_delta(&self, j: u8, m: &CMat) -> Option<CMat> {
        self.generators
            .as_ref()
            .map(|g| commutator(&g[(j - 1) as usize], m))
    }

    /// The scalar `q` with `A2 + 1 = q k² + 1`.
    pub fn q_value(&self) -> Result<Complex64, NcError> {
        match self.form {
            B0Form::Xi => quad_form()
                .eval_c64(&self.scalars)
                .map_err(|e| NcError::MissingAssignment(e.to_string())),
            B0Form::Radial => self
                .scalar(Var::Rv)
                .map(|r| r * r)
                .ok_or_else(|| NcError::MissingAssignment("r".into())),
        }
    }

    fn kpow(&self, n: i32) -> CMat {
        let base = if n > 0 { &self.k } else { &self.k_inv };
        let mut m = CMat::identity(self.dim, self.dim);
        for _ in 0..n.unsigned_abs() {
            m = &m * base;
        }
        m
    }

    fn b0(&self) -> Result<CMat, NcError> {
        let q = self.q_value()?;
        let a = (&self.k * &self.k).map(|z| z * q) + CMat::identity(self.dim, self.dim);
        invert(a)
    }

    fn atom_matrix(&self, a: &Atom, b0: &CMat) -> Result<CMat, NcError> {
        Ok(match *a {
            Atom::Kpow(n) => self.kpow(n),
            Atom::DK(x, y) => self
                .dk
                .get(&(x, y))
                .cloned()
                .ok_or_else(|| NcError::MissingAssignment(format!("d1^{}d2^{}(k)", x, y)))?,
            Atom::B0pow(j) => {
                let mut m = CMat::identity(self.dim, self.dim);
                for _ in 0..j {
                    m = &m * b0;
                }
                m
            }
        })
    }

    fn coeff(&self, p: &ScalarPoly) -> Result<Complex64, NcError> {
        p.eval_c64(&self.scalars)
            .map_err(|e| NcError::MissingAssignment(e.to_string()))
    }

    /// Derivative of the value of `x` with respect to ξi, computed by
    /// evaluating over dual numbers: each matrix becomes the upper
    /// triangular block `[[M, M'], [0, M]]` and `b0` is inverted as a block.
    pub fn eval_dxi(&self, x: &SymbolExpr, i: u8) -> Result<CMat, NcError> {
        if self.form != B0Form::Xi {
            return Err(NcError::MissingAssignment("xi variables".into()));
        }
        let v = if i == 1 { Var::X1 } else { Var::X2 };
        let n = self.dim;
        let q = self.q_value()?;
        let dq = self.coeff(&quad_form().diff(v))?;
        let k2 = &self.k * &self.k;
        let mut big = CMat::zeros(2 * n, 2 * n);
        let diag = k2.map(|z| z * q) + CMat::identity(n, n);
        big.view_mut((0, 0), (n, n)).copy_from(&diag);
        big.view_mut((n, n), (n, n)).copy_from(&diag);
        big.view_mut((0, n), (n, n)).copy_from(&k2.map(|z| z * dq));
        let b0_big = invert(big)?;
        let lift = |m: &CMat| {
            let mut b = CMat::zeros(2 * n, 2 * n);
            b.view_mut((0, 0), (n, n)).copy_from(m);
            b.view_mut((n, n), (n, n)).copy_from(m);
            b
        };
        let mut total = CMat::zeros(2 * n, 2 * n);
        for (w, p) in x.iter() {
            let c0 = self.coeff(p)?;
            let c1 = self.coeff(&p.diff(v))?;
            let mut m = CMat::identity(2 * n, 2 * n);
            for a in w.atoms() {
                let am = match a {
                    Atom::B0pow(j) => {
                        let mut t = CMat::identity(2 * n, 2 * n);
                        for _ in 0..*j {
                            t = &t * &b0_big;
                        }
                        t
                    }
                    _ => lift(&self.atom_matrix(a, &CMat::zeros(n, n))?),
                };
                m = &m * am;
            }
            let mut cb = CMat::zeros(2 * n, 2 * n);
            for d in 0..2 * n {
                cb[(d, d)] = c0;
            }
            for d in 0..n {
                cb[(d, n + d)] = c1;
            }
            total += cb * m;
        }
        Ok(total.view((0, n), (n, n)).into_owned())
    }
}

fn invert(a: CMat) -> Result<CMat, NcError> {
    let norm = a.norm();
    let inv = a.try_inverse().ok_or(NcError::SingularB0)?;
    if !inv.iter().all(|z| z.is_finite()) || inv.norm() * norm > 1e12 {
        return Err(NcError::SingularB0);
    }
    Ok(inv)
}

/// Evaluates `x` in the matrix model.
pub fn eval_matrix(x: &SymbolExpr, m: &MatrixAssignment) -> Result<CMat, NcError> {
    let b0 = if x.words().any(|w| w.has_b0()) {
        m.b0()?
    } else {
        CMat::zeros(m.dim, m.dim)
    };
    let mut total = CMat::zeros(m.dim, m.dim);
    for (w, p) in x.iter() {
        let cf = m.coeff(p)?;
        let mut acc = CMat::identity(m.dim, m.dim);
        for a in w.atoms() {
            acc = &acc * m.atom_matrix(a, &b0)?;
        }
        total += acc.map(|z| z * cf);
    }
    Ok(total)
}

/// Relative Frobenius distance `‖a − b‖ / max(‖a‖, ‖b‖)`; zero when `a = b`.
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    let d = (a - b).norm();
    if d == 0.0 {
        return 0.0;
    }
    d / a.norm().max(b.norm())
}
