//! Numerical model of the noncommutative torus at rational `θ = g/G`.
//!
//! An element `Σ g_n(U) Vⁿ` keeps each `g_n` as `G` samples on the grid
//! `z_j = e^{2πij/G}`. Because `V f(U) = f(e^{2πiθ}U) V` and `θ = g/G`, the
//! twist in a product is an exact shift of the grid by `g·n` places.
//!
//! For a Weyl exponent `h(U)` the modular operator is exact on the grid:
//! `log Δ` multiplies the `n`-th component by `h(e^{2πiθn}U) − h(U)`.
//! For a general self-adjoint `h` the [`series`] module applies functions
//! of `log Δ = ad` through their Taylor series at the origin.

mod circle;
mod heat;
pub mod series;

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use num_rational::BigRational;
use thiserror::Error;

use crate::coeffring::Var;
use crate::logform::{closed_curvature, half_form, LogBasisExpr, LogFormError, LogTarget};
use crate::modfun::{ModFun, ModFunError, RatFun, Registry, View};
use crate::parametrix::Half;

pub use circle::{pairwise_sum, CircleFun};
pub use heat::{heat_oracle, HeatEstimate, HeatOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("elements belong to different models")]
    IncompatibleParams,
    #[error("function is not resolved by the grid (tail ratio {0:e})")]
    NotSmooth(f64),
    #[error("series guard: estimated norm of ad h is {0}, must be below 2")]
    SeriesGuard(f64),
    #[error("no Taylor expansion of {0} at the origin")]
    NoExpansion(String),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error(transparent)]
    Function(#[from] ModFunError),
    #[error(transparent)]
    LogForm(#[from] LogFormError),
}

/// `θ = g/G` on a grid of `G` points and the conformal parameter `τ`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct TorusParams {
    pub g: usize,
    pub grid: usize,
    pub tau: Complex64,
}

impl TorusParams {
    pub fn new(g: usize, grid: usize, tau: Complex64) -> Result<Self, TorusError> {
        if !grid.is_power_of_two() || grid < 8 {
            return Err(TorusError::InvalidParams(format!(
                "grid {} is not a power of two ≥ 8",
                grid
            )));
        }
        if g >= grid {
            return Err(TorusError::InvalidParams(format!(
                "g = {} must be below G = {}",
                g, grid
            )));
        }
        if tau.im <= 0.0 {
            return Err(TorusError::InvalidParams(format!(
                "Im τ = {} must be positive",
                tau.im
            )));
        }
        Ok(TorusParams { g, grid, tau })
    }

    pub fn theta(&self) -> f64 {
        self.g as f64 / self.grid as f64
    }

    /// Values of `t1`, `t2` for coefficient polynomials.
    pub fn scalars(&self) -> Vec<(Var, Complex64)> {
        vec![
            (Var::T1, Complex64::new(self.tau.re, 0.0)),
            (Var::T2, Complex64::new(self.tau.im, 0.0)),
        ]
    }
}

/// `Σ g_n(U) Vⁿ` with finitely many components.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusElem {
    g: usize,
    grid: usize,
    comps: BTreeMap<i64, CircleFun>,
}

impl TorusElem {
    pub fn zero(p: &TorusParams) -> Self {
        TorusElem {
            g: p.g,
            grid: p.grid,
            comps: BTreeMap::new(),
        }
    }

    pub fn scalar(p: &TorusParams, c: Complex64) -> Self {
        Self::circle(p, CircleFun::constant(p.grid, c))
    }

    pub fn one(p: &TorusParams) -> Self {
        Self::scalar(p, Complex64::new(1.0, 0.0))
    }

    /// `f(U)`.
    pub fn circle(p: &TorusParams, f: CircleFun) -> Self {
        assert_eq!(f.grid(), p.grid);
        let mut x = Self::zero(p);
        x.comps.insert(0, f);
        x
    }

    /// `f(U) Vⁿ`.
    pub fn with_component(p: &TorusParams, n: i64, f: CircleFun) -> Self {
        assert_eq!(f.grid(), p.grid);
        let mut x = Self::zero(p);
        x.comps.insert(n, f);
        x
    }

    /// `U^m Vⁿ`.
    pub fn monomial(p: &TorusParams, m: i64, n: i64) -> Self {
        let f = CircleFun::from_fourier(p.grid, &[(m, Complex64::new(1.0, 0.0))]);
        Self::with_component(p, n, f)
    }

    pub fn u(p: &TorusParams) -> Self {
        Self::monomial(p, 1, 0)
    }

    pub fn v(p: &TorusParams) -> Self {
        Self::monomial(p, 0, 1)
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn component(&self, n: i64) -> Option<&CircleFun> {
        self.comps.get(&n)
    }

    pub fn components(&self) -> impl Iterator<Item = (i64, &CircleFun)> {
        self.comps.iter().map(|(n, f)| (*n, f))
    }

    pub fn support(&self) -> Vec<i64> {
        self.comps.keys().copied().collect()
    }

    fn check(&self, o: &TorusElem) -> Result<(), TorusError> {
        if self.g != o.g || self.grid != o.grid {
            return Err(TorusError::IncompatibleParams);
        }
        Ok(())
    }

    fn add_component(&mut self, n: i64, f: CircleFun) {
        match self.comps.get_mut(&n) {
            Some(e) => *e = e.add(&f),
            None => {
                self.comps.insert(n, f);
            }
        }
    }

    pub fn add(&self, o: &TorusElem) -> Result<TorusElem, TorusError> {
        self.check(o)?;
        let mut r = self.clone();
        for (n, f) in &o.comps {
            r.add_component(*n, f.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &TorusElem) -> Result<TorusElem, TorusError> {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> TorusElem {
        TorusElem {
            comps: self.comps.iter().map(|(n, f)| (*n, f.scale(c))).collect(),
            ..*self
        }
    }

    /// Twisted product: `g(U)Vⁿ · f(U)Vᵐ = g(U) f(e^{2πiθn}U) V^{n+m}`.
    pub fn mul(&self, o: &TorusElem) -> Result<TorusElem, TorusError> {
        self.check(o)?;
        let mut r = TorusElem {
            comps: BTreeMap::new(),
            ..*self
        };
        for (n, a) in &self.comps {
            let shift = self.shift_of(*n);
            for (m, b) in &o.comps {
                r.add_component(n + m, a.mul(&b.shift(shift)));
            }
        }
        Ok(r)
    }

    fn shift_of(&self, n: i64) -> i64 {
        self.g as i64 * n
    }

    /// `δ1` multiplies the `m`-th Fourier mode by `m`, `δ2` multiplies the
    /// `n`-th component by `n`.
    pub fn delta(&self, j: u8) -> TorusElem {
        let comps = self
            .comps
            .iter()
            .filter_map(|(n, f)| match j {
                1 => Some((*n, f.derivative())),
                _ if *n == 0 => None,
                _ => Some((*n, f.scale(Complex64::new(*n as f64, 0.0)))),
            })
            .collect();
        TorusElem { comps, ..*self }
    }

    /// The trace: the mean of the `V⁰` component.
    pub fn trace(&self) -> Complex64 {
        self.comps.get(&0).map(|f| f.mean()).unwrap_or_default()
    }

    /// `(g(U)Vⁿ)* = ḡ(e^{−2πiθn}U) V⁻ⁿ`.
    pub fn adjoint(&self) -> TorusElem {
        let comps = self
            .comps
            .iter()
            .map(|(n, f)| (-n, f.conj().shift(-self.shift_of(*n))))
            .collect();
        TorusElem { comps, ..*self }
    }

    /// Largest sample modulus over all components.
    pub fn sup_norm(&self) -> f64 {
        self.comps.values().map(|f| f.max_abs()).fold(0.0, f64::max)
    }

    /// `Σₙ maxⱼ |g_n(z_j)|`, an upper bound for the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.comps.values().map(|f| f.max_abs()).sum()
    }

    /// Drops components whose samples are all below `tol`.
    pub fn pruned(&self, tol: f64) -> TorusElem {
        let comps = self
            .comps
            .iter()
            .filter(|(_, f)| f.max_abs() > tol)
            .map(|(n, f)| (*n, f.clone()))
            .collect();
        TorusElem { comps, ..*self }
    }

    /// Pointwise map of every sample, component by component.
    fn map_components(&self, mut f: impl FnMut(i64, &CircleFun) -> CircleFun) -> TorusElem {
        let comps = self.comps.iter().map(|(n, c)| (*n, f(*n, c))).collect();
        TorusElem { comps, ..*self }
    }
}

pub fn te_mul(a: &TorusElem, b: &TorusElem) -> Result<TorusElem, TorusError> {
    a.mul(b)
}

pub fn te_delta(j: u8, a: &TorusElem) -> TorusElem {
    a.delta(j)
}

/// `sup|a − b| / max(sup|a|, sup|b|)`, zero when `a = b`.
pub fn rel_diff(a: &TorusElem, b: &TorusElem) -> Result<f64, TorusError> {
    let d = a.sub(b)?.sup_norm();
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(d / a.sup_norm().max(b.sup_norm()))
}

/// `sup|x − x*| / sup|x|`.
pub fn hermiticity_defect(x: &TorusElem) -> Result<f64, TorusError> {
    let n = x.sup_norm();
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(x.sub(&x.adjoint())?.sup_norm() / n)
}

/// Function values keyed by argument bits; `value_st` is the expensive part
/// of every modular application.
#[derive(Default)]
struct ValueCache {
    map: HashMap<(String, u64, u64), f64>,
}

impl ValueCache {
    fn get(&mut self, f: &ModFun, s: f64, t: f64) -> f64 {
        // fold −0.0 into 0.0
        let key = (
            f.name().to_string(),
            (s + 0.0).to_bits(),
            (t + 0.0).to_bits(),
        );
        *self.map.entry(key).or_insert_with(|| f.value_st(s, t))
    }
}

/// Functions of the modular operator, with `log k` available as an element.
pub trait ModularCalculus {
    fn params(&self) -> &TorusParams;
    /// `log k = h/2`.
    fn log_k(&self) -> TorusElem;
    /// `k^e = e^{e·h/2}`.
    fn k_pow(&self, e: f64) -> Result<TorusElem, TorusError>;
    /// `f(log Δ)(x)`.
    fn apply1(&self, f: &ModFun, x: &TorusElem) -> Result<TorusElem, TorusError>;
    /// `f(log Δ(1), log Δ(2))(x·y)`.
    fn apply2(&self, f: &ModFun, x: &TorusElem, y: &TorusElem) -> Result<TorusElem, TorusError>;
}

/// Exact functional calculus for a Weyl exponent `h(U)`.
pub struct CircleWeyl {
    pub params: TorusParams,
    pub h: CircleFun,
    cache: std::sync::Mutex<ValueCache>,
}

impl CircleWeyl {
    pub fn new(h: CircleFun, params: &TorusParams) -> Result<Self, TorusError> {
        if h.grid() != params.grid {
            return Err(TorusError::IncompatibleParams);
        }
        if !h.is_real(1e-12) {
            return Err(TorusError::InvalidParams("h must be real-valued".into()));
        }
        let tail = h.tail_ratio();
        if tail > 1e-12 {
            return Err(TorusError::NotSmooth(tail));
        }
        Ok(CircleWeyl {
            params: params.clone(),
            h,
            cache: Default::default(),
        })
    }

    /// `m_n(U) = h(e^{2πiθn}U) − h(U)`, the action of `log Δ` on `Vⁿ`
    /// components.
    pub fn multiplier(&self, n: i64) -> Vec<f64> {
        let shifted = self.h.shift(self.params.g as i64 * n);
        shifted
            .samples()
            .iter()
            .zip(self.h.samples())
            .map(|(a, b)| a.re - b.re)
            .collect()
    }
}

impl ModularCalculus for CircleWeyl {
    fn params(&self) -> &TorusParams {
        &self.params
    }

    fn log_k(&self) -> TorusElem {
        TorusElem::circle(&self.params, self.h.scale(Complex64::new(0.5, 0.0)))
    }

    fn k_pow(&self, e: f64) -> Result<TorusElem, TorusError> {
        let f = self.h.map(|z| Complex64::new((0.5 * e * z.re).exp(), 0.0));
        Ok(TorusElem::circle(&self.params, f))
    }

    fn apply1(&self, f: &ModFun, x: &TorusElem) -> Result<TorusElem, TorusError> {
        let mut cache = self.cache.lock().unwrap();
        Ok(x.map_components(|n, c| {
            let m = self.multiplier(n);
            let vals: Vec<Complex64> = c
                .samples()
                .iter()
                .zip(&m)
                .map(|(z, s)| z * cache.get(f, *s, 0.0))
                .collect();
            CircleFun::from_samples(vals)
        }))
    }

    fn apply2(&self, f: &ModFun, x: &TorusElem, y: &TorusElem) -> Result<TorusElem, TorusError> {
        x.check(y)?;
        let p = &self.params;
        let mut cache = self.cache.lock().unwrap();
        let mut out = TorusElem::zero(p);
        for (n1, a) in x.components() {
            let shift = p.g as i64 * n1;
            let m1 = self.multiplier(n1);
            for (n2, b) in y.components() {
                let b = b.shift(shift);
                let m2 = CircleFun::from_real(&self.multiplier(n2)).shift(shift);
                let vals: Vec<Complex64> = (0..p.grid)
                    .map(|j| {
                        let fv = cache.get(f, m1[j], m2.samples()[j].re);
                        a.samples()[j] * b.samples()[j] * fv
                    })
                    .collect();
                out.add_component(n1 + n2, CircleFun::from_samples(vals));
            }
        }
        Ok(out)
    }
}

/// `Σ c · f(log Δ)(target)` with `δ(log k)` from the model.
pub fn eval_log_expr(
    expr: &LogBasisExpr,
    m: &dyn ModularCalculus,
) -> Result<TorusElem, TorusError> {
    let p = m.params().clone();
    let lk = m.log_k();
    let d = [lk.delta(1), lk.delta(2)];
    let scal = p.scalars();
    let mut out = TorusElem::zero(&p);
    for (c, f, target) in expr.iter() {
        let cv = c
            .eval_c64(&scal)
            .map_err(|e| TorusError::InvalidParams(e.to_string()))?;
        let term = match target {
            LogTarget::Linear(a, b) => {
                let mut x = lk.clone();
                for _ in 0..a {
                    x = x.delta(1);
                }
                for _ in 0..b {
                    x = x.delta(2);
                }
                m.apply1(f, &x)?
            }
            LogTarget::Pair(i, j) => m.apply2(f, &d[i as usize - 1], &d[j as usize - 1])?,
        };
        out = out.add(&term.scale(cv))?;
    }
    Ok(out)
}

/// The bracketed curvature expression (without the `−π/τ2` prefactor).
pub fn curvature_numeric(m: &dyn ModularCalculus, graded: bool) -> Result<TorusElem, TorusError> {
    eval_log_expr(&closed_curvature(graded)?, m)
}

/// `t(a·R)` with `R` the bracketed functions-half expression (`K`, `H`).
pub fn functions_pairing(m: &dyn ModularCalculus, a: &CircleFun) -> Result<Complex64, TorusError> {
    let r = eval_log_expr(&half_form(Half::Functions)?, m)?;
    Ok(TorusElem::circle(m.params(), a.clone()).mul(&r)?.trace())
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct GaussBonnet {
    /// `|t(R)| / max(1e−30, sup|R|)`.
    pub residual: f64,
    pub trace: Complex64,
    pub sup_norm: f64,
    pub hermiticity_defect: f64,
}

pub fn gauss_bonnet_check(
    m: &dyn ModularCalculus,
    graded: bool,
) -> Result<GaussBonnet, TorusError> {
    let r = curvature_numeric(m, graded)?;
    let tr = r.trace();
    let sup = r.sup_norm();
    Ok(GaussBonnet {
        residual: tr.norm() / sup.max(1e-30),
        trace: tr,
        sup_norm: sup,
        hermiticity_defect: hermiticity_defect(&r)?,
    })
}

/// The commutative value `R1(0)(δ1² + |τ|²δ2² + 2τ1δ1δ2)(log k)`.
pub fn commutative_curvature(m: &dyn ModularCalculus) -> Result<TorusElem, TorusError> {
    let p = m.params();
    let lk = m.log_k();
    let t = p.tau;
    let x = lk
        .delta(1)
        .delta(1)
        .add(
            &lk.delta(2)
                .delta(2)
                .scale(Complex64::new(t.norm_sqr(), 0.0)),
        )?
        .add(&lk.delta(1).delta(2).scale(Complex64::new(2.0 * t.re, 0.0)))?;
    Ok(x.scale(Complex64::new(-1.0 / 3.0, 0.0)))
}

fn exp_fun(name: &str, text: &str) -> Result<ModFun, TorusError> {
    let r: RatFun = crate::modfun::expr::parse_plain(text)?;
    Ok(ModFun::new(name, 1, View::Exponential, r))
}

/// Relative defects of the two identities expressing `k`-derivatives
/// through derivatives of `log k`, over all `i, j ∈ {1, 2}`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LogDerivativeReport {
    /// `k⁻²δi(k)δj(k) = 4 (Δ − Δ^{1/2})/log Δ (δi(log k)) · (Δ^{1/2} − 1)/log Δ (δj(log k))`
    pub product: f64,
    /// `k⁻¹δiδj(k) = 2(Δ^{1/2} − 1)/log Δ (δiδj(log k)) + g(δj(log k)δi(log k)) + g(δi(log k)δj(log k))`
    pub second: f64,
}

pub fn log_derivative_identities(
    m: &dyn ModularCalculus,
) -> Result<LogDerivativeReport, TorusError> {
    let k = m.k_pow(1.0)?;
    let kinv = m.k_pow(-1.0)?;
    let kinv2 = m.k_pow(-2.0)?;
    let lk = m.log_k();
    let dk = [k.delta(1), k.delta(2)];
    let dl = [lk.delta(1), lk.delta(2)];
    let a = exp_fun("a", "(exp(x) - exp(x/2))/x")?;
    let b = exp_fun("b", "(exp(x/2) - 1)/x")?;
    let two_b = exp_fun("2b", "2 (exp(x/2) - 1)/x")?;
    let g = Registry::standard().closed_form("g")?;
    let four = Complex64::new(4.0, 0.0);
    let mut product: f64 = 0.0;
    let mut second: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let lhs = kinv2.mul(&dk[i])?.mul(&dk[j])?;
            let rhs = m
                .apply1(&a, &dl[i])?
                .mul(&m.apply1(&b, &dl[j])?)?
                .scale(four);
            product = product.max(rel_diff(&lhs, &rhs)?);

            let lhs = kinv.mul(&dk[i].delta(j as u8 + 1))?;
            let rhs = m
                .apply1(&two_b, &dl[i].delta(j as u8 + 1))?
                .add(&m.apply2(&g, &dl[j], &dl[i])?)?
                .add(&m.apply2(&g, &dl[i], &dl[j])?)?;
            second = second.max(rel_diff(&lhs, &rhs)?);
        }
    }
    Ok(LogDerivativeReport { product, second })
}

/// Real trigonometric polynomial `a0 + Σ aₘcos(mφ) + bₘsin(mφ)`, rescaled
/// so that its sup norm is `amp`.
pub fn random_weyl(grid: usize, modes: usize, amp: f64, rng: &mut impl rand::Rng) -> CircleFun {
    let mut coeffs = Vec::new();
    coeffs.push((0, Complex64::new(rng.random_range(-1.0..1.0), 0.0)));
    for m in 1..=modes as i64 {
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        coeffs.push((m, c * 0.5));
        coeffs.push((-m, c.conj() * 0.5));
    }
    let f = CircleFun::from_fourier(grid, &coeffs);
    f.scale(Complex64::new(amp / f.max_abs(), 0.0))
}

fn to_f64(q: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}
