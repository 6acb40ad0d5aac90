use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let mut c = CACHE.get_or_init(Default::default).lock().unwrap();
    c.entry(n)
        .or_insert_with(|| {
            let mut p = FftPlanner::new();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        })
        .clone()
}

/// Pairwise summation, so that sums do not depend on thread scheduling and
/// lose little to rounding.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// A function of `U`, sampled at `z_j = e^{2πij/G}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleFun {
    vals: Vec<Complex64>,
}

impl CircleFun {
    pub fn from_samples(vals: Vec<Complex64>) -> Self {
        CircleFun { vals }
    }

    pub fn from_real(vals: &[f64]) -> Self {
        CircleFun {
            vals: vals.iter().map(|x| Complex64::new(*x, 0.0)).collect(),
        }
    }

    pub fn constant(grid: usize, c: Complex64) -> Self {
        CircleFun {
            vals: vec![c; grid],
        }
    }

    /// Samples of `f(φ)` at `φ_j = 2πj/G`.
    pub fn from_fn(grid: usize, f: impl Fn(f64) -> Complex64) -> Self {
        CircleFun {
            vals: (0..grid)
                .map(|j| f(2.0 * PI * j as f64 / grid as f64))
                .collect(),
        }
    }

    /// `Σ c_m z^m`.
    pub fn from_fourier(grid: usize, modes: &[(i64, Complex64)]) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid];
        for (m, c) in modes {
            coeffs[m.rem_euclid(grid as i64) as usize] += c;
        }
        Self::from_coefficients(coeffs)
    }

    /// Inverse of [`CircleFun::fourier`].
    pub fn from_coefficients(mut coeffs: Vec<Complex64>) -> Self {
        let (_, inv) = plans(coeffs.len());
        inv.process(&mut coeffs);
        CircleFun { vals: coeffs }
    }

    pub fn grid(&self) -> usize {
        self.vals.len()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.vals
    }

    /// Fourier coefficients; entry `k` belongs to the mode `k` or `k − G`.
    pub fn fourier(&self) -> Vec<Complex64> {
        let (fwd, _) = plans(self.grid());
        let mut buf = self.vals.clone();
        fwd.process(&mut buf);
        let n = self.grid() as f64;
        buf.iter_mut().for_each(|c| *c /= n);
        buf
    }

    /// The mode number carried by entry `k` of [`CircleFun::fourier`]; the
    /// Nyquist entry counts as mode 0.
    pub fn mode(grid: usize, k: usize) -> i64 {
        let half = grid / 2;
        match k.cmp(&half) {
            std::cmp::Ordering::Less => k as i64,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => k as i64 - grid as i64,
        }
    }

    /// `f(e^{2πik/G} z)`.
    pub fn shift(&self, k: i64) -> CircleFun {
        let n = self.grid() as i64;
        let k = k.rem_euclid(n) as usize;
        let mut vals = self.vals.clone();
        vals.rotate_left(k);
        CircleFun { vals }
    }

    pub fn mul(&self, o: &CircleFun) -> CircleFun {
        CircleFun {
            vals: self.vals.iter().zip(&o.vals).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn add(&self, o: &CircleFun) -> CircleFun {
        CircleFun {
            vals: self.vals.iter().zip(&o.vals).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &CircleFun) -> CircleFun {
        CircleFun {
            vals: self.vals.iter().zip(&o.vals).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> CircleFun {
        self.map(|z| z * c)
    }

    pub fn conj(&self) -> CircleFun {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> CircleFun {
        CircleFun {
            vals: self.vals.iter().map(|z| f(*z)).collect(),
        }
    }

    pub fn mean(&self) -> Complex64 {
        pairwise_sum(&self.vals) / self.grid() as f64
    }

    /// `δ1`: the mode `m` is multiplied by `m`.
    pub fn derivative(&self) -> CircleFun {
        let g = self.grid();
        let mut c = self.fourier();
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= CircleFun::mode(g, k) as f64;
        }
        CircleFun::from_coefficients(c)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1e-300);
        self.vals.iter().all(|z| z.im.abs() <= tol * scale)
    }

    /// Largest Fourier modulus beyond `G/4` relative to the largest overall.
    pub fn tail_ratio(&self) -> f64 {
        let g = self.grid();
        let c = self.fourier();
        let top = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        let tail = c
            .iter()
            .enumerate()
            .filter(|(k, _)| *k == g / 2 || CircleFun::mode(g, *k).unsigned_abs() as usize > g / 4)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        tail / top
    }
}
