//! Adaptive Gauss–Kronrod (7/15) quadrature for the numeric oracles.
//!
//! Integrands are vector valued so that a whole matrix can be integrated with
//! one shared subdivision. Semi-infinite ranges use `x = t/(1−t)`.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn kronrod<F: Fn(f64) -> Vec<f64>>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let n = fc.len();
    let mut k = vec![0.0; n];
    let mut g = vec![0.0; n];
    for i in 0..n {
        k[i] = WGK[7] * fc[i];
        g[i] = WG[3] * fc[i];
    }
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for i in 0..n {
            let s = f1[i] + f2[i];
            k[i] += WGK[j] * s;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * s;
            }
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..n {
        k[i] *= h;
        g[i] *= h;
        err = err.max((k[i] - g[i]).abs());
    }
    Segment {
        a,
        b,
        value: k,
        error: err,
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate is below
/// `tol` (absolute, max over components) or `max_segments` is reached.
pub fn integrate_vec<F: Fn(f64) -> Vec<f64>>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_segments: usize,
) -> QuadResult {
    let mut segs = vec![kronrod(&f, a, b)];
    let mut evals = 15;
    loop {
        let total: f64 = segs.iter().map(|s| s.error).sum();
        if total <= tol || segs.len() >= max_segments {
            break;
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .unwrap();
        let s = segs.swap_remove(idx);
        let m = 0.5 * (s.a + s.b);
        segs.push(kronrod(&f, s.a, m));
        segs.push(kronrod(&f, m, s.b));
        evals += 30;
    }
    let n = segs[0].value.len();
    let mut value = vec![0.0; n];
    let mut error = 0.0;
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    for s in &segs {
        for i in 0..n {
            value[i] += s.value[i];
        }
        error += s.error;
    }
    QuadResult {
        value,
        error,
        evaluations: evals,
    }
}

/// Integrates over `[0, ∞)` through `x = t/(1−t)`.
pub fn integrate_semi_infinite_vec<F: Fn(f64) -> Vec<f64>>(
    f: F,
    tol: f64,
    max_segments: usize,
) -> QuadResult {
    let g = |t: f64| {
        let x = t / (1.0 - t);
        let jac = 1.0 / ((1.0 - t) * (1.0 - t));
        let mut v = f(x);
        for y in v.iter_mut() {
            *y *= jac;
        }
        v
    };
    integrate_vec(g, 0.0, 1.0, tol, max_segments)
}

pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    integrate_semi_infinite_vec(|x| vec![f(x)], tol, 4000).value[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate_vec(|x| vec![x.powi(5), 1.0], 0.0, 2.0, 1e-14, 10);
        assert!((r.value[0] - 64.0 / 6.0).abs() < 1e-12);
        assert!((r.value[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn semi_infinite_rational() {
        // ∫ 1/(1+x)² = 1, ∫ 1/(1+x²) = π/2
        let a = integrate_semi_infinite(|x| 1.0 / ((1.0 + x) * (1.0 + x)), 1e-13);
        assert!((a - 1.0).abs() < 1e-12);
        let b = integrate_semi_infinite(|x| 1.0 / (1.0 + x * x), 1e-13);
        assert!((b - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
