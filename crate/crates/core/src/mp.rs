//! Thin helpers over `astro-float` for extended-precision evaluation.

use std::cell::RefCell;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, Sign as BigSign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Runs `f` with the thread-local constants cache.
pub fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Mantissa bits needed for `digits` decimal digits, rounded up to a word.
pub fn digits_to_bits(digits: usize) -> usize {
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 8;
    bits.div_ceil(64) * 64
}

pub fn from_int(n: &BigInt, p: usize) -> BigFloat {
    if let Some(v) = n.to_i64() {
        return BigFloat::from_i64(v, p);
    }
    let (sign, digits) = n.to_u64_digits();
    let mut acc = BigFloat::from_u64(0, p);
    let base = BigFloat::from_u64(1u64 << 32, p).mul(&BigFloat::from_u64(1u64 << 32, p), p, RM);
    for d in digits.iter().rev() {
        acc = acc.mul(&base, p, RM).add(&BigFloat::from_u64(*d, p), p, RM);
    }
    if sign == BigSign::Minus {
        acc.neg()
    } else {
        acc
    }
}

pub fn from_rational(q: &BigRational, p: usize) -> BigFloat {
    if q.is_zero() {
        return BigFloat::from_u64(0, p);
    }
    let wp = p + 64;
    let n = from_int(q.numer(), wp);
    let d = from_int(q.denom(), wp);
    n.div(&d, p, RM)
}

pub fn from_f64(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

/// Nearest double.
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((m, _n, s, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let len = m.len();
    let hi = m[len - 1] as u128;
    let lo = if len >= 2 { m[len - 2] as u128 } else { 0 };
    let top = (hi << 64) | lo;
    // value = 0.m × 2^e, and `top` holds the leading 128 bits of m.
    let v = (top as f64) * 2f64.powi(e - 128);
    if s == Sign::Neg {
        -v
    } else {
        v
    }
}

pub fn zero(p: usize) -> BigFloat {
    BigFloat::from_u64(0, p)
}

pub fn one(p: usize) -> BigFloat {
    BigFloat::from_u64(1, p)
}

pub fn exp(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.exp(p, RM, cc))
}

pub fn ln(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.ln(p, RM, cc))
}

pub fn pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

/// Integer power, negative exponents allowed.
pub fn powi(x: &BigFloat, n: i64, p: usize) -> BigFloat {
    if n >= 0 {
        x.powi(n as usize, p, RM)
    } else {
        one(p).div(&x.powi(n.unsigned_abs() as usize, p + 64, RM), p, RM)
    }
}

/// Decimal rendering with `digits` significant digits.
pub fn to_decimal(x: &BigFloat, digits: usize) -> String {
    let f = to_f64(x);
    if digits <= 17 || !f.is_finite() || f == 0.0 {
        return format!("{:.*e}", digits.saturating_sub(1).min(16), f);
    }
    // Scale to an integer with the requested number of digits.
    let p = digits_to_bits(digits + 10);
    let e10 = f.abs().log10().floor() as i64;
    let shift = digits as i64 - 1 - e10;
    let ten = BigFloat::from_u64(10, p);
    let scaled = if shift >= 0 {
        x.mul(&ten.powi(shift as usize, p, RM), p, RM)
    } else {
        x.div(&ten.powi((-shift) as usize, p, RM), p, RM)
    };
    let rounded = scaled.round(0, RM);
    let s = format!("{}", rounded);
    // astro-float prints e.g. "1.2345e+4"; rebuild the integer digit string.
    let int_digits = integer_digits(&s);
    let neg = int_digits.starts_with('-');
    let body = int_digits.trim_start_matches('-');
    let mut mant = String::new();
    if neg {
        mant.push('-');
    }
    mant.push_str(&body[..1]);
    if body.len() > 1 {
        mant.push('.');
        mant.push_str(&body[1..]);
    }
    let exp10 = body.len() as i64 - 1 - shift;
    format!("{}e{}", mant, exp10)
}

fn integer_digits(s: &str) -> String {
    let (neg, s) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (mant, exp) = match s.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (s, 0),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    let mut digits = format!("{}{}", ip, fp);
    let point = ip.len() as i64 + exp;
    if point >= digits.len() as i64 {
        digits.extend(std::iter::repeat_n(
            '0',
            (point - digits.len() as i64) as usize,
        ));
    } else if point > 0 {
        digits.truncate(point as usize);
    }
    let digits = digits.trim_start_matches('0').to_string();
    let digits = if digits.is_empty() {
        "0".to_string()
    } else {
        digits
    };
    if neg {
        format!("-{}", digits)
    } else {
        digits
    }
}

/// A complex number with extended-precision parts.
#[derive(Clone, Debug)]
pub struct MpComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl MpComplex {
    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

impl fmt::Display for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*I", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        let x = from_rational(&q, 128);
        assert!((to_f64(&x) - 1.0 / 3.0).abs() < 1e-17);
        let big = BigInt::from(10).pow(40u32) + BigInt::from(7);
        let y = from_int(&big, 256);
        assert!((to_f64(&y) / 1e40 - 1.0).abs() < 1e-15);
        assert_eq!(to_f64(&from_f64(-2.5, 64)), -2.5);
    }

    #[test]
    fn decimal_rendering() {
        let x = from_rational(&BigRational::new(BigInt::from(2), BigInt::from(3)), 256);
        let s = to_decimal(&x, 40);
        assert!(
            s.starts_with("6.66666666666666666666666666666666666666"),
            "{}",
            s
        );
        assert!(s.ends_with("7e-1"), "{}", s);
    }
}
