//! Parser from formula text to [`RatFun`].
//!
//! Grammar: `+ - * / ^`, implicit multiplication, parentheses, integers,
//! the variables `u v` (rational view) and `s t x` (exponential view, `x`
//! is `s`), the elementary functions `log exp sqrt sinh cosh tanh coth`, and
//! calls to registered names such as `f1(exp(s+t))` or `D22(u,v)`.
//! Fractional powers, `log` and registry arguments must reduce to monomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::lpoly::{Exps, LPoly, EU, EV, LU, LV};
use super::ratfun::RatFun;
use super::ModFunError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<Tok>, ModFunError> {
    let cs: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = cs[st..i].iter().collect();
            out.push(Tok::Num(s.parse().unwrap()));
        } else if c.is_ascii_alphabetic() {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(ModFunError::Parse(format!("unexpected character '{}'", c)));
        }
    }
    Ok(out)
}

/// Resolves a registered name to its function of `(u, v)`.
pub trait Resolver {
    fn resolve(&self, name: &str) -> Result<RatFun, ModFunError>;
}

impl<F: Fn(&str) -> Result<RatFun, ModFunError>> Resolver for F {
    fn resolve(&self, name: &str) -> Result<RatFun, ModFunError> {
        self(name)
    }
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    res: &'a dyn Resolver,
}

pub fn parse(src: &str, res: &dyn Resolver) -> Result<RatFun, ModFunError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        res,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ModFunError::Parse(format!(
            "trailing input at token {} of '{}'",
            p.pos, src
        )));
    }
    Ok(e)
}

/// Parses a formula that uses no registered names.
pub fn parse_plain(src: &str) -> Result<RatFun, ModFunError> {
    parse(src, &|n: &str| {
        Err(ModFunError::UnknownFunction(n.to_string()))
    })
}

fn not_rational(what: &str) -> ModFunError {
    ModFunError::NotRational(what.to_string())
}

/// `c · eu^a ev^b` with `c = 1`, or an error.
fn unit_root(f: &RatFun, what: &str) -> Result<(i32, i32), ModFunError> {
    let f = f.reduced();
    if f.denominator_factors().next().is_some() {
        return Err(not_rational(what));
    }
    match f.numerator().as_monomial() {
        Some((e, c)) if c.is_one() && e[LU] == 0 && e[LV] == 0 => Ok((e[EU], e[EV])),
        _ => Err(not_rational(what)),
    }
}

/// `a·lu + b·lv` with rational `a, b`, or an error.
fn log_linear(f: &RatFun, what: &str) -> Result<(BigRational, BigRational), ModFunError> {
    let f = f.reduced();
    if f.denominator_factors().next().is_some() {
        return Err(not_rational(what));
    }
    let mut a = BigRational::zero();
    let mut b = BigRational::zero();
    for (e, c) in f.numerator().iter() {
        match e {
            [0, 0, 1, 0] => a = c.clone(),
            [0, 0, 0, 1] => b = c.clone(),
            _ => return Err(not_rational(what)),
        }
    }
    Ok((a, b))
}

fn quarter_int(q: &BigRational, what: &str) -> Result<i32, ModFunError> {
    let x = q * BigRational::from_integer(4.into());
    if !x.is_integer() {
        return Err(not_rational(what));
    }
    x.to_integer().to_i32().ok_or_else(|| not_rational(what))
}

/// `exp(a·lu + b·lv)` as a root monomial.
fn exp_of(f: &RatFun) -> Result<RatFun, ModFunError> {
    let (a, b) = log_linear(f, "exp of a non-linear argument")?;
    Ok(RatFun::root(
        quarter_int(&a, "exp exponent not in ¼ℤ")?,
        quarter_int(&b, "exp exponent not in ¼ℤ")?,
    ))
}

fn log_of(f: &RatFun) -> Result<RatFun, ModFunError> {
    let (a, b) = unit_root(f, "log of a non-monomial")?;
    let q4 = |n: i32| BigRational::new(n.into(), 4.into());
    Ok(RatFun::log_u()
        .scale(&q4(a))
        .add(&RatFun::log_v().scale(&q4(b))))
}

/// Substitution data for `u ↦ u^{a}v^{b}` given as the exponent pair of the
/// new `u` in units of whole powers. Exponential-view callees take `s`-type arguments, which are
/// exponentiated first.
fn arg_map(arg: &RatFun) -> Result<(Exps, LPoly), ModFunError> {
    let (a, b) = match unit_root(arg, "registry argument is not a monomial") {
        Ok(x) => x,
        Err(e) => match exp_of(arg) {
            Ok(m) => unit_root(&m, "")?,
            Err(_) => return Err(e),
        },
    };
    if a % 4 != 0 || b % 4 != 0 {
        return Err(not_rational("registry argument has a fractional power"));
    }
    let (a, b) = (a / 4, b / 4);
    let log = LPoly::var(LU)
        .scale(&BigRational::from_integer(a.into()))
        .add(&LPoly::var(LV).scale(&BigRational::from_integer(b.into())));
    Ok(([a, b, 0, 0], log))
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ModFunError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ModFunError::Parse(format!(
                "expected '{}' at token {}",
                c, self.pos
            )))
        }
    }

    fn expr(&mut self) -> Result<RatFun, ModFunError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RatFun, ModFunError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(ModFunError::Parse("division by zero".into()));
                }
                acc = acc.div(&d);
            } else if matches!(
                self.peek(),
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym('('))
            ) {
                acc = acc.mul(&self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RatFun, ModFunError> {
        if self.eat('-') {
            Ok(self.unary()?.neg())
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<RatFun, ModFunError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.unary_exponent()?;
        raise(&base, &e)
    }

    fn unary_exponent(&mut self) -> Result<BigRational, ModFunError> {
        let neg = self.eat('-');
        let v = self.primary()?;
        let q = v
            .as_constant()
            .ok_or_else(|| ModFunError::Parse("exponent must be a rational constant".into()))?;
        Ok(if neg { -q } else { q })
    }

    fn args(&mut self) -> Result<Vec<RatFun>, ModFunError> {
        self.expect('(')?;
        let mut v = vec![self.expr()?];
        while self.eat(',') {
            v.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(v)
    }

    fn primary(&mut self) -> Result<RatFun, ModFunError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(RatFun::constant(BigRational::from_integer(n)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "u" => return Ok(RatFun::root(4, 0)),
                    "v" => return Ok(RatFun::root(0, 4)),
                    "s" | "x" => return Ok(RatFun::log_u()),
                    "t" => return Ok(RatFun::log_v()),
                    _ => {}
                }
                let a = self.args()?;
                self.call(&name, a)
            }
            other => Err(ModFunError::Parse(format!(
                "unexpected token {:?} at {}",
                other, self.pos
            ))),
        }
    }

    fn call(&mut self, name: &str, a: Vec<RatFun>) -> Result<RatFun, ModFunError> {
        let one_arg = |a: &[RatFun]| -> Result<RatFun, ModFunError> {
            if a.len() == 1 {
                Ok(a[0].clone())
            } else {
                Err(ModFunError::Parse(format!("{} takes one argument", name)))
            }
        };
        let half = BigRational::new(1.into(), 2.into());
        match name {
            "log" => log_of(&one_arg(&a)?),
            "exp" => exp_of(&one_arg(&a)?),
            "sqrt" => raise(&one_arg(&a)?, &half),
            "sinh" | "cosh" | "tanh" | "coth" => {
                let x = one_arg(&a)?;
                let ep = exp_of(&x)?;
                let em = exp_of(&x.neg())?;
                let sh = ep.sub(&em).scale(&half);
                let ch = ep.add(&em).scale(&half);
                Ok(match name {
                    "sinh" => sh,
                    "cosh" => ch,
                    "tanh" => sh.div(&ch),
                    _ => ch.div(&sh),
                })
            }
            _ => {
                let f = self.res.resolve(name)?;
                if a.is_empty() || a.len() > 2 {
                    return Err(ModFunError::Parse(format!("bad arity for {}", name)));
                }
                let (ru, lu) = arg_map(&a[0])?;
                let (rv, lv) = if a.len() == 2 {
                    arg_map(&a[1])?
                } else {
                    if f.uses_v() {
                        return Err(ModFunError::Parse(format!("{} needs two arguments", name)));
                    }
                    ([0, 1, 0, 0], LPoly::var(LV))
                };
                Ok(f.substitute(&[ru, rv], &[lu, lv]))
            }
        }
    }
}

/// `base^e` for rational `e`; fractional powers need a monomial base.
fn raise(base: &RatFun, e: &BigRational) -> Result<RatFun, ModFunError> {
    if e.is_integer() {
        let n = e
            .to_integer()
            .to_i32()
            .ok_or_else(|| ModFunError::Parse("exponent too large".into()))?;
        if n < 0 && base.is_zero() {
            return Err(ModFunError::Parse("negative power of zero".into()));
        }
        return Ok(base.pow(n));
    }
    let r = base.reduced();
    let mono = if r.denominator_factors().next().is_none() {
        r.numerator().as_monomial()
    } else {
        None
    };
    let Some((ex, c)) = mono else {
        return Err(not_rational("fractional power of a non-monomial"));
    };
    if ex[LU] != 0 || ex[LV] != 0 {
        return Err(not_rational("fractional power of a logarithm"));
    }
    let mut out = [0i32; 2];
    for (k, i) in [EU, EV].into_iter().enumerate() {
        let x = BigRational::from_integer(ex[i].into()) * e;
        if !x.is_integer() {
            return Err(not_rational("power leaves ¼ℤ"));
        }
        out[k] = x.to_integer().to_i32().unwrap();
    }
    let coeff = rational_power(&c, e).ok_or_else(|| not_rational("irrational constant"))?;
    Ok(RatFun::root(out[0], out[1]).scale(&coeff))
}

/// `c^e` when it is rational.
fn rational_power(c: &BigRational, e: &BigRational) -> Option<BigRational> {
    if c.is_one() {
        return Some(BigRational::one());
    }
    if c.is_negative() {
        return None;
    }
    let root = |n: &BigInt| -> Option<BigInt> {
        let d = e.denom().to_u32()?;
        let r = n.nth_root(d);
        if r.pow(d) == *n {
            Some(r)
        } else {
            None
        }
    };
    let num = root(c.numer())?;
    let den = root(c.denom())?;
    let base = BigRational::new(num, den);
    let p = e.numer().to_i32()?;
    Some(if p >= 0 {
        num_traits::pow(base, p as usize)
    } else {
        num_traits::pow(base.recip(), (-p) as usize)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_view_matches_roots() {
        let a = parse_plain("sinh(s/2)^2").unwrap();
        let b = parse_plain("(u - 2 + 1/u)/4").unwrap();
        assert!(a.equals(&b));
        let c = parse_plain("coth(x/4)").unwrap();
        let d = parse_plain("(u^(1/2) + 1)/(u^(1/2) - 1)").unwrap();
        assert!(c.equals(&d));
    }

    #[test]
    fn logs_and_roots() {
        let a = parse_plain("log(u v^(1/2))").unwrap();
        let b = parse_plain("s + t/2").unwrap();
        assert!(a.equals(&b));
        let c = parse_plain("sqrt(4 u)").unwrap();
        assert!(c.equals(&parse_plain("2 u^(1/2)").unwrap()));
        assert!(matches!(
            parse_plain("sqrt(u + 1)"),
            Err(ModFunError::NotRational(_))
        ));
        assert!(matches!(
            parse_plain("log(u+1)"),
            Err(ModFunError::NotRational(_))
        ));
    }

    #[test]
    fn precedence() {
        let a = parse_plain("-u^2 + 2 u/3 (1 + v)").unwrap();
        let b = parse_plain("(-(u*u)) + ((2*u)/3)*(1+v)").unwrap();
        assert!(a.equals(&b));
        assert!(parse_plain("1/u^-1")
            .unwrap()
            .equals(&parse_plain("u").unwrap()));
    }

    #[test]
    fn registered_names_substitute() {
        let l0 = |n: &str| -> Result<RatFun, ModFunError> {
            match n {
                "h" => parse_plain("log(u)/(u-1)"),
                _ => Err(ModFunError::UnknownFunction(n.into())),
            }
        };
        let a = parse("h(exp(s+t))", &l0).unwrap();
        let b = parse_plain("(s+t)/(u v - 1)").unwrap();
        assert!(a.equals(&b));
        assert!(matches!(
            parse("q(u)", &l0),
            Err(ModFunError::UnknownFunction(_))
        ));
    }
}
