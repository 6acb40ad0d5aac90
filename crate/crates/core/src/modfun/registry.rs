//! The table of named functions: definitions and closed forms.
//!
//! Texts use the grammar of [`super::expr`]. Where a formula calls another
//! registered name, the callee's first closed form is substituted.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use super::expr;
use super::ratfun::RatFun;
use super::{ModFun, ModFunError, View};

#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub arity: u8,
    pub view: View,
    /// Defining combination, if the function is defined in terms
    /// of other registered functions.
    pub definition: Option<String>,
    /// Closed forms; all of them must agree.
    pub closed: Vec<String>,
    /// Defined by an integral with a quadrature oracle.
    pub integral: bool,
}

const HT_NUM: &str =
    "(-t (s + t) cosh(s) + s (s + t) cosh(t) - (s - t) (s + t + sinh(s) + sinh(t) - sinh(s + t)))";
const HT_DEN: &str = "(s t (s + t) sinh(s/2) sinh(t/2) sinh((s + t)/2)^2)";
const W_NUM: &str = "(-s - t + t cosh(s) + s cosh(t) + sinh(s) + sinh(t) - sinh(s + t))";

/// Closed form of the modified logarithm of order `m`.
fn modified_log_text(m: usize) -> String {
    let mut sum = String::from("0");
    for j in 1..=m {
        let sign = if j % 2 == 1 { "+" } else { "-" };
        sum.push_str(&format!(" {} (u - 1)^{}/{}", sign, j, j));
    }
    format!("(-1)^{} (u - 1)^(-{}) (log(u) - ({}))", m, m + 1, sum)
}

fn entries() -> Vec<Entry> {
    let e = |name: &str, arity: u8, view: View, def: Option<&str>, closed: &[&str]| Entry {
        name: name.to_string(),
        arity,
        view,
        definition: def.map(str::to_string),
        closed: closed.iter().map(|s| s.to_string()).collect(),
        integral: false,
    };
    let mut v = Vec::new();
    for m in 0..=3 {
        let mut x = e(&format!("L{}", m), 1, View::Rational, None, &[]);
        x.closed.push(modified_log_text(m));
        x.integral = true;
        v.push(x);
    }
    let dd = [
        ("D11", "((-1 + v) log(1/u) - (-1 + 1/u) log(v))/((-1 + 1/u) (-1 + v) (-(1/u) + v))"),
        ("D22", "(u ((-1 + v) ((-1 + 1/u) (1/u - v) (1 + 1/u^2 - (1 + 1/u) v) + ((-1 + 3/u - 2 v) (-1 + v) log(1/u))/u) - ((-1 + 1/u)^3 log(v))/u))/((-1 + 1/u)^3 (1/u - v)^2 (-1 + v)^2)"),
        ("D12", "((-1 + v)^2 log(1/u) + (-1 + 1/u) ((1/u - v) (-1 + v) - (-1 + 1/u) log(v)))/((-1 + 1/u)^2 (1/u - v) (-1 + v)^2)"),
        ("D21", "(u ((-1 + v) ((-1 + 1/u) (1/u - v) + ((1 - 2/u + v) log(1/u))/u) + ((-1 + 1/u)^2 log(v))/u))/((-1 + 1/u)^2 (1/u - v)^2 (-1 + v))"),
        ("D31", "(u^2 ((-1 + v) ((-1 + 1/u) (1/u - v) (5/u^2 + v - (3 (1 + v))/u) - (2 (1 + 3/u^2 + v + v^2 - (3 (1 + v))/u) log(1/u))/u^2) + (2 (-1 + 1/u)^3 log(v))/u^2))/(2 (-1 + 1/u)^3 (1/u - v)^3 (-1 + v))"),
    ];
    for (n, c) in dd {
        let mut x = e(n, 2, View::Rational, None, &[c]);
        x.integral = true;
        v.push(x);
    }
    v.push(e(
        "f1",
        1,
        View::Rational,
        Some("-2 L2(u) u^(1/2) - 2 L2(u) + L1(u) u^(1/2) + 3 L1(u) - L0(u)"),
        &["-(u^(1/2) (2 - 2 u + (1 + u) log(u)))/((-1 + u^(1/2))^3 (1 + u^(1/2))^2)"],
    ));
    v.push(e(
        "f2",
        1,
        View::Rational,
        Some("-4 L2(u) + 4 L1(u)"),
        &["2 (-1 + u^2 - 2 u log(u))/(-1 + u)^3"],
    ));
    v.push(e(
        "g1",
        1,
        View::Rational,
        Some("-2 L2(u) u^(1/2) - 2 L2(u) + 2 L1(u) u^(1/2) + 2 L1(u)"),
        &["(-1 + u^2 - 2 u log(u))/((-1 + u^(1/2))^3 (1 + u^(1/2))^2)"],
    ));
    v.push(e(
        "g2",
        1,
        View::Rational,
        Some("-4 L2(u) + 4 L1(u)"),
        &["2 (-1 + u^2 - 2 u log(u))/(-1 + u)^3"],
    ));
    v.push(e(
        "F",
        2,
        View::Rational,
        Some(concat!(
            "2 D22(u,v) u^(-1) v^(1/2) + 2 D22(u,v) u^(-1) + 2 D22(u,v) u^(-3/2) v^(1/2)",
            " + 2 D22(u,v) u^(-3/2) + 4 D31(u,v) u^(-2) v^(1/2) + 4 D31(u,v) u^(-2)",
            " + 4 D31(u,v) u^(-5/2) v^(1/2) + 4 D31(u,v) u^(-5/2) - 2 D12(u,v) u^(-1/2) v^(1/2)",
            " - 2 D12(u,v) u^(-1/2) - 4 D21(u,v) u^(-1) v^(1/2) - 6 D21(u,v) u^(-1)",
            " - 6 D21(u,v) u^(-3/2) v^(1/2) - 8 D21(u,v) u^(-3/2) + 2 D11(u,v) u^(-1/2) v^(1/2)",
            " + 4 D11(u,v) u^(-1/2)"
        )),
        &[concat!(
            "(2 u (-(((-1 + u v) (1 + sqrt(u) (-1 - sqrt(v) - (-2 + sqrt(u) + u) v + u v^(3/2))))",
            "/((-1 + sqrt(u)) (-1 + sqrt(v)))) + (sqrt(u) sqrt(v) (-1 - sqrt(u) + u",
            " + u (-2 - sqrt(u) + 2 u) sqrt(v) + u (-1 + sqrt(u) + u) v + u^(5/2) v^(3/2)) log(u))",
            "/((-1 + sqrt(u))^2 (1 + sqrt(u))) + (sqrt(v) (1 - sqrt(u) sqrt(v) (-1 - sqrt(v) + v",
            " + u v (-1 + sqrt(v) + v) + sqrt(u) (-2 + sqrt(v) + 2 v))) log(v))",
            "/((-1 + sqrt(v))^2 (1 + sqrt(v)))))/(-1 + u v)^3"
        )],
    ));
    v.push(e(
        "G",
        2,
        View::Rational,
        Some(concat!(
            "2 D22(u,v) u^(-1) v^(1/2) + 2 D22(u,v) u^(-1) + 2 D22(u,v) u^(-3/2) v^(1/2)",
            " + 2 D22(u,v) u^(-3/2) + 4 D31(u,v) u^(-2) v^(1/2) + 4 D31(u,v) u^(-2)",
            " + 4 D31(u,v) u^(-5/2) v^(1/2) + 4 D31(u,v) u^(-5/2) - 4 D21(u,v) u^(-1) v^(1/2)",
            " - 4 D21(u,v) u^(-1) - 4 D21(u,v) u^(-3/2) v^(1/2) - 4 D21(u,v) u^(-3/2)",
            " - D12(u,v) v^(1/2) - D12(u,v) u^(-1/2) v^(1/2) - D12(u,v) u^(-1/2)",
            " - D12(u,v) - D21(u,v) u^(-3/2) v^(1/2) - D21(u,v) u^(-1) v^(1/2)",
            " - D21(u,v) u^(-3/2) - D21(u,v) u^(-1) - D21(u,v) u^(-1)",
            " - D21(u,v) u^(-1) v^(1/2) - D21(u,v) u^(-3/2) - D21(u,v) u^(-3/2) v^(1/2)",
            " + D11(u,v) u^(-1/2) v^(1/2) + D11(u,v) v^(1/2) + D11(u,v) u^(-1/2) + D11(u,v)"
        )),
        &[concat!(
            "-(sqrt(u) (u (-1 + v)^2 (-1 + u v (-4 + u (4 + v))) log(1/u) + (-1 + u)",
            " ((1 + u (-2 + v)) (-1 + v) (-1 + u v) (1 + u v) + (-1 + u) v",
            " (-1 + u (-4 + v (4 + u v))) log(v))))/((-1 + sqrt(u))^2 (1 + sqrt(u)) (-1 + sqrt(v))^2",
            " (1 + sqrt(v)) (-1 + u v)^3)"
        )],
    ));
    v.push(e(
        "L",
        2,
        View::Rational,
        Some(concat!(
            "- D12(u,v) u^(-1/2) v^(1/2) - D12(u,v) v^(1/2) - D12(u,v) u^(-1/2)",
            " - D12(u,v) - D21(u,v) u^(-3/2) v^(1/2) - D21(u,v) u^(-1) v^(1/2)",
            " - D21(u,v) u^(-3/2) - D21(u,v) u^(-1) + D21(u,v) u^(-1)",
            " + D21(u,v) u^(-1) v^(1/2) + D21(u,v) u^(-3/2) + D21(u,v) u^(-3/2) v^(1/2)",
            " + D11(u,v) u^(-1/2) v^(1/2) + D11(u,v) v^(1/2) + D11(u,v) u^(-1/2) + D11(u,v)"
        )),
        &[concat!(
            "(sqrt(u) (u (-1 + v)^2 log(1/u) + (-1 + u) ((-1 + v) (-1 + u v) + (v - u v)",
            " log(v))))/((-1 + sqrt(u))^2 (1 + sqrt(u)) (-1 + sqrt(v))^2 (1 + sqrt(v)) (-1 + u v))"
        )],
    ));
    v.push(e(
        "g",
        2,
        View::Rational,
        None,
        &["4 ((sqrt(u v) - 1) log(u) - (sqrt(u) - 1) log(u v))/(log(v) log(u) log(u v))"],
    ));
    v.push(e(
        "K",
        1,
        View::Exponential,
        Some("-2 f1(exp(x)) (exp(x/2) - 1)/x"),
        &["2 exp(x/2) (2 + exp(x) (-2 + x) + x)/((-1 + exp(x))^2 x)"],
    ));
    let ht = format!("-{}/{}", HT_NUM, HT_DEN);
    v.push(e(
        "H",
        2,
        View::Exponential,
        Some(concat!(
            "-2 f1(exp(s+t)) g(exp(s),exp(t)) - 4 f2(exp(s+t)) (exp(s) - exp(s/2))/s (exp(t/2) - 1)/t",
            " + 4 F(exp(s),exp(t)) (exp(-s/2) - 1)/s (exp(t/2) - 1)/t"
        )),
        &[&ht],
    ));
    v.push(e(
        "S",
        1,
        View::Exponential,
        Some("-2 g1(exp(x)) (exp(x/2) - 1)/x"),
        &["-(4 exp(x) (-x + sinh(x)))/((-1 + exp(x/2))^2 (1 + exp(x/2))^2 x)"],
    ));
    let tt = format!("-cosh((s + t)/2) {}/{}", HT_NUM, HT_DEN);
    v.push(e(
        "T",
        2,
        View::Exponential,
        Some(concat!(
            "-2 g1(exp(s+t)) g(exp(s),exp(t)) - 4 g2(exp(s+t)) (exp(s) - exp(s/2))/s (exp(t/2) - 1)/t",
            " + 4 G(exp(s),exp(t)) (exp(-s/2) - 1)/s (exp(t/2) - 1)/t"
        )),
        &[&tt],
    ));
    let w1 = format!("-4 {}/(s t (sinh(s) + sinh(t) - sinh(s + t)))", W_NUM);
    let w2 = format!("{}/(s t sinh(s/2) sinh(t/2) sinh((s + t)/2))", W_NUM);
    v.push(e(
        "W",
        2,
        View::Exponential,
        Some("4 L(exp(s),exp(t)) (exp(-s/2) - 1)/s (exp(t/2) - 1)/t"),
        &[&w1, &w2],
    ));
    v.push(e(
        "R1",
        1,
        View::Exponential,
        Some("K(x) + S(x)"),
        &[
            "-2 coth(x/4)/x + 1/(2 sinh(x/4)^2)",
            "(1/2 - sinh(x/2)/x)/sinh(x/4)^2",
        ],
    ));
    let r2 = format!("-(1 + cosh((s + t)/2)) {}/{}", HT_NUM, HT_DEN);
    v.push(e(
        "R2",
        2,
        View::Exponential,
        Some("H(s,t) + T(s,t)"),
        &[&r2],
    ));
    v.push(e(
        "R1g",
        1,
        View::Exponential,
        Some("K(x) - S(x)"),
        &[
            "(x + 2 sinh(x/2))/(x + x cosh(x/2))",
            "(1/2 + sinh(x/2)/x)/cosh(x/4)^2",
        ],
    ));
    let r2g = format!("-(1 - cosh((s + t)/2)) {}/{}", HT_NUM, HT_DEN);
    v.push(e(
        "R2g",
        2,
        View::Exponential,
        Some("H(s,t) - T(s,t)"),
        &[&r2g],
    ));
    v
}

type ParseCache = Mutex<HashMap<(String, usize), RatFun>>;

fn parse_cache() -> &'static ParseCache {
    static C: OnceLock<ParseCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Named functions. The standard table is immutable; a clone may receive
/// pipeline-assembled definitions through [`Registry::register_assembled`].
#[derive(Clone, Debug)]
pub struct Registry {
    entries: BTreeMap<String, Entry>,
    order: Vec<String>,
    assembled: BTreeMap<String, Arc<RatFun>>,
}

impl Registry {
    pub fn standard() -> &'static Registry {
        static R: OnceLock<Registry> = OnceLock::new();
        R.get_or_init(|| {
            let es = entries();
            Registry {
                order: es.iter().map(|e| e.name.clone()).collect(),
                entries: es.into_iter().map(|e| (e.name.clone(), e)).collect(),
                assembled: BTreeMap::new(),
            }
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    pub fn entry(&self, name: &str) -> Result<&Entry, ModFunError> {
        self.entries
            .get(name)
            .ok_or_else(|| ModFunError::UnknownFunction(name.to_string()))
    }

    /// Parses text number `idx` of `name`: 0 is the definition, `1 + i` is
    /// closed form `i`.
    fn parsed(&self, name: &str, idx: usize) -> Result<RatFun, ModFunError> {
        let key = (name.to_string(), idx);
        if let Some(r) = parse_cache().lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let e = self.entry(name)?;
        let text = if idx == 0 {
            e.definition.as_deref()
        } else {
            e.closed.get(idx - 1).map(String::as_str)
        };
        let text =
            text.ok_or_else(|| ModFunError::UnknownFunction(format!("{}[{}]", name, idx)))?;
        let std = Registry::standard();
        let resolver = |n: &str| std.parsed(n, 1);
        let r = expr::parse(text, &resolver)?.reduced();
        parse_cache().lock().unwrap().insert(key, r.clone());
        Ok(r)
    }

    fn wrap(&self, name: &str, rat: RatFun) -> Result<ModFun, ModFunError> {
        let e = self.entry(name)?;
        Ok(ModFun::new(name, e.arity, e.view, rat))
    }

    /// The first closed form.
    pub fn closed_form(&self, name: &str) -> Result<ModFun, ModFunError> {
        self.wrap(name, self.parsed(name, 1)?)
    }

    pub fn closed_forms(&self, name: &str) -> Result<Vec<ModFun>, ModFunError> {
        let n = self.entry(name)?.closed.len();
        (0..n)
            .map(|i| self.wrap(name, self.parsed(name, i + 1)?))
            .collect()
    }

    /// The defining combination, if there is one.
    pub fn definition(&self, name: &str) -> Result<Option<ModFun>, ModFunError> {
        if self.entry(name)?.definition.is_none() {
            return Ok(None);
        }
        Ok(Some(self.wrap(name, self.parsed(name, 0)?)?))
    }

    /// The pipeline-assembled function when one was registered, otherwise
    /// the registered definition.
    pub fn assembled(&self, name: &str) -> Result<Option<ModFun>, ModFunError> {
        if let Some(r) = self.assembled.get(name) {
            return Ok(Some(self.wrap(name, (**r).clone())?));
        }
        self.definition(name)
    }

    pub fn register_assembled(&mut self, name: &str, f: RatFun) -> Result<(), ModFunError> {
        self.entry(name)?;
        self.assembled
            .insert(name.to_string(), Arc::new(f.reduced()));
        Ok(())
    }
}
