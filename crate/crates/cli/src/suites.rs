//! Verification suites, numbered as reported by `nct verify`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nct_core::coeffring::{ScalarPoly, Var};
use nct_core::golden;
use nct_core::modfun::{normal_equal, quadrature_oracle, EvalConfig, ModFun, Registry};
use nct_core::mp;
use nct_core::ncsymbol::{
    delta, eval_matrix, parse_expr, rel_diff, star, B0Form, MatrixAssignment, SymbolExpr, Word,
};
use nct_core::parametrix::{
    compute_parametrix, operator_symbol, reduce_resolvent, verify_parametrix, Half, ParametrixTerms,
};
use nct_core::reduce::{
    angular_oracle, eval_modular, integrate_half, radial_integrate, radial_oracle, Integrated,
    ModLetter,
};
use nct_core::torusnum::{
    commutative_curvature, curvature_numeric, functions_pairing, gauss_bonnet_check, heat_oracle,
    log_derivative_identities, random_weyl, rel_diff as te_rel_diff, CircleFun, CircleWeyl,
    HeatOptions, TorusParams,
};

use crate::report::{Residual, SuiteReport};

pub const NAMES: [&str; 11] = [
    "golden",
    "parametrix",
    "angular",
    "radial",
    "closedforms",
    "limits",
    "oracles",
    "gaussbonnet",
    "commutative",
    "logderiv",
    "heat",
];

#[derive(Clone, Debug)]
pub struct Config {
    pub seed: u64,
    pub grid: usize,
    pub precision: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            grid: 1024,
            precision: 33,
        }
    }
}

pub fn index_of(name: &str) -> Option<u8> {
    NAMES.iter().position(|n| *n == name).map(|i| i as u8 + 1)
}

pub fn parametrix(half: Half) -> &'static ParametrixTerms {
    static P: [OnceLock<ParametrixTerms>; 2] = [OnceLock::new(), OnceLock::new()];
    P[half as usize].get_or_init(|| compute_parametrix(&operator_symbol(half)))
}

/// The integrated half, computed once per process.
pub fn integrated(half: Half) -> Result<&'static Integrated, String> {
    static I: [OnceLock<Result<Integrated, String>>; 2] = [OnceLock::new(), OnceLock::new()];
    I[half as usize]
        .get_or_init(|| integrate_half(half).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(Clone::clone)
}

const HALVES: [Half; 2] = [Half::Functions, Half::Forms];

fn rng(cfg: &Config, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream)
}

fn expr(s: &str) -> Result<SymbolExpr, String> {
    parse_expr(s).map_err(|e| format!("{}: {:?}", s, e))
}

fn word(s: &str) -> Result<Word, String> {
    expr(s)?
        .words()
        .next()
        .cloned()
        .ok_or_else(|| format!("{} has no word", s))
}

fn poly(s: &str) -> Result<ScalarPoly, String> {
    let e = expr(s)?;
    Ok(e.coeff(&Word::empty()))
}

pub fn run(index: u8, cfg: &Config) -> SuiteReport {
    let name = NAMES[index as usize - 1];
    let r = SuiteReport::new(index, name, index != 11);
    let out = match index {
        1 => golden_suite(r),
        2 => parametrix_suite(r),
        3 => angular_suite(r),
        4 => radial_suite(r),
        5 => closed_forms_suite(r, cfg),
        6 => limits_suite(r, cfg),
        7 => oracles_suite(r, cfg),
        8 => gauss_bonnet_suite(r, cfg),
        9 => commutative_suite(r, cfg),
        10 => log_derivative_suite(r, cfg),
        _ => heat_suite(r, cfg),
    };
    match out {
        Ok(r) => r.finish(),
        Err((r, e)) => r.failed(e),
    }
}

type Outcome = Result<SuiteReport, (SuiteReport, String)>;

/// Runs `body`, keeping the partial report when it fails.
fn guarded(
    mut r: SuiteReport,
    body: impl FnOnce(&mut SuiteReport) -> Result<(), String>,
) -> Outcome {
    match body(&mut r) {
        Ok(()) => Ok(r),
        Err(e) => Err((r, e)),
    }
}

fn golden_suite(r: SuiteReport) -> Outcome {
    guarded(r, |r| {
        for half in HALVES {
            let checks =
                golden::check_b2(half, &parametrix(half).b2).map_err(|e| format!("{:?}", e))?;
            let bad = checks.iter().filter(|c| !c.matches).count();
            r.push(Residual::count(format!("{} mismatched terms", half), bad));
            r.push(Residual::flag(
                format!("{} at least 12 terms", half),
                checks.len() >= 12,
            ));
            if half == Half::Forms {
                let imag = checks.iter().filter(|c| c.expected.contains('I')).count();
                r.push(Residual::flag("forms imaginary terms present", imag > 0));
            }
            r.param(&format!("{}_terms", half), checks.len());
        }
        Ok(())
    })
}

fn parametrix_suite(r: SuiteReport) -> Outcome {
    guarded(r, |r| {
        for half in HALVES {
            let rep = verify_parametrix(parametrix(half), &operator_symbol(half));
            for (ord, res) in &rep.residuals {
                let ok = if *ord == 0 {
                    *res == SymbolExpr::one()
                } else {
                    res.is_zero()
                };
                r.push(Residual::flag(format!("{} order {}", half, -ord), ok));
            }
        }
        Ok(())
    })
}

const FUNCTION_SPOTS: [&str; 3] = [
    "-2*b0*k*d1^2(k)*b0",
    "8*r^2*b0^2*k^2*d1(k)*d1(k)*b0",
    "4*(t1^2+t2^2)*r^6*b0^2*k^2*d2(k)*b0^2*k^3*d2(k)*b0*k",
];

fn angular_suite(r: SuiteReport) -> Outcome {
    guarded(r, |r| {
        let f = &integrated(Half::Functions)?.angular;
        let missing = FUNCTION_SPOTS
            .iter()
            .map(|s| {
                let e = expr(s)?;
                let (w, c) = e.iter().next().ok_or("empty spot term")?;
                Ok::<_, String>(f.coeff(w) != *c)
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|b| *b)
            .count();
        r.push(Residual::count("functions spot terms missing", missing));
        for half in HALVES {
            let ang = &integrated(half)?.angular;
            let printed = golden::angular_list(half).map_err(|e| format!("{:?}", e))?;
            let diff = ang.sub(&printed);
            r.push(Residual::count(
                format!("{} terms differing from the reference list", half),
                diff.len(),
            ));
            let negative = ang
                .iter()
                .flat_map(|(_, p)| p.iter())
                .filter(|(m, _)| m.exp(Var::T2) < 0)
                .count();
            r.push(Residual::count(
                format!("{} inverse τ2 powers", half),
                negative,
            ));
            r.param(&format!("{}_terms", half), ang.len());
        }
        // the (τ1 ± iτ2) families of the forms half, compared word by word
        // against the whole reference list (one line can feed several words)
        let forms = &integrated(Half::Forms)?.angular;
        let printed = golden::angular_list(Half::Forms).map_err(|e| format!("{:?}", e))?;
        let families = ["t1+I*t2", "t1-I*t2"]
            .iter()
            .map(|fam| {
                let lines: Vec<&str> = golden::angular_text(Half::Forms)
                    .lines()
                    .filter(|l| l.contains(fam))
                    .collect();
                let mut bad = 0;
                for l in &lines {
                    for w in expr(l)?.words() {
                        if forms.coeff(w) != printed.coeff(w) || forms.coeff(w).is_zero() {
                            bad += 1;
                        }
                    }
                }
                Ok::<_, String>((lines.len(), bad))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (fam, (n, bad)) in ["τ1+iτ2", "τ1−iτ2"].iter().zip(families) {
            r.push(Residual::flag(
                format!("forms family {} present", fam),
                n > 0,
            ));
            r.push(Residual::count(
                format!("forms family {} mismatches", fam),
                bad,
            ));
        }
        Ok(())
    })
}

fn radial_suite(r: SuiteReport) -> Outcome {
    guarded(r, |r| {
        let one = |s: &str, fun: &str, q2: i32, base: &str, c: &str| -> Result<bool, String> {
            let m = radial_integrate(&expr(s)?).map_err(|e| e.to_string())?;
            Ok(m.len() == 1 && m.coeff(fun, &[ModLetter::new(q2, word(base)?)]) == poly(c)?)
        };
        let singles = [
            ("-2*b0*k*d1^2(k)*b0", "L0", 0, "-1"),
            ("6*r^2*b0^2*k^3*d1^2(k)*b0", "L1", 0, "3"),
            ("-4*r^4*b0^3*k^4*d1^2(k)*b0*k", "L2", 1, "-2"),
        ];
        for (s, fun, q2, c) in singles {
            r.push(Residual::flag(
                format!("{} -> {} {}", s, c, fun),
                one(s, fun, q2, "k^-1*d1^2(k)", c)?,
            ));
        }
        let x = expr("4*(t1^2+t2^2)*r^6*b0^2*k^2*d2(k)*b0^2*k^3*d2(k)*b0*k")?;
        let m = radial_integrate(&x).map_err(|e| e.to_string())?;
        let letters = [
            ModLetter::new(-2, word("d2(k)*k^-1")?),
            ModLetter::new(1, word("k^-1*d2(k)")?),
        ];
        r.push(Residual::flag(
            "three-b0 term -> 2|τ|² D22",
            m.len() == 1 && m.coeff("D22", &letters) == poly("2*(t1^2+t2^2)")?,
        ));

        let full = &integrated(Half::Functions)?.radial;
        let c1 = |f: &str, q2: i32, base: &str| -> Result<ScalarPoly, String> {
            Ok(full.coeff(f, &[ModLetter::new(q2, word(base)?)]))
        };
        let ones = [
            ("L2", 1, "k^-1*d1^2(k)", "-2"),
            ("L2", 0, "k^-2*d1(k)*d1(k)", "-4"),
            ("L2", 0, "k^-1*d1d2(k)", "-4*t1"),
            ("L1", 1, "k^-1*d2^2(k)", "t1^2+t2^2"),
            ("L1", 0, "k^-1*d1^2(k)", "3"),
            ("L0", 0, "k^-1*d1d2(k)", "-2*t1"),
        ];
        let mut bad = 0;
        for (f, q2, base, c) in ones {
            if c1(f, q2, base)? != poly(c)? {
                bad += 1;
            }
        }
        let pair = |f: &str, a: i32, b: i32| -> Result<ScalarPoly, String> {
            Ok(full.coeff(
                f,
                &[
                    ModLetter::new(a, word("d1(k)*k^-1")?),
                    ModLetter::new(b, word("k^-1*d1(k)")?),
                ],
            ))
        };
        for (f, a, b, c) in [
            ("D31", -5, 0, "4"),
            ("D21", -3, 0, "-8"),
            ("D11", -1, 1, "2"),
            ("D12", -1, 0, "-2"),
        ] {
            if pair(f, a, b)? != poly(c)? {
                bad += 1;
            }
        }
        r.push(Residual::count(
            "functions half collected coefficients",
            bad,
        ));

        // forms half: the −iτ2 terms
        let forms = &integrated(Half::Forms)?.radial;
        let imag = forms
            .iter()
            .filter(|(c, _)| c.iter().any(|(m, g)| m.exp(Var::T2) == 1 && !g.is_real()))
            .count();
        r.push(Residual::flag("forms half carries iτ2 terms", imag > 0));
        Ok(())
    })
}

const ASSEMBLED: [(Half, &str); 7] = [
    (Half::Functions, "f1"),
    (Half::Functions, "f2"),
    (Half::Functions, "F"),
    (Half::Forms, "g1"),
    (Half::Forms, "g2"),
    (Half::Forms, "G"),
    (Half::Forms, "L"),
];

fn closed_forms_suite(r: SuiteReport, cfg: &Config) -> Outcome {
    guarded(r, |r| {
        let reg = Registry::standard();
        let ecfg = EvalConfig::with_precision(cfg.precision);
        let mut rng = rng(cfg, 5);
        let mut pts = Vec::new();
        while pts.len() < 100 {
            let u: f64 = rng.random_range(0.2..5.0);
            let v: f64 = rng.random_range(0.2..5.0);
            pts.push((u.ln(), v.ln()));
        }
        for (half, name) in ASSEMBLED {
            let g = &integrated(half)?.grouped;
            let rat = g
                .function(name)
                .ok_or(format!("{} was not assembled", name))?;
            let closed = reg.closed_form(name).map_err(|e| e.to_string())?;
            let entry = reg.entry(name).map_err(|e| e.to_string())?;
            let ours = ModFun::new(name, entry.arity, closed.view(), rat.clone());
            r.push(Residual::flag(
                format!("{} exact", name),
                normal_equal(&ours, &closed),
            ));
            let mut worst: f64 = 0.0;
            for (s, t) in &pts {
                let a = mp::to_f64(&ours.eval_st(*s, *t, &ecfg));
                let b = mp::to_f64(&closed.eval_st(*s, *t, &ecfg));
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
            }
            r.push(Residual::at_most(
                format!("{} at 100 points (relative)", name),
                worst,
                1e-12,
            ));
        }
        Ok(())
    })
}

fn limits_suite(r: SuiteReport, cfg: &Config) -> Outcome {
    guarded(r, |r| {
        let reg = Registry::standard();
        let ecfg = EvalConfig::with_precision(cfg.precision);
        for (name, want) in [
            ("R1", -1.0 / 3.0),
            ("R1g", 1.0),
            ("R2", 0.0),
            ("R2g", 0.0),
            ("W", -2.0 / 3.0),
        ] {
            let f = reg.closed_form(name).map_err(|e| e.to_string())?;
            let got = mp::to_f64(&f.eval_st(0.0, 0.0, &ecfg));
            r.push(Residual::at_most(
                format!("{}(0) - {:.6}", name, want),
                (got - want).abs(),
                1e-10,
            ));
        }
        Ok(())
    })
}

fn oracles_suite(r: SuiteReport, cfg: &Config) -> Outcome {
    guarded(r, |r| {
        let mut rng = rng(cfg, 7);
        let terms = parametrix(Half::Functions);
        let op = operator_symbol(Half::Functions);
        let a2p = op.a2.add(&SymbolExpr::one());
        let x = terms.b1.add(&terms.b0.mul(&op.a1));
        let composed = terms.b1.mul(&a2p).add(&terms.b0.mul(&op.a1));
        let reduced = reduce_resolvent(&composed);
        let (mut prod, mut st, mut der, mut res, mut grp) = (0f64, 0f64, 0f64, 0f64, 0f64);
        let err = |e: nct_core::ncsymbol::NcError| e.to_string();
        for _ in 0..20 {
            let m = MatrixAssignment::random_free(4, 3, B0Form::Xi, &mut rng);
            let ab = eval_matrix(&x.mul(&terms.b0), &m).map_err(err)?;
            let a_b =
                eval_matrix(&x, &m).map_err(err)? * eval_matrix(&terms.b0, &m).map_err(err)?;
            prod = prod.max(rel_diff(&ab, &a_b));
            let s = eval_matrix(&star(&x), &m).map_err(err)?;
            st = st.max(rel_diff(&s, &eval_matrix(&x, &m).map_err(err)?.adjoint()));
            res = res.max(rel_diff(
                &eval_matrix(&composed, &m).map_err(err)?,
                &eval_matrix(&reduced, &m).map_err(err)?,
            ));
            let mi = MatrixAssignment::random_inner(4, 4, B0Form::Xi, &mut rng);
            for j in [1, 2] {
                let lhs = eval_matrix(&delta(j, &x), &mi).map_err(err)?;
                let rhs = mi
                    .apply_delta(j, &eval_matrix(&x, &mi).map_err(err)?)
                    .ok_or("no generators")?;
                der = der.max(rel_diff(&lhs, &rhs));
            }
            let mr = MatrixAssignment::random_free(4, 2, B0Form::Radial, &mut rng);
            for half in HALVES {
                let it = integrated(half)?;
                let a = eval_modular(&it.radial, &mr).map_err(|e| e.to_string())?;
                let b = eval_modular(&it.grouped.expr, &mr).map_err(|e| e.to_string())?;
                grp = grp.max(rel_diff(&a, &b));
            }
        }
        r.push(Residual::at_most("canonical products", prod, 1e-10));
        r.push(Residual::at_most("adjoint", st, 1e-10));
        r.push(Residual::at_most("derivations (inner model)", der, 1e-10));
        r.push(Residual::at_most("resolvent reduction", res, 1e-10));
        r.push(Residual::at_most("grouping into the basis", grp, 1e-10));

        let mut ang: f64 = 0.0;
        let mut rad: f64 = 0.0;
        for half in HALVES {
            let it = integrated(half)?;
            let m = MatrixAssignment::random_free(4, 2, B0Form::Radial, &mut rng);
            ang = ang.max(
                angular_oracle(&it.b2, &m, 256)
                    .map_err(|e| e.to_string())?
                    .rel_diff,
            );
            rad = rad.max(
                radial_oracle(&it.angular, &m, 1e-11)
                    .map_err(|e| e.to_string())?
                    .rel_diff,
            );
        }
        r.push(Residual::at_most(
            "angular stage vs 256-point rule",
            ang,
            1e-8,
        ));
        r.push(Residual::at_most(
            "radial stage vs adaptive quadrature",
            rad,
            1e-6,
        ));

        let reg = Registry::standard();
        let ecfg = EvalConfig::default();
        let mut worst: f64 = 0.0;
        let names = ["L0", "L1", "L2", "L3", "D11", "D12", "D21", "D22", "D31"];
        for i in 0..20 {
            let u: f64 = rng.random_range(0.2..5.0);
            let v: f64 = rng.random_range(0.2..5.0);
            let name = names[i % names.len()];
            let f = reg.closed_form(name).map_err(|e| e.to_string())?;
            let quad = quadrature_oracle(name, u, v).map_err(|e| e.to_string())?;
            worst = worst.max((mp::to_f64(&f.eval(u, v, &ecfg)) - quad).abs());
        }
        r.push(Residual::at_most(
            "modified logarithms vs quadrature (absolute)",
            worst,
            1e-9,
        ));
        Ok(())
    })
}

const TAUS: [(f64, f64); 3] = [(0.0, 1.0), (1.0 / 3.0, 1.0), (-0.5, 2.0)];

fn weyls(cfg: &Config, stream: u64, n: usize) -> Vec<CircleFun> {
    let mut rng = rng(cfg, stream);
    (0..n)
        .map(|_| {
            let amp = rng.random_range(0.3..1.0);
            random_weyl(cfg.grid, 3, amp, &mut rng)
        })
        .collect()
}

fn torus(g: usize, cfg: &Config, tau: (f64, f64)) -> Result<TorusParams, String> {
    TorusParams::new(g, cfg.grid, Complex64::new(tau.0, tau.1)).map_err(|e| e.to_string())
}

fn gauss_bonnet_suite(r: SuiteReport, cfg: &Config) -> Outcome {
    guarded(r, |r| {
        r.param("grid", cfg.grid);
        let hs = weyls(cfg, 8, 5);
        for g in [0, 1, 7] {
            for tau in TAUS {
                let p = torus(g, cfg, tau)?;
                let mut worst: f64 = 0.0;
                let mut herm: f64 = 0.0;
                for h in &hs {
                    let m = CircleWeyl::new(h.clone(), &p).map_err(|e| e.to_string())?;
                    for graded in [false, true] {
                        let gb = gauss_bonnet_check(&m, graded).map_err(|e| e.to_string())?;
                        worst = worst.max(gb.residual);
                        herm = herm.max(gb.hermiticity_defect);
                    }
                }
                r.push(Residual::at_most(
                    format!("θ = {}/{}, τ = {}{:+}i", g, cfg.grid, tau.0, tau.1),
                    worst,
                    1e-8,
                ));
                r.param(
                    &format!(
                        "hermiticity_defect θ={}/{} τ={}{:+}i",
                        g, cfg.grid, tau.0, tau.1
                    ),
                    format!("{:.3e}", herm),
                );
            }
        }
        Ok(())
    })
}

fn commutative_suite(r: SuiteReport, cfg: &Config) -> Outcome {
    guarded(r, |r| {
        let hs = weyls(cfg, 9, 5);
        for tau in TAUS {
            let p = torus(0, cfg, tau)?;
            let mut worst: f64 = 0.0;
            for h in &hs {
                let m = CircleWeyl::new(h.clone(), &p).map_err(|e| e.to_string())?;
                let a = curvature_numeric(&m, false).map_err(|e| e.to_string())?;
                let b = commutative_curvature(&m).map_err(|e| e.to_string())?;
                worst = worst.max(te_rel_diff(&a, &b).map_err(|e| e.to_string())?);
            }
            r.push(Residual::at_most(
                format!("τ = {}{:+}i", tau.0, tau.1),
                worst,
                1e-10,
            ));
        }
        Ok(())
    })
}

fn log_derivative_suite(r: SuiteReport, cfg: &Config) -> Outcome {
    guarded(r, |r| {
        let hs = weyls(cfg, 10, 5);
        for g in [1, 7] {
            let p = torus(g, cfg, (1.0 / 3.0, 1.0))?;
            let (mut a, mut b): (f64, f64) = (0.0, 0.0);
            for h in &hs {
                let m = CircleWeyl::new(h.clone(), &p).map_err(|e| e.to_string())?;
                let rep = log_derivative_identities(&m).map_err(|e| e.to_string())?;
                a = a.max(rep.product);
                b = b.max(rep.second);
            }
            r.push(Residual::at_most(
                format!("k⁻²δ(k)δ(k), θ = {}/{}", g, cfg.grid),
                a,
                1e-8,
            ));
            r.push(Residual::at_most(
                format!("k⁻¹δδ(k), θ = {}/{}", g, cfg.grid),
                b,
                1e-8,
            ));
        }
        Ok(())
    })
}

fn heat_suite(r: SuiteReport, cfg: &Config) -> Outcome {
    guarded(r, |r| {
        let grid = 256;
        let tau = Complex64::new(-0.5, 2.0);
        let p = TorusParams::new(0, grid, tau).map_err(|e| e.to_string())?;
        let mut rng = rng(cfg, 11);
        let h = random_weyl(grid, 3, 0.2, &mut rng);
        let a = random_weyl(grid, 2, 0.5, &mut rng)
            .add(&CircleFun::constant(grid, Complex64::new(1.0, 0.0)));
        let opts = HeatOptions::default();
        r.param("grid", grid);
        r.param("truncation", opts.truncation);
        r.param("tau", tau);
        let m = CircleWeyl::new(h.clone(), &p).map_err(|e| e.to_string())?;
        let est = heat_oracle(&h, &a, &p, &opts).map_err(|e| e.to_string())?;
        let pairing = functions_pairing(&m, &a).map_err(|e| e.to_string())?.re;
        let want = -PI / tau.im * pairing;
        r.param("c0", format!("{:.6e}", est.c0));
        r.param("predicted", format!("{:.6e}", want));
        r.push(Residual::at_most(
            "flat calibration of c₋₁",
            est.calibration_error.abs(),
            0.01,
        ));
        r.push(Residual::at_most(
            "c₀ against −π/τ2 · t(a R)",
            ((est.c0 - want) / want).abs(),
            0.05,
        ));
        Ok(())
    })
}
