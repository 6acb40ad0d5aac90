use std::fmt::Write as _;
use std::time::Instant;

use nct_core::golden;
use nct_core::logform::{assemble_curvature, k_to_log, LogBasisExpr};
use nct_core::modfun::{normal_equal, EvalConfig, Registry};
use nct_core::mp;
use nct_core::ncsymbol::{leading_symbol, SymbolExpr};
use nct_core::parametrix::{operator_symbol, verify_parametrix, Half};

use crate::report::{Report, Residual, SuiteReport};
use crate::suites::{self, integrated, parametrix, Config};

pub const STAGES: [&str; 7] = [
    "symbols",
    "parametrix",
    "angular",
    "radial",
    "grouped",
    "logbasis",
    "curvature",
];

fn lines(parts: &[(&str, &SymbolExpr)]) -> (usize, String) {
    let mut s = String::new();
    let mut n = 0;
    for (name, e) in parts {
        writeln!(s, "{} = {}", name, e).unwrap();
        n += e.len();
    }
    (n, s)
}

pub fn symbols(r: &mut Report, halves: &[Half]) {
    let lead = leading_symbol();
    r.stage("leading", None, lead.len(), format!("{}\n", lead));
    for &half in halves {
        let op = operator_symbol(half);
        let (n, s) = lines(&[("a2", &op.a2), ("a1", &op.a1), ("a0", &op.a0)]);
        r.stage("symbols", Some(half.name()), n, s);
    }
}

pub fn parametrix_stage(r: &mut Report, half: Half, show: &[String]) {
    let p = parametrix(half);
    let all = show.is_empty() || show.iter().any(|s| s == "all");
    let want = |n: &str| all || show.iter().any(|s| s == n);
    let mut parts = Vec::new();
    if want("b0") {
        parts.push(("b0", &p.b0));
    }
    if want("b1") {
        parts.push(("b1", &p.b1));
    }
    if want("b2") {
        parts.push(("b2", &p.b2));
    }
    let (n, s) = lines(&parts);
    r.stage("parametrix", Some(half.name()), n, s);
}

pub fn parametrix_residuals(r: &mut Report, half: Half) {
    let rep = verify_parametrix(parametrix(half), &operator_symbol(half));
    let mut s = String::new();
    for (ord, res) in &rep.residuals {
        writeln!(s, "order {}: {}", -ord, res).unwrap();
    }
    r.stage("residual", Some(half.name()), rep.residuals.len(), s);
    r.pass &= rep.ok();
}

pub fn spot_check(r: &mut Report, half: Half) -> Result<(), String> {
    let checks = golden::check_b2(half, &parametrix(half).b2).map_err(|e| format!("{:?}", e))?;
    r.pass &= checks.iter().all(|c| c.matches);
    r.golden.extend(checks);
    Ok(())
}

fn log_basis(half: Half) -> Result<LogBasisExpr, String> {
    k_to_log(&integrated(half)?.grouped).map_err(|e| e.to_string())
}

pub fn curvature_expr(graded: bool) -> Result<LogBasisExpr, String> {
    assemble_curvature(
        &log_basis(Half::Functions)?,
        &log_basis(Half::Forms)?,
        graded,
    )
    .map_err(|e| e.to_string())
}

/// Emits `stage` of `half`, which must not come before `angular`.
pub fn integration_stage(
    r: &mut Report,
    half: Half,
    stage: &str,
    graded: bool,
) -> Result<(), String> {
    let it = integrated(half)?;
    match stage {
        "angular" => r.stage(
            "angular",
            Some(half.name()),
            it.angular.len(),
            format!("π·(\n{})\n", it.angular),
        ),
        "radial" => r.stage(
            "radial",
            Some(half.name()),
            it.radial.len(),
            it.radial.to_string(),
        ),
        "grouped" => {
            let mut s = it.grouped.expr.to_string();
            if !s.ends_with('\n') {
                s.push('\n');
            }
            for (name, f) in &it.grouped.assembled {
                writeln!(s, "{} = {}", name, f).unwrap();
            }
            r.stage("grouped", Some(half.name()), it.grouped.expr.len(), s);
        }
        "logbasis" => {
            let x = log_basis(half)?;
            r.stage("logbasis", Some(half.name()), x.len(), x.to_string());
        }
        "curvature" => {
            let x = curvature_expr(graded)?;
            let name = if graded {
                "curvature (graded)"
            } else {
                "curvature"
            };
            r.stage(name, None, x.len(), x.to_string());
        }
        other => return Err(format!("unknown stage {}", other)),
    }
    Ok(())
}

pub fn pipeline(
    r: &mut Report,
    half: Half,
    through: &str,
    spot: bool,
    graded: bool,
    timing: bool,
) -> Result<(), String> {
    let last = STAGES
        .iter()
        .position(|s| *s == through)
        .ok_or_else(|| format!("unknown stage {}", through))?;
    for stage in &STAGES[..=last] {
        let t0 = Instant::now();
        match *stage {
            "symbols" => symbols(r, &[half]),
            "parametrix" => {
                parametrix_stage(r, half, &[]);
                if spot {
                    spot_check(r, half)?;
                }
            }
            s => integration_stage(r, half, s, graded)?,
        }
        if timing {
            r.time(stage, t0.elapsed().as_millis() as u64);
        }
    }
    Ok(())
}

pub fn curvature_closed_forms(r: &mut Report, graded: bool) -> Result<(), String> {
    let x = curvature_expr(graded)?;
    let reg = Registry::standard();
    let mut s = String::new();
    let mut ok = true;
    for name in x.function_names() {
        let f = x.function(&name).ok_or("missing function")?;
        let entry = reg.entry(&name).map_err(|e| e.to_string())?;
        let closed = reg.closed_form(&name).map_err(|e| e.to_string())?;
        let same = normal_equal(f, &closed);
        ok &= same;
        writeln!(s, "{}(s, t) = {}", name, entry.closed[0]).unwrap();
        writeln!(
            s,
            "  assembled equals closed form: {}",
            if same { "yes" } else { "NO" }
        )
        .unwrap();
    }
    r.pass &= ok;
    r.stage("closedforms", None, x.function_names().len(), s);
    Ok(())
}

pub fn modfun_list(r: &mut Report) {
    let reg = Registry::standard();
    let mut s = String::new();
    let mut n = 0;
    for name in reg.names() {
        let e = reg.entry(name).expect("listed");
        let view = match e.view {
            nct_core::modfun::View::Rational => "u,v",
            nct_core::modfun::View::Exponential => "s,t",
        };
        writeln!(
            s,
            "{:<4} arity {}  in ({})  closed forms {}{}",
            name,
            e.arity,
            view,
            e.closed.len(),
            if e.definition.is_some() {
                "  defined"
            } else {
                ""
            }
        )
        .unwrap();
        n += 1;
    }
    r.stage("functions", None, n, s);
}

pub fn modfun_eval(
    r: &mut Report,
    name: &str,
    a: f64,
    b: f64,
    precision: usize,
) -> Result<(), String> {
    let f = Registry::standard()
        .closed_form(name)
        .map_err(|e| e.to_string())?;
    let cfg = EvalConfig::with_precision(precision);
    let v = f.eval(a, b, &cfg);
    r.stage(
        "value",
        None,
        1,
        format!(
            "{}({}, {}) = {}\n",
            name,
            a,
            b,
            mp::to_decimal(&v, precision)
        ),
    );
    Ok(())
}

pub fn modfun_table(r: &mut Report, name: &str, precision: usize) -> Result<(), String> {
    let f = Registry::standard()
        .closed_form(name)
        .map_err(|e| e.to_string())?;
    let cfg = EvalConfig::with_precision(precision);
    let pts = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut s = String::new();
    let mut n = 0;
    let seconds: &[f64] = if f.arity() == 1 { &[0.0] } else { &pts };
    for &a in &pts {
        for &b in seconds {
            let v = f.eval_st(a, b, &cfg);
            writeln!(
                s,
                "{:>4} {:>4}  {}",
                a,
                b,
                mp::to_decimal(&v, precision.min(20))
            )
            .unwrap();
            n += 1;
        }
    }
    r.stage(&format!("table {} over (s, t)", name), None, n, s);
    Ok(())
}

/// Every registered definition against every registered closed form, exactly.
pub fn modfun_verify(r: &mut Report) -> Result<(), String> {
    let reg = Registry::standard();
    let mut rep = SuiteReport::new(5, "closedforms", true);
    for name in reg.names() {
        let forms = reg.closed_forms(name).map_err(|e| e.to_string())?;
        for (i, f) in forms.iter().enumerate().skip(1) {
            rep.push(Residual::flag(
                format!("{} closed form {} = closed form 1", name, i + 1),
                normal_equal(f, &forms[0]),
            ));
        }
        if let Some(d) = reg.definition(name).map_err(|e| e.to_string())? {
            rep.push(Residual::flag(
                format!("{} definition = closed form", name),
                normal_equal(&d, &forms[0]),
            ));
        }
    }
    let rep = rep.finish();
    r.pass &= rep.pass;
    r.suites.push(rep);
    Ok(())
}

pub fn verify(r: &mut Report, indices: &[u8], cfg: &Config, timing: bool) {
    for &i in indices {
        let t0 = Instant::now();
        let rep = suites::run(i, cfg);
        if timing {
            r.time(&rep.suite, t0.elapsed().as_millis() as u64);
        }
        if rep.gating || indices.len() == 1 {
            r.pass &= rep.pass;
        }
        r.suites.push(rep);
    }
}
