use std::collections::BTreeMap;
use std::fmt::Write as _;

use nct_core::golden::GoldenCheck;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One stage of the pipeline as text.
#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half: Option<String>,
    pub terms: usize,
    pub text: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Residual {
    /// `value ≤ tolerance`; non-finite values fail and are reported as
    /// `f64::MAX` so that the JSON stays numeric.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let (value, pass) = if value.is_finite() {
            (value, value <= tolerance)
        } else {
            (f64::MAX, false)
        };
        Residual {
            name: name.into(),
            value,
            tolerance,
            pass,
        }
    }

    /// A count of failures; passes at zero.
    pub fn count(name: impl Into<String>, n: usize) -> Self {
        Self::at_most(name, n as f64, 0.0)
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::count(name, usize::from(!ok))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub index: u8,
    pub suite: String,
    pub gating: bool,
    pub params: BTreeMap<String, String>,
    pub residuals: Vec<Residual>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteReport {
    pub fn new(index: u8, suite: &str, gating: bool) -> Self {
        SuiteReport {
            index,
            suite: suite.to_string(),
            gating,
            params: BTreeMap::new(),
            residuals: Vec::new(),
            pass: false,
            error: None,
        }
    }

    pub fn param(&mut self, k: &str, v: impl ToString) {
        self.params.insert(k.to_string(), v.to_string());
    }

    pub fn push(&mut self, r: Residual) {
        self.residuals.push(r);
    }

    pub fn finish(mut self) -> Self {
        self.pass = self.error.is_none()
            && !self.residuals.is_empty()
            && self.residuals.iter().all(|r| r.pass);
        self
    }

    pub fn failed(mut self, err: impl ToString) -> Self {
        self.error = Some(err.to_string());
        self.pass = false;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub stages: Vec<Stage>,
    pub golden: Vec<GoldenCheck>,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<String, u64>>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            params: BTreeMap::new(),
            stages: Vec::new(),
            golden: Vec::new(),
            suites: Vec::new(),
            pass: true,
            timing_ms: None,
        }
    }

    pub fn param(&mut self, k: &str, v: impl ToString) {
        self.params.insert(k.to_string(), v.to_string());
    }

    pub fn stage(&mut self, name: &str, half: Option<&str>, terms: usize, text: String) {
        self.stages.push(Stage {
            name: name.to_string(),
            half: half.map(str::to_string),
            terms,
            text,
        });
    }

    pub fn time(&mut self, k: &str, ms: u64) {
        self.timing_ms
            .get_or_insert_with(BTreeMap::new)
            .insert(k.to_string(), ms);
    }

    /// 0 when everything passed, otherwise the index of the first failing
    /// suite; 1 for golden mismatches outside `verify`.
    pub fn exit_code(&self) -> i32 {
        if let Some(s) = self.suites.iter().find(|s| !s.pass && s.gating) {
            return s.index as i32;
        }
        if self.pass {
            return 0;
        }
        self.suites
            .iter()
            .find(|s| !s.pass)
            .map_or(1, |s| s.index as i32)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for st in &self.stages {
            match &st.half {
                Some(h) => writeln!(s, "== {} [{}] ({} terms)", st.name, h, st.terms),
                None => writeln!(s, "== {} ({} terms)", st.name, st.terms),
            }
            .unwrap();
            s.push_str(&st.text);
            if !st.text.ends_with('\n') {
                s.push('\n');
            }
        }
        if !self.golden.is_empty() {
            let bad = self.golden.iter().filter(|g| !g.matches).count();
            writeln!(
                s,
                "== golden terms: {} checked, {} mismatched",
                self.golden.len(),
                bad
            )
            .unwrap();
            for g in &self.golden {
                let mark = if g.matches { "ok" } else { "MISMATCH" };
                writeln!(
                    s,
                    "{:>8}  {}  expected {} got {}",
                    mark, g.term, g.expected, g.actual
                )
                .unwrap();
            }
        }
        for r in &self.suites {
            let mark = match (r.pass, r.gating) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "FAIL (non-gating)",
            };
            writeln!(s, "[{:>2}] {:<12} {}", r.index, r.suite, mark).unwrap();
            for res in &r.residuals {
                let m = if res.pass { " " } else { "!" };
                writeln!(
                    s,
                    "   {} {:<44} {:.3e}  (tol {:.1e})",
                    m, res.name, res.value, res.tolerance
                )
                .unwrap();
            }
            if let Some(e) = &r.error {
                writeln!(s, "   ! error: {}", e).unwrap();
            }
        }
        if let Some(t) = &self.timing_ms {
            for (k, v) in t {
                writeln!(s, "time {}: {} ms", k, v).unwrap();
            }
        }
        s
    }
}
