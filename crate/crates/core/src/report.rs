//! Machine-readable run reports.
//!
//! Text form: header lines, then one `CHECK <name> <pass|fail> margin=<v> tol=<v>`
//! line per check. `--json` emits the same data as a single object.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, margin: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            passed,
            margin,
            tol,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "CHECK {} {} margin={} tol={}",
            self.name,
            if self.passed { "pass" } else { "fail" },
            fmt_num(self.margin),
            fmt_num(self.tol)
        );
        if let Some(d) = &self.detail {
            s.push_str(" # ");
            s.push_str(d);
        }
        s
    }
}

/// Finite values print in shortest round-trip form; infinities as `inf`/`-inf`.
pub fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Num(f64),
    Text(String),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Num(v) => write!(f, "{}", fmt_num(*v)),
            Value::Text(v) => write!(f, "{v}"),
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub values: Vec<(String, Value)>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Named multi-line text, e.g. matrix dumps.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<(String, Vec<String>)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn value(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.values.push((key.to_string(), value.into()));
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn block(&mut self, name: impl Into<String>, lines: Vec<String>) -> &mut Self {
        self.blocks.push((name.into(), lines));
        self
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command {}\n", self.command);
        for (k, v) in &self.params {
            out.push_str(&format!("param {k}={v}\n"));
        }
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed {seed}\n"));
        }
        for (k, v) in &self.values {
            out.push_str(&format!("VALUE {k}={v}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("NOTE {n}\n"));
        }
        for (name, lines) in &self.blocks {
            out.push_str(&format!("BLOCK {name}\n"));
            for l in lines {
                out.push_str(&format!("  {l}\n"));
            }
        }
        for c in &self.checks {
            out.push_str(&c.line());
            out.push('\n');
        }
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("timing_ms {t:.3}\n"));
        }
        out.push_str(&format!("status {}\n", if self.all_passed() { "pass" } else { "fail" }));
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wrapper<'a> {
            #[serde(flatten)]
            report: &'a RunReport,
            passed: bool,
        }
        // serde_json maps non-finite floats to null
        serde_json::to_string_pretty(&Wrapper {
            report: self,
            passed: self.all_passed(),
        })
        .expect("report serializes")
    }
}
