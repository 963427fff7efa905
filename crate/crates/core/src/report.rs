//! Versioned JSON reports. Complex numbers serialize as [re, im].

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "spinor-minimal/report/v1";

/// One checked identity: a residual compared against its tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    /// "below" (value < tol) or "above" (value > tol, for quantities that must stay away from 0).
    pub mode: &'static str,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub ok: bool,
    pub checks: Vec<Check>,
    pub data: Value,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            ok: true,
            checks: Vec::new(),
            data: Value::Object(Default::default()),
        }
    }

    /// Records value < tol.
    pub fn below(&mut self, name: impl Into<String>, value: f64, tol: f64) -> &mut Self {
        let pass = value < tol;
        self.push(Check { name: name.into(), value, tol, mode: "below", pass })
    }

    /// Records value > tol.
    pub fn above(&mut self, name: impl Into<String>, value: f64, tol: f64) -> &mut Self {
        let pass = value > tol;
        self.push(Check { name: name.into(), value, tol, mode: "above", pass })
    }

    /// Records a boolean condition as a 0/1 check.
    pub fn holds(&mut self, name: impl Into<String>, cond: bool) -> &mut Self {
        let value = if cond { 0.0 } else { 1.0 };
        self.push(Check { name: name.into(), value, tol: 0.5, mode: "below", pass: cond })
    }

    fn push(&mut self, c: Check) -> &mut Self {
        self.ok &= c.pass;
        self.checks.push(c);
        self
    }

    /// Attaches a serializable value under `key` in `data`.
    pub fn put<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        if let Value::Object(m) = &mut self.data {
            m.insert(key.to_string(), v);
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only serializable data")
    }

    /// Plain-text summary: one line per check.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} [{}]\n", self.command, if self.ok { "ok" } else { "FAILED" });
        for c in &self.checks {
            let rel = if c.mode == "below" { "<" } else { ">" };
            s.push_str(&format!(
                "  {:<4} {:<48} {:>12.3e} {rel} {:.1e}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.tol
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn complex_is_a_pair_and_schema_is_set() {
        let mut r = Report::new("t");
        r.put("z", c64(1.5, -2.0)).below("x", 1e-12, 1e-10).above("y", 0.0, 1.0);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["data"]["z"], serde_json::json!([1.5, -2.0]));
        assert_eq!(v["ok"], false);
        assert!(r.to_text().contains("FAIL"));
    }
}
