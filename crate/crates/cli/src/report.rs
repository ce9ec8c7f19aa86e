//! Command reports: residual rows with their thresholds, free-form results
//! and timing; rendered as JSON or as an aligned table.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

/// Characters excluding combining diacritics.
fn display_width(s: &str) -> usize {
    s.chars().filter(|c| !('\u{300}'..='\u{36f}').contains(c)).count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Row {
    /// pass = value ≤ threshold; NaN never passes.
    pub fn check(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub rows: Vec<Row>,
    pub results: Value,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn new(command: Vec<String>) -> Self {
        Self { command, rows: Vec::new(), results: Value::Null, elapsed_ms: 0.0 }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| display_width(&r.name)).max().unwrap_or(4).max(4);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$}  {:>11}  {:>11}  result", "check", "value", "threshold");
        for r in &self.rows {
            let pad = width + r.name.chars().count() - display_width(&r.name);
            let _ = write!(
                s,
                "{:<pad$}  {:>11.3e}  {:>11.3e}  {}",
                r.name,
                r.value,
                r.threshold,
                if r.pass { "PASS" } else { "FAIL" }
            );
            if let Some(n) = &r.note {
                let _ = write!(s, "  ({n})");
            }
            s.push('\n');
        }
        let failed = self.rows.iter().filter(|r| !r.pass).count();
        let _ = writeln!(s, "{} checks, {} failed, {:.1} ms", self.rows.len(), failed, self.elapsed_ms);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_table() {
        let mut r = Report::new(vec!["maxsym".into()]);
        r.push(Row::check("small", 1e-12, 1e-10));
        assert!(r.passed());
        r.push(Row::check("nan", f64::NAN, 1.0).with_note("bad"));
        assert!(!r.passed());
        let t = r.table();
        assert!(t.contains("PASS") && t.contains("FAIL") && t.contains("(bad)"));
        assert!(t.lines().nth(1).unwrap().starts_with("small "));
    }
}
