//! Verification reports: one row per check, plus free-form JSON blocks.

use serde::Serialize;

use crate::scalar::Scalar;

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 12] = [
    "suite", "check", "n", "m", "r", "s", "residual", "residual_approx", "tolerance", "pass",
    "n_prod", "l_max",
];

/// Truncation settings a row was produced with.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TruncationMeta {
    pub n_prod: Option<u32>,
    pub l_max: Option<i64>,
    pub window: Option<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub suite: String,
    pub check: String,
    /// Index labels `n, m, r, s` when meaningful.
    pub index: [Option<i64>; 4],
    pub residual: String,
    pub residual_approx: f64,
    pub tolerance: String,
    pub pass: bool,
    pub truncation: TruncationMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRow {
    /// Passes iff `|residual| <= tolerance`.
    pub fn measured(
        suite: &str,
        check: &str,
        index: [Option<i64>; 4],
        residual: &Scalar,
        tolerance: &Scalar,
        truncation: TruncationMeta,
    ) -> Self {
        CheckRow {
            suite: suite.into(),
            check: check.into(),
            index,
            residual: residual.to_string(),
            residual_approx: residual.to_f64(),
            tolerance: tolerance.to_string(),
            pass: residual.within(tolerance),
            truncation,
            detail: None,
        }
    }

    /// A yes/no check with residual `0` or `1`.
    pub fn flag(suite: &str, check: &str, index: [Option<i64>; 4], ok: bool, truncation: TruncationMeta) -> Self {
        CheckRow {
            suite: suite.into(),
            check: check.into(),
            index,
            residual: if ok { "0" } else { "1" }.into(),
            residual_approx: if ok { 0.0 } else { 1.0 },
            tolerance: "0".into(),
            pass: ok,
            truncation,
            detail: None,
        }
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn csv_record(&self) -> Vec<String> {
        let o = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.suite.clone(),
            self.check.clone(),
            o(self.index[0]),
            o(self.index[1]),
            o(self.index[2]),
            o(self.index[3]),
            self.residual.clone(),
            format!("{:e}", self.residual_approx),
            self.tolerance.clone(),
            self.pass.to_string(),
            self.truncation.n_prod.map(|v| v.to_string()).unwrap_or_default(),
            o(self.truncation.l_max),
        ]
    }
}

/// Index labels for a triplet and optional `s`.
pub fn idx(n: i64, m: i64, r: i64, s: Option<i64>) -> [Option<i64>; 4] {
    [Some(n), Some(m), Some(r), s]
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub rows: Vec<CheckRow>,
    /// Named structured payloads (breakdowns, scans, tables).
    pub blocks: Vec<(String, serde_json::Value)>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.into(), v);
    }

    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    /// Adds a named payload; a repeated name gets a numeric suffix.
    pub fn block(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        let mut key = name.to_string();
        let mut i = 1;
        while self.blocks.iter().any(|(k, _)| *k == key) {
            i += 1;
            key = format!("{name}_{i}");
        }
        self.blocks.push((key, v));
    }

    /// Appends rows and blocks of `other`, in order. Parameters already
    /// present are kept.
    pub fn merge(&mut self, other: VerificationReport) {
        for (k, v) in other.parameters {
            self.parameters.entry(k).or_insert(v);
        }
        self.rows.extend(other.rows);
        for (k, v) in other.blocks {
            self.block(&k, v);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let blocks: serde_json::Map<String, serde_json::Value> = self.blocks.iter().cloned().collect();
        serde_json::json!({
            "parameters": self.parameters,
            "all_pass": self.all_pass(),
            "rows": self.rows,
            "blocks": blocks,
        })
    }

    /// One line per row.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let ix: Vec<String> = r.index.iter().flatten().map(|v| v.to_string()).collect();
            s.push_str(&format!(
                "{} {}/{} [{}] residual={:e} tol={}",
                if r.pass { "PASS" } else { "FAIL" },
                r.suite,
                r.check,
                ix.join(","),
                r.residual_approx,
                r.tolerance
            ));
            if let Some(d) = &r.detail {
                s.push_str(&format!(" {d}"));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Mode;

    #[test]
    fn rows_and_merge() {
        let m = Mode::Exact;
        let mut a = VerificationReport::new();
        a.push(CheckRow::measured("x", "zero", idx(0, 0, 0, None), &m.zero(), &m.zero(), TruncationMeta::default()));
        let mut b = VerificationReport::new();
        b.push(CheckRow::measured("x", "big", idx(2, 0, -2, Some(4)), &m.ratio(1, 3), &m.zero(), TruncationMeta::default()));
        a.merge(b);
        assert!(!a.all_pass());
        assert_eq!(a.failing().count(), 1);
        assert_eq!(a.rows[1].residual, "1/3");
        assert_eq!(a.rows[1].csv_record().len(), CSV_COLUMNS.len());
        assert_eq!(a.to_json()["rows"][1]["pass"], false);
    }
}
