//! Structured pass/fail reports for identity checks and verification
//! suites.
//!
//! Reports are designed for byte-stable serialization: case lists are
//! sorted by id, maps are ordered, and every float is rounded to 12
//! significant digits before it reaches JSON.

use serde::Serialize;

/// Round to 12 significant digits.
///
/// All floating-point output (text and JSON) passes through this, so two
/// runs with the same seed print byte-identical results even if they were
/// produced by differently-chunked parallel reductions that agree to well
/// beyond 12 digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let mag = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(11 - mag);
    (x * factor).round() / factor
}

/// Format with 12 significant digits for human-readable tables.
pub fn fmt_sig(x: f64) -> String {
    format!("{:.11e}", x)
}

/// One verified equality or parameter check.
#[derive(Debug, Clone, Serialize)]
pub struct CaseRecord {
    /// Stable identifier, unique within its report.
    pub id: String,
    /// What the case expects, in words or as a printed value.
    pub expected: String,
    /// What was computed.
    pub computed: String,
    /// Max-norm residual of the comparison.
    pub residual: f64,
    pub pass: bool,
}

impl CaseRecord {
    pub fn new(id: impl Into<String>, expected: impl Into<String>, computed: impl Into<String>, residual: f64, tol: f64) -> Self {
        let residual = round_sig(residual);
        CaseRecord { id: id.into(), expected: expected.into(), computed: computed.into(), residual, pass: residual <= tol }
    }
}

/// Outcome of an identity suite or proof chain.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    /// Which suite or chain produced this report.
    pub suite: String,
    /// Scheme the cases were evaluated over.
    pub scheme: String,
    /// Whether the case list covers every index tuple or a seeded sample.
    pub exhaustive: bool,
    /// Tolerance the cases were judged at.
    pub tolerance: f64,
    pub cases: Vec<CaseRecord>,
    pub pass: bool,
    /// Largest residual over all cases.
    pub max_residual: f64,
}

impl IdentityReport {
    pub fn new(suite: impl Into<String>, scheme: impl Into<String>, exhaustive: bool, tolerance: f64, mut cases: Vec<CaseRecord>) -> Self {
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        let pass = cases.iter().all(|c| c.pass);
        let max_residual = round_sig(cases.iter().map(|c| c.residual).fold(0.0, f64::max));
        IdentityReport { suite: suite.into(), scheme: scheme.into(), exhaustive, tolerance, cases, pass, max_residual }
    }

    /// Plain-text table, one case per line.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "suite {} on {} ({} cases, {}): {}\n",
            self.suite,
            self.scheme,
            self.cases.len(),
            if self.exhaustive { "exhaustive" } else { "sampled" },
            if self.pass { "PASS" } else { "FAIL" }
        ));
        for c in &self.cases {
            out.push_str(&format!(
                "  [{}] {} residual={} expected={} computed={}\n",
                if c.pass { "ok" } else { "FAIL" },
                c.id,
                fmt_sig(c.residual),
                c.expected,
                c.computed
            ));
        }
        out.push_str(&format!("max residual {}\n", fmt_sig(self.max_residual)));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        // Round-trip through serde; floats were already rounded at
        // construction time.
        serde_json::to_value(self).expect("report serialization cannot fail")
    }
}
