//! Verification reports and their JSON / CSV serializations.

use serde::{Deserialize, Serialize};

use crate::grid::{GridBox, GridFunction};

/// Which inequality or identity a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Product of a centered function and its polar against `(2 pi)^n`.
    Thm1,
    /// Product of a duality pair with one side centered against `(2 pi)^n`.
    Thm2,
    /// Split-point bound `(2 pi)^n / (4 lambda (1 - lambda))`.
    Thm3Lambda,
    /// Median split, bound exactly `(2 pi)^n`.
    Thm3Median,
    /// Half-line product bound `pi / 2`.
    Lemma1,
    /// Tilted-mass shift inequality.
    Eq8,
    /// Fiber-reduction product bound `(pi/2) (2 pi)^{n-1}`.
    Eq11,
    /// Volume product of a star body and its polar.
    Corollary,
    /// Gaussian integral of a body's gauge against `c_n * vol`.
    CnIdentity,
}

/// Extents and resolution of one grid involved in a verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxMeta {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl BoxMeta {
    pub fn of_box(b: &GridBox) -> Self {
        BoxMeta {
            lower: b.lower().to_vec(),
            upper: b.upper().to_vec(),
            counts: b.counts().to_vec(),
        }
    }

    pub fn of_function(f: &GridFunction) -> Self {
        Self::of_box(&f.effective_box())
    }
}

/// Grids behind a report: the sampled instance, the polar output when one was
/// computed, and the angular resolution for star-body checks.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GridMeta {
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<BoxMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<BoxMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular: Option<Vec<usize>>,
}

/// Outcome of one verification: the computed product, the bound it is held
/// against, and the slack between them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: Theorem,
    pub product: f64,
    pub bound: f64,
    pub margin: f64,
    pub lambda: Option<f64>,
    pub grid_meta: GridMeta,
    pub passed: bool,
    pub flags: Vec<String>,
}

impl VerificationReport {
    /// Standard one-sided report: passes when `product <= bound * (1 + tol)`.
    pub fn one_sided(
        theorem: Theorem,
        product: f64,
        bound: f64,
        tol: f64,
        lambda: Option<f64>,
        grid_meta: GridMeta,
        flags: Vec<String>,
    ) -> Self {
        VerificationReport {
            theorem,
            product,
            bound,
            margin: bound - product,
            lambda,
            grid_meta,
            passed: product <= bound * (1.0 + tol),
            flags,
        }
    }

    /// A placeholder for an instance whose verification could not run; the
    /// failure reason goes into the flags.
    pub fn failed_with(theorem: Theorem, reason: String) -> Self {
        VerificationReport {
            theorem,
            product: 0.0,
            bound: 0.0,
            margin: 0.0,
            lambda: None,
            grid_meta: GridMeta::default(),
            passed: false,
            flags: vec![format!("error: {reason}")],
        }
    }
}

/// A report paired with the seed that produced its instance, for summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    /// Which instance produced the report, in canonical `name(args)` form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub report: VerificationReport,
}

/// JSON array of report rows, pretty-printed, trailing newline.
pub fn reports_to_json(rows: &[ReportRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// CSV summary with one line per report.
pub fn reports_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("theorem,seed,product,bound,margin,passed\n");
    for row in rows {
        let seed = row.seed.map(|s| s.to_string()).unwrap_or_default();
        let theorem = serde_json::to_value(row.report.theorem)
            .expect("theorem tag")
            .as_str()
            .expect("theorem tag is a string")
            .to_string();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            theorem,
            seed,
            row.report.product,
            row.report.bound,
            row.report.margin,
            row.report.passed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_pass_rule() {
        let r = VerificationReport::one_sided(
            Theorem::Thm2,
            6.28,
            6.283,
            3e-2,
            None,
            GridMeta::default(),
            vec![],
        );
        assert!(r.passed);
        assert!((r.margin - (6.283 - 6.28)).abs() < 1e-12);
        let r2 = VerificationReport::one_sided(
            Theorem::Thm2,
            6.6,
            6.283,
            3e-2,
            None,
            GridMeta::default(),
            vec![],
        );
        assert!(!r2.passed);
    }

    #[test]
    fn json_and_csv_round_trip() {
        let row = ReportRow {
            instance: Some("exponential".into()),
            seed: Some(7),
            report: VerificationReport::one_sided(
                Theorem::Thm3Median,
                2.88,
                6.283,
                3e-2,
                Some(0.5),
                GridMeta::default(),
                vec![],
            ),
        };
        let json = reports_to_json(&[row.clone()]);
        let parsed: Vec<ReportRow> = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].seed, Some(7));
        assert_eq!(parsed[0].report.theorem, Theorem::Thm3Median);
        let csv = reports_to_csv(&[row]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "theorem,seed,product,bound,margin,passed");
        assert!(lines.next().unwrap().starts_with("Thm3Median,7,2.88,"));
    }
}
