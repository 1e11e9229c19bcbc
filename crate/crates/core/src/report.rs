//! Report documents and their JSON/CSV encodings.
//!
//! JSON key order is fixed by struct declaration order (and sorted maps for
//! parameters); CSV is emitted with plain `Display` float formatting. Both
//! are byte-deterministic for a fixed seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bcv::ModelName;
use crate::biharmonic::{BiharmonicReport, Verdict};

pub const SCHEMA_VERSION: u32 = 1;

/// Full verification document for one submersion.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub entry: String,
    pub params: BTreeMap<String, f64>,
    pub points_sampled: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub report: BiharmonicReport,
}

impl ReportDoc {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-point table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("index,x,y,z,r1,r2,tension,k_n,jac1,jac2,jac3,rc1,rc2,rc3,rc4,rc5,rc6,rc7,fiber,f3\n");
        for (i, r) in self.report.points.iter().enumerate() {
            let _ = write!(out, "{i},{},{},{}", r.p[0], r.p[1], r.p[2]);
            let _ = write!(out, ",{},{},{},{}", r.r1, r.r2, r.tension, r.k_n);
            for v in r.jac {
                let _ = write!(out, ",{v}");
            }
            for v in r.rc {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{},{}", r.fiber, r.f3);
        }
        out
    }
}

/// One sweep cell.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub entry: String,
    pub m: Option<f64>,
    pub l: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub model: Option<ModelName>,
    pub expected: Option<Verdict>,
    pub verdict: Option<Verdict>,
    pub max_residual: Option<f64>,
    pub max_tension: Option<f64>,
    pub max_jacobi: Option<f64>,
    pub max_rc: Option<f64>,
    pub max_fiber: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepDoc {
    pub schema_version: u32,
    pub entry: String,
    pub points_per_cell: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepDoc {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "index,entry,m,l,a,b,model,expected,verdict,max_residual,max_tension,max_jacobi,max_rc,max_fiber,status\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.index,
                r.entry,
                opt_num(r.m),
                opt_num(r.l),
                opt_num(r.a),
                opt_num(r.b),
                r.model.map(|m| m.to_string()).unwrap_or_default(),
                r.expected.map(|v| v.to_string()).unwrap_or_default(),
                r.verdict.map(|v| v.to_string()).unwrap_or_default(),
                opt_num(r.max_residual),
                opt_num(r.max_tension),
                opt_num(r.max_jacobi),
                opt_num(r.max_rc),
                opt_num(r.max_fiber),
                r.status,
            );
        }
        out
    }
}

/// Max-residual summary of the structural identity suites.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityDoc {
    pub schema_version: u32,
    pub target: String,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_connection_deviation: Option<f64>,
    pub max_curvature_deviation: Option<f64>,
    pub max_gram_deviation: Option<f64>,
    pub max_jacobi: Option<f64>,
    pub max_rc: Option<f64>,
    pub max_fiber: Option<f64>,
    pub max_structure: Option<f64>,
    pub pass: bool,
}

impl IdentityDoc {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("identity report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("target,points,seed,tol,connection,curvature,gram,jacobi,rc,fiber,structure,pass\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.target,
            self.points,
            self.seed,
            self.tol,
            opt_num(self.max_connection_deviation),
            opt_num(self.max_curvature_deviation),
            opt_num(self.max_gram_deviation),
            opt_num(self.max_jacobi),
            opt_num(self.max_rc),
            opt_num(self.max_fiber),
            opt_num(self.max_structure),
            self.pass,
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biharmonic::{classify_map, Tolerances};
    use crate::catalog::flat_projection;
    use crate::sample::SamplePlan;

    #[test]
    fn json_has_schema_and_fixed_keys() {
        let entry = flat_projection();
        let plan = SamplePlan { count: 5, seed: 1 };
        let report = classify_map(&entry.spec, plan, Tolerances::default()).unwrap();
        let doc = ReportDoc {
            schema_version: SCHEMA_VERSION,
            entry: entry.label.clone(),
            params: BTreeMap::new(),
            points_sampled: plan.count,
            seed: plan.seed,
            report,
        };
        let json = doc.to_json();
        assert!(json.starts_with("{\n  \"schema_version\": 1"));
        assert!(json.contains("\"verdict\": \"harmonic\""));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["points"].as_array().unwrap().len(), 5);
        let csv = doc.to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("index,x,y,z,r1"));
    }
}
