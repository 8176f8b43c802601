//! report.json, u_final.csv and summary.csv.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discretization::Field;
use crate::error::{PmcError, Result};
use crate::solver::{BoundChecks, LevelRecord, SolveReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub t: f64,
    pub sup_u: f64,
    pub sup_grad: f64,
    #[serde(rename = "max_A2")]
    pub max_a2: Option<f64>,
    pub newton_iters: usize,
    pub final_residual: f64,
}

impl From<&LevelRecord> for ReportRecord {
    fn from(r: &LevelRecord) -> Self {
        ReportRecord {
            t: r.t,
            sup_u: r.sup_u,
            sup_grad: r.sup_grad,
            max_a2: r.max_a2,
            newton_iters: r.newton_iters,
            final_residual: r.final_residual,
        }
    }
}

/// The persisted form of a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub outcome: String,
    pub records: Vec<ReportRecord>,
    pub bound_checks: BoundChecks,
    pub omega_plus_cells: usize,
    pub omega_minus_cells: usize,
    pub config_echo: serde_json::Value,
}

impl Report {
    pub fn new(rep: &SolveReport, config_echo: serde_json::Value) -> Self {
        Report {
            outcome: rep.outcome.name().to_string(),
            records: rep.records.iter().map(ReportRecord::from).collect(),
            bound_checks: rep.bound_checks,
            omega_plus_cells: rep.omega_plus_cells(),
            omega_minus_cells: rep.omega_minus_cells(),
            config_echo,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PmcError::Invalid(e.to_string()))
    }
}

/// 17 significant digits: lossless for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn field_csv(u: &Field) -> String {
    let mut s = String::from("x,y,u\n");
    for (x, v) in u.grid.coords.iter().zip(&u.values) {
        let y = x.get(1).copied().unwrap_or(0.0);
        writeln!(s, "{},{},{}", fmt_f64(x[0]), fmt_f64(y), fmt_f64(*v)).unwrap();
    }
    s
}

pub fn summary_csv(records: &[ReportRecord]) -> String {
    let mut s = String::from("t,sup_u,sup_grad,max_A2,newton_iters,final_residual\n");
    for r in records {
        let a2 = r.max_a2.map(fmt_f64).unwrap_or_default();
        writeln!(s, "{},{},{},{},{},{}", fmt_f64(r.t), fmt_f64(r.sup_u), fmt_f64(r.sup_grad), a2, r.newton_iters, fmt_f64(r.final_residual))
            .unwrap();
    }
    s
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| PmcError::Invalid(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| PmcError::Invalid(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::BoundCheck;
    use proptest::prelude::*;

    fn sample(t: f64, a2: Option<f64>) -> Report {
        Report {
            outcome: "converged".into(),
            records: vec![ReportRecord { t, sup_u: 1.0 / 3.0, sup_grad: 2.5e-7, max_a2: a2, newton_iters: 4, final_residual: 1e-12 }],
            bound_checks: BoundChecks {
                alpha1: Some(BoundCheck { value: 0.1, bound: 0.7, pass: true }),
                alpha2: None,
                tu_beta2: BoundCheck { value: 0.0, bound: 1.0, pass: true },
            },
            omega_plus_cells: 0,
            omega_minus_cells: 3,
            config_echo: serde_json::json!({"problem": {"family": "cmc"}}),
        }
    }

    #[test]
    fn stable_keys() {
        let v: serde_json::Value = serde_json::from_str(&sample(0.1, None).to_json()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["bound_checks", "config_echo", "omega_minus_cells", "omega_plus_cells", "outcome", "records"]);
        let rec = v["records"][0].as_object().unwrap();
        assert!(rec.contains_key("max_A2"));
        assert_eq!(v["bound_checks"].as_object().unwrap().len(), 3);
    }

    #[test]
    fn csv_is_lossless() {
        let v = 0.1f64 + 0.2;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        let csv = summary_csv(&sample(1e-3, Some(0.25)).records);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 6);
    }

    proptest! {
        #[test]
        fn json_round_trip(t in 0.0f64..1.0, a2 in proptest::option::of(0.0f64..1e3)) {
            let r = sample(t, a2);
            prop_assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
        }

        #[test]
        fn csv_round_trip(v in proptest::num::f64::NORMAL) {
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
