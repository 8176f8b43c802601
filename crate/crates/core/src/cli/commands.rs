use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Format, RunConfig};
use super::report::{field_csv, fmt_f64, summary_csv, write, Report};
use crate::discretization::radial_reduce;
use crate::error::{PmcError, Result};
use crate::exec::Exec;
use crate::oracles::flux_analysis;
use crate::solver::{continuation_with, gradient_monitor, Outcome, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_NEWTON_FAILURE: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

pub fn exit_code(outcome: &Outcome) -> i32 {
    match outcome {
        Outcome::Converged => EXIT_OK,
        Outcome::BlowUp => EXIT_BLOW_UP,
        Outcome::NewtonFailure { .. } => EXIT_NEWTON_FAILURE,
    }
}

/// Runs one configured solve and writes its outputs under `out`.
pub fn run_solve(cfg: &RunConfig, out: &Path) -> Result<(SolveReport, Report)> {
    let setup = cfg.setup()?;
    let rep = continuation_with(&setup.problem, setup.grid.clone(), &setup.schedule, &setup.newton)?;
    let echo = serde_json::to_value(cfg).expect("config serializes");
    let report = Report::new(&rep, echo);
    if cfg.output.formats.contains(&Format::Json) {
        write(&out.join("report.json"), &report.to_json())?;
    }
    if cfg.output.formats.contains(&Format::Csv) {
        write(&out.join("u_final.csv"), &field_csv(&rep.final_u))?;
        write(&out.join("summary.csv"), &summary_csv(&report.records))?;
    }
    if let Some(m) = &cfg.solver.monitor {
        let g = gradient_monitor(&rep.final_u, &m.center, m.radius)?;
        log::info!("gradient monitor: max |Du| = {:.6e} at {:?}", g.max_grad, g.location);
        write(&out.join("monitor.json"), &(serde_json::to_string_pretty(&g).unwrap() + "\n"))?;
    }
    Ok((rep, report))
}

/// `solve`: exit 0 converged, 2 blow-up, 3 Newton failure, 1 on config or I/O errors.
pub fn cmd_solve(config: &Path, out: Option<&Path>) -> i32 {
    let cfg = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.directory.clone());
    match run_solve(&cfg, &dir) {
        Ok((rep, _)) => {
            eprintln!("outcome: {}", rep.outcome.name());
            exit_code(&rep.outcome)
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// A Cartesian product of parameter values, keyed by dotted config paths
/// such as `problem.c` or `domain.radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: toml::Table,
    pub parameters: Vec<(String, Vec<toml::Value>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub params: BTreeMap<String, String>,
    pub outcome: String,
    pub sup_u: Option<f64>,
    /// 1 − max Φ/J for rotationally symmetric runs.
    pub saturation_margin: Option<f64>,
}

impl SweepSpec {
    /// Parses a run config with an extra `[sweep]` table of arrays.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut base: toml::Table = toml::from_str(text).map_err(|e| PmcError::Invalid(e.to_string()))?;
        let sweep = match base.remove("sweep") {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(PmcError::Invalid("missing [sweep] table".into())),
        };
        let mut parameters = Vec::new();
        for (key, v) in sweep {
            match v {
                toml::Value::Array(a) if !a.is_empty() => parameters.push((key, a)),
                _ => return Err(PmcError::Invalid(format!("sweep.{key} must be a nonempty array"))),
            }
        }
        if parameters.is_empty() {
            return Err(PmcError::Invalid("empty sweep".into()));
        }
        Ok(SweepSpec { base, parameters })
    }

    pub fn len(&self) -> usize {
        self.parameters.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter assignment of row `index` (last parameter varies fastest).
    pub fn assignment(&self, mut index: usize) -> Vec<(String, toml::Value)> {
        let mut out = Vec::with_capacity(self.parameters.len());
        for (key, vals) in self.parameters.iter().rev() {
            out.push((key.clone(), vals[index % vals.len()].clone()));
            index /= vals.len();
        }
        out.reverse();
        out
    }

    pub fn row_config(&self, index: usize) -> Result<RunConfig> {
        let mut table = self.base.clone();
        for (path, v) in self.assignment(index) {
            let parts: Vec<&str> = path.split('.').collect();
            let (last, head) = parts.split_last().unwrap();
            let mut cur = &mut table;
            for p in head {
                cur = cur
                    .entry(p.to_string())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| PmcError::Invalid(format!("{path}: {p} is not a table")))?;
            }
            cur.insert(last.to_string(), v);
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| PmcError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run_row(sweep: &SweepSpec, index: usize, out: &Path) -> SweepRow {
    let params = sweep.assignment(index).into_iter().map(|(k, v)| (k, v.to_string())).collect();
    let mut row = SweepRow { index, params, outcome: String::new(), sup_u: None, saturation_margin: None };
    let cfg = match sweep.row_config(index) {
        Ok(c) => c,
        Err(e) => {
            row.outcome = format!("config_error: {e}");
            return row;
        }
    };
    if let Ok(setup) = cfg.setup() {
        if let Ok(ode) = radial_reduce(&setup.problem, &setup.grid.domain) {
            row.saturation_margin = Some(flux_analysis(&ode).margin());
        }
    }
    match run_solve(&cfg, &out.join(format!("row_{index:04}"))) {
        Ok((rep, _)) => {
            row.outcome = rep.outcome.name().to_string();
            row.sup_u = Some(rep.final_u.sup_abs());
        }
        Err(e) => row.outcome = format!("error: {e}"),
    }
    row
}

/// Runs every row (concurrently when a thread pool is available) and returns
/// the rows in index order.
pub fn run_sweep(sweep: &SweepSpec, out: &Path, exec: Exec) -> Vec<SweepRow> {
    exec.map(sweep.len(), |i| run_row(sweep, i, out))
}

pub fn sweep_csv(sweep: &SweepSpec, rows: &[SweepRow]) -> String {
    let names: Vec<&str> = sweep.parameters.iter().map(|(k, _)| k.as_str()).collect();
    let mut s = String::from("index");
    for n in &names {
        write!(s, ",{n}").unwrap();
    }
    s.push_str(",outcome,sup_u,saturation_margin\n");
    for r in rows {
        write!(s, "{}", r.index).unwrap();
        for n in &names {
            write!(s, ",{}", r.params[*n]).unwrap();
        }
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        writeln!(s, ",{},{},{}", r.outcome.replace(',', ";"), opt(r.sup_u), opt(r.saturation_margin)).unwrap();
    }
    s
}

/// `sweep`: exit 0 when every row produced output, 1 on config errors.
pub fn cmd_sweep(config: &Path, out: Option<&Path>, threads: Option<usize>) -> i32 {
    let sweep = match std::fs::read_to_string(config).map_err(|e| PmcError::Invalid(e.to_string())).and_then(|t| SweepSpec::from_toml(&t)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let dir: PathBuf = out.map(Path::to_path_buf).unwrap_or_else(|| {
        sweep.base
            .get("output")
            .and_then(|o| o.get("directory"))
            .and_then(|d| d.as_str())
            .map_or_else(|| PathBuf::from("out"), PathBuf::from)
    });
    let rows = with_threads(threads, || run_sweep(&sweep, &dir, Exec::default()));
    if let Err(e) = write(&dir.join("sweep.csv"), &sweep_csv(&sweep, &rows)) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    eprintln!("{} rows written", rows.len());
    EXIT_OK
}

pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}
