//! Text artifacts: CSV tables and the JSON run summary.

use serde::Serialize;

use crate::adapt::{AdaptTrace, IterationRecord};
use crate::config::{ConfigEcho, RunConfig};
use crate::mesh::RefinementFactor;

/// Shortest decimal that round-trips to `x`, in exponent form outside
/// `[1e-4, 1e16)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn to_string(rows: Vec<Vec<String>>, header: &[&str]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn exact_abs(record: &IterationRecord) -> Option<f64> {
    record.exact_error.map(|e| e.value.abs())
}

/// `trace.csv`: one row per iteration.
pub fn trace_csv(trace: &AdaptTrace) -> String {
    let rows = trace
        .records
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                r.dof.to_string(),
                r.min_nu.map(|n| n.to_string()).unwrap_or_default(),
                r.max_nu.map(|n| n.to_string()).unwrap_or_default(),
                fmt_num(r.eta),
                fmt_num(r.sum_eta_qc),
                opt_num(exact_abs(r)),
            ]
        })
        .collect();
    to_string(
        rows,
        &["iteration", "dof", "min_nu", "max_nu", "eta", "sum_eta_qc", "exact_error"],
    )
}

/// `mesh_<iter>.csv`: intervals numbered `-N+1..N-1` for `2N` repatoms.
pub fn mesh_csv(record: &IterationRecord) -> String {
    let reps = record.mesh.repatoms();
    let offset = (reps.len() / 2) as i64 - 1;
    let rows = reps
        .windows(2)
        .zip(&record.eta_qc)
        .enumerate()
        .map(|(k, (w, eta))| {
            vec![
                (k as i64 - offset).to_string(),
                w[0].to_string(),
                (w[1] - w[0]).to_string(),
                fmt_num(*eta),
            ]
        })
        .collect();
    to_string(rows, &["j", "ell_j", "nu_j", "eta_qc_j"])
}

#[derive(Serialize)]
struct Summary<'a> {
    converged: bool,
    iterations: usize,
    dof: usize,
    eta: f64,
    sum_eta_qc: f64,
    exact_error: Option<f64>,
    config: &'a ConfigEcho,
}

pub fn summary_json(trace: &AdaptTrace, config: &RunConfig) -> String {
    let last = trace.final_record();
    let echo = config.echo();
    let summary = Summary {
        converged: trace.converged,
        iterations: trace.iterations(),
        dof: last.dof,
        eta: last.eta,
        sum_eta_qc: last.sum_eta_qc,
        exact_error: exact_abs(last),
        config: &echo,
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("plain data serializes");
    s.push('\n');
    s
}

/// One re-estimate of a fixed mesh with a given factor.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyRow {
    pub mesh_id: usize,
    pub lambda: RefinementFactor,
    pub eta: f64,
    pub sum_eta_qc: f64,
    pub exact_error: f64,
}

impl EfficiencyRow {
    pub fn ratio_eta(&self) -> f64 {
        self.eta.abs() / self.exact_error
    }

    pub fn ratio_sum(&self) -> f64 {
        self.sum_eta_qc / self.exact_error
    }
}

pub fn efficiency_csv(rows: &[EfficiencyRow]) -> String {
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                r.mesh_id.to_string(),
                r.lambda.to_string(),
                fmt_num(r.eta),
                fmt_num(r.sum_eta_qc),
                fmt_num(r.exact_error),
                fmt_num(r.ratio_eta()),
                fmt_num(r.ratio_sum()),
            ]
        })
        .collect();
    to_string(
        rows,
        &["mesh_id", "lambda", "eta", "sum_eta_qc", "exact_error", "ratio_eta", "ratio_sum"],
    )
}

/// Long-format table of the per-factor runs.
pub fn mesh_efficiency_csv(sweeps: &[(RefinementFactor, AdaptTrace)]) -> String {
    let rows = sweeps
        .iter()
        .flat_map(|(lambda, trace)| {
            trace.records.iter().map(move |r| {
                vec![
                    lambda.to_string(),
                    r.iteration.to_string(),
                    r.dof.to_string(),
                    opt_num(exact_abs(r)),
                    fmt_num(r.eta),
                ]
            })
        })
        .collect();
    to_string(rows, &["lambda", "iteration", "dof", "exact_error", "eta"])
}
