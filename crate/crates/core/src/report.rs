//! Tabular and structured renderings of estimates and cross-check reports.
//!
//! Output depends only on the report contents, so equal reports render to
//! identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::estimator::{CrossCheckReport, CrossCheckRow, ExitEstimate};

fn window_end(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct CsvRow {
    id: String,
    a: f64,
    b: f64,
    m: f64,
    #[serde(rename = "M")]
    upper: String,
    verdict: String,
    reason: String,
    outcome: String,
    status: String,
    scheme: String,
    delta: String,
    dt: String,
    gaussian_substitution: bool,
    horizon: f64,
    paths: u64,
    seed: u64,
    hits_up: u64,
    hits_down: u64,
    censored: u64,
    out_of_window: u64,
    p_up: f64,
    ci_up_lo: f64,
    ci_up_hi: f64,
    p_down: f64,
    ci_down_lo: f64,
    ci_down_hi: f64,
    model: String,
}

impl CsvRow {
    fn of(row: &CrossCheckRow) -> Self {
        let e = &row.estimate;
        CsvRow {
            id: row.id.clone(),
            a: e.query.a,
            b: e.query.b,
            m: e.query.m,
            upper: window_end(e.query.upper),
            verdict: row.verdict.value.to_string(),
            reason: row.verdict.reason.to_string(),
            outcome: row.outcome.to_string(),
            status: row.status.to_string(),
            scheme: row.plan.scheme.to_string(),
            delta: opt(row.plan.delta),
            dt: opt(row.plan.dt),
            gaussian_substitution: row.plan.gaussian_substitution,
            horizon: row.plan.horizon,
            paths: e.n_paths,
            seed: row.seed,
            hits_up: e.hits_up,
            hits_down: e.hits_down,
            censored: e.n_censored,
            out_of_window: e.n_out_of_window,
            p_up: e.p_up_hat,
            ci_up_lo: e.ci_up.0,
            ci_up_hi: e.ci_up.1,
            p_down: e.p_down_hat,
            ci_down_lo: e.ci_down.0,
            ci_down_hi: e.ci_down.1,
            model: serde_json::to_string(&row.model).expect("models serialize to JSON"),
        }
    }
}

/// One CSV line per row, with a header.
pub fn report_csv(report: &CrossCheckReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        w.serialize(CsvRow::of(row)).expect("in-memory CSV write");
    }
    if report.rows.is_empty() {
        return String::new();
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn report_json(report: &CrossCheckReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize to JSON");
    s.push('\n');
    s
}

/// Fixed-width summary for terminals.
pub fn report_table(report: &CrossCheckReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<30} {:<22} {:<9} {:<26} {:<13} {:<14} {:>8} {:>8}",
        "id", "window", "verdict", "reason", "outcome", "status", "up", "down"
    );
    for row in &report.rows {
        let q = &row.estimate.query;
        let window = format!("a={} b={} [{},{})", q.a, q.b, q.m, window_end(q.upper));
        let _ = writeln!(
            out,
            "{:<30} {:<22} {:<9} {:<26} {:<13} {:<14} {:>8} {:>8}",
            row.id,
            window,
            row.verdict.value.to_string(),
            row.verdict.reason.to_string(),
            row.outcome.to_string(),
            row.status.to_string(),
            row.estimate.hits_up,
            row.estimate.hits_down
        );
    }
    let _ = writeln!(
        out,
        "rows={} contradictions={} paths={} seed={}",
        report.rows.len(),
        report.contradictions(),
        report.paths,
        report.seed
    );
    out
}

/// Fixed-width lines for a list of labelled estimates.
pub fn estimates_table(estimates: &[(String, ExitEstimate)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<30} {:<22} {:>9} {:<21} {:>9} {:<21} {:>9} scheme",
        "id", "window", "p_up", "ci_up", "p_down", "ci_down", "censored"
    );
    for (id, e) in estimates {
        let q = &e.query;
        let window = format!("a={} b={} [{},{})", q.a, q.b, q.m, window_end(q.upper));
        let ci_up = format!("[{:.5}, {:.5}]", e.ci_up.0, e.ci_up.1);
        let ci_down = format!("[{:.5}, {:.5}]", e.ci_down.0, e.ci_down.1);
        let _ = writeln!(
            out,
            "{:<30} {:<22} {:>9.5} {:<21} {:>9.5} {:<21} {:>9} {}",
            id, window, e.p_up_hat, ci_up, e.p_down_hat, ci_down, e.n_censored, e.scheme
        );
    }
    out
}

#[derive(Serialize)]
struct LabelledEstimate<'a> {
    id: &'a str,
    #[serde(flatten)]
    estimate: &'a ExitEstimate,
}

pub fn estimates_json(estimates: &[(String, ExitEstimate)]) -> String {
    let rows: Vec<_> = estimates
        .iter()
        .map(|(id, estimate)| LabelledEstimate { id, estimate })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("estimates serialize to JSON");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::drift_up_jump_down;
    use crate::estimator::{cross_check, CheckCase};
    use crate::sampler::PlanHints;
    use crate::window::ExitQuery;

    fn small_report(seed: u64) -> CrossCheckReport {
        let cases = vec![
            CheckCase {
                id: "whole".into(),
                model: drift_up_jump_down(),
                query: ExitQuery::whole_line(1.0, 1.0),
                hints: PlanHints::default(),
            },
            CheckCase {
                id: "early".into(),
                model: drift_up_jump_down(),
                query: ExitQuery::new(1.0, 1.0, 0.0, 0.5).unwrap(),
                hints: PlanHints::default(),
            },
        ];
        cross_check(&cases, 2000, 0.05, seed).unwrap()
    }

    #[test]
    fn renderings_are_deterministic() {
        let a = small_report(3);
        let b = small_report(3);
        assert_eq!(report_csv(&a), report_csv(&b));
        assert_eq!(report_json(&a), report_json(&b));
        let csv = report_csv(&a);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().next().unwrap().starts_with("id,a,b,m,M,verdict,reason"));
        assert!(csv.contains(",inf,positive,prop1,"));
        let back: CrossCheckReport = serde_json::from_str(&report_json(&a)).unwrap();
        assert_eq!(back, a);
    }
}
