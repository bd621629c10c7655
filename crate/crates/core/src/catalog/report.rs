//! Artifact output: per-check CSV and JSON, a run summary, and the
//! deterministic catalog runner.

use super::{run_check, CatalogError, CheckId, CheckReport, RunContext};
use crate::approx::SolveCache;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// CSV schema: one row per sweep point.
const CSV_HEADER: &str = "check,param_json,sweep_value,lhs,rhs,ratio\n";

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(report: &CheckReport) -> String {
    let mut out = String::from(CSV_HEADER);
    let params = csv_field(&report.params.to_string());
    for i in 0..report.sweep.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            report.check, params, report.sweep[i], report.lhs[i], report.rhs[i], report.ratios[i]
        ));
    }
    out
}

/// Write `<check>.csv` and/or `<check>.json` under `dir`.
pub fn write_check_artifacts(
    report: &CheckReport,
    dir: &Path,
    csv: bool,
    json: bool,
) -> std::io::Result<()> {
    if csv {
        let mut f = std::fs::File::create(dir.join(format!("{}.csv", report.check)))?;
        f.write_all(render_csv(report).as_bytes())?;
    }
    if json {
        let mut f = std::fs::File::create(dir.join(format!("{}.json", report.check)))?;
        f.write_all(serde_json::to_string_pretty(report).expect("reports serialize").as_bytes())?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub check: String,
    pub pass: bool,
    pub criterion: String,
    pub max_ratio: Option<f64>,
    pub fitted_exponents: Vec<(String, f64)>,
    pub runtime_secs: f64,
    /// set when the check aborted instead of producing a verdict
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogRunSummary {
    pub seed: u64,
    pub all_pass: bool,
    pub checks: Vec<SummaryEntry>,
}

pub fn write_summary(summary: &CatalogRunSummary, dir: &Path) -> std::io::Result<()> {
    let mut f = std::fs::File::create(dir.join("summary.json"))?;
    f.write_all(serde_json::to_string_pretty(summary).expect("summary serializes").as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Run a list of checks concurrently with a shared solver cache; results come
/// back in input order regardless of scheduling.
pub fn run_catalog(
    entries: &[(CheckId, serde_json::Value)],
    seed: u64,
) -> Vec<(CheckId, Result<CheckReport, CatalogError>)> {
    let cache = SolveCache::new();
    entries
        .par_iter()
        .map(|(id, params)| {
            let ctx = RunContext::new(seed, &cache);
            (*id, run_check(*id, params, &ctx))
        })
        .collect()
}

/// Build the summary from runner output.
pub fn summarize(
    results: &[(CheckId, Result<CheckReport, CatalogError>)],
    seed: u64,
) -> CatalogRunSummary {
    let checks: Vec<SummaryEntry> = results
        .iter()
        .map(|(id, res)| match res {
            Ok(rep) => SummaryEntry {
                check: id.name().to_string(),
                pass: rep.verdict.pass,
                criterion: rep.verdict.criterion.clone(),
                max_ratio: rep.stats.get("max_ratio").copied(),
                fitted_exponents: rep
                    .fitted_exponents
                    .iter()
                    .map(|f| (f.name.clone(), f.slope))
                    .collect(),
                runtime_secs: rep.runtime_secs,
                error: None,
            },
            Err(e) => SummaryEntry {
                check: id.name().to_string(),
                pass: false,
                criterion: String::new(),
                max_ratio: None,
                fitted_exponents: Vec::new(),
                runtime_secs: 0.0,
                error: Some(e.to_string()),
            },
        })
        .collect();
    CatalogRunSummary {
        seed,
        all_pass: checks.iter().all(|c| c.pass),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn csv_quotes_params() {
        let rep = CheckReport {
            check: "DT_SCALING".into(),
            params: serde_json::json!({"a": 1, "b": [1, 2]}),
            sweep: vec![2.0],
            lhs: vec![1.0],
            rhs: vec![0.5],
            ratios: vec![2.0],
            excluded: 0,
            stats: BTreeMap::new(),
            fitted_exponents: vec![],
            verdict: super::super::Verdict {
                pass: true,
                criterion: "ok".into(),
            },
            runtime_secs: 0.0,
        };
        let csv = render_csv(&rep);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "check,param_json,sweep_value,lhs,rhs,ratio");
        let row = lines.next().unwrap();
        assert!(row.starts_with("DT_SCALING,\"{\"\"a\"\":1,"));
        assert!(row.ends_with("2,1,0.5,2"));
    }
}
