//! CSV and text outputs of `simulate`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fusionkit_core::simulation::{subset_label, McSummary};

use crate::error::AppError;

pub const CURVES_FILE: &str = "curves.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.txt";

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    AppError::io(path, std::io::Error::other(e))
}

/// Header `step,p_class<id>...`, one row per step starting at 1.
pub fn write_curves(path: &Path, summary: &McSummary) -> Result<(), AppError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["step".to_string()];
    header.extend(summary.class_ids.iter().map(|id| format!("p_class{id}")));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (k, row) in summary.mean_curves.iter().enumerate() {
        let mut record = vec![(k + 1).to_string()];
        record.extend(row.iter().map(f64::to_string));
        w.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Header `feature_subset,percent_correct`.
pub fn write_summary(path: &Path, summaries: &[McSummary]) -> Result<(), AppError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["feature_subset", "percent_correct"]).map_err(|e| csv_error(path, e))?;
    for s in summaries {
        w.write_record([s.features.to_string(), s.percent_correct.to_string()]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Plain-text table of percent correct per subset.
pub fn render_report(summaries: &[McSummary], seed: u64) -> String {
    let mut out = String::new();
    let (runs, steps) = summaries.first().map_or((0, 0), |s| (s.runs, s.steps));
    let _ = writeln!(out, "Correct class declarations over {runs} runs x {steps} steps (seed {seed})");
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<16}{:>12}", "Features", "Correct (%)");
    let _ = writeln!(out, "{:-<16}{:->12}", "", "");
    for s in summaries {
        let _ = writeln!(out, "{:<16}{:>12.1}", subset_label(s.features), s.percent_correct);
    }
    out
}

/// Writes every output under `dir`; curves go to `<dir>/<subset>/curves.csv`.
pub fn write_all(dir: &Path, summaries: &[McSummary], seed: u64) -> Result<Vec<PathBuf>, AppError> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let mut written = Vec::new();
    for s in summaries {
        let sub = dir.join(s.features.to_string());
        fs::create_dir_all(&sub).map_err(|e| AppError::io(&sub, e))?;
        let path = sub.join(CURVES_FILE);
        write_curves(&path, s)?;
        written.push(path);
    }
    let path = dir.join(SUMMARY_FILE);
    write_summary(&path, summaries)?;
    written.push(path);
    let path = dir.join(REPORT_FILE);
    fs::write(&path, render_report(summaries, seed)).map_err(|e| AppError::io(&path, e))?;
    written.push(path);
    Ok(written)
}
