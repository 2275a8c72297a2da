//! `reports.csv` reader and `declarations.csv` writer for `classify`.
//!
//! Each row is `step,sensor_id,report_type,payload...` with a type-specific
//! payload:
//!
//! | type               | payload                                                   |
//! |--------------------|-----------------------------------------------------------|
//! | `kinematic`        | 6 state values then 36 covariance values, row-major       |
//! | `signal`           | pri_high, pri_low, freq_high, freq_low, pw_high, pw_low, amplitude |
//! | `attribute`        | attribute name, then one probability per outcome          |
//! | `declaration`      | one probability per class                                 |
//! | `declaration_mass` | focal elements as `{id,id} mass`, one per field           |

use std::path::Path;

use fusionkit_core::attributes::{initialize_attributes, AttributeCatalog, AttributeKind, NORMALIZATION_TOLERANCE};
use fusionkit_core::classification::{
    associate_single_target, classify_reports, ClassPosterior, Declaration, DeclarationReport, FusionModel, Report,
    TimedReport,
};
use fusionkit_core::evidence::parse_mass_text;
use fusionkit_core::measurement::EsmSignalReport;
use fusionkit_core::tracking::{GaussianEstimate, StateMatrix, StateVector};

use crate::error::AppError;

pub const DECLARATIONS_FILE: &str = "declarations.csv";
const HEADER: [&str; 3] = ["step", "sensor_id", "report_type"];

/// Reads every report; an empty file or a header-only file yields none.
pub fn read_reports(path: &Path, model: &FusionModel) -> Result<Vec<TimedReport>, AppError> {
    let origin = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| AppError::io(path, std::io::Error::other(e)))?;
    let mut out = Vec::new();
    let mut header_seen = false;
    for record in reader.records() {
        let record = record.map_err(|e| AppError::Schema {
            origin: origin.clone(),
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let schema = |message: String| AppError::Schema { origin: origin.clone(), row, message };
        if !header_seen {
            header_seen = true;
            let names: Vec<&str> = record.iter().take(3).collect();
            if names != HEADER {
                return Err(schema(format!("header must start with {}", HEADER.join(","))));
            }
            continue;
        }
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() < 3 {
            return Err(schema("expected step, sensor_id and report_type".into()));
        }
        let step = record[0].parse::<u64>().map_err(|_| schema(format!("invalid step `{}`", &record[0])))?;
        let sensor_id = record[1].parse::<u32>().map_err(|_| schema(format!("invalid sensor_id `{}`", &record[1])))?;
        let payload: Vec<&str> = record.iter().skip(3).filter(|f| !f.is_empty()).collect();
        let report = parse_payload(&record[2], &payload, sensor_id, model).map_err(schema)?;
        out.push(TimedReport { step, sensor_id, report });
    }
    Ok(out)
}

fn numbers(fields: &[&str], expected: Option<usize>) -> Result<Vec<f64>, String> {
    if let Some(n) = expected {
        if fields.len() != n {
            return Err(format!("expected {n} payload values, found {}", fields.len()));
        }
    }
    fields
        .iter()
        .map(|f| f.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("invalid number `{f}`")))
        .collect()
}

fn parse_payload(kind: &str, fields: &[&str], sensor_id: u32, model: &FusionModel) -> Result<Report, String> {
    let source = format!("sensor {sensor_id}");
    let classes = model.classes.len();
    match kind {
        "kinematic" => {
            let v = numbers(fields, Some(42))?;
            let est =
                GaussianEstimate::new(StateVector::from_column_slice(&v[..6]), StateMatrix::from_row_slice(&v[6..]))
                    .map_err(|e| e.to_string())?;
            Ok(Report::Kinematic(est))
        }
        "signal" => {
            let v = numbers(fields, Some(7))?;
            let values: [f64; 7] = v.try_into().expect("seven values");
            EsmSignalReport::from_values(values).map(Report::Signal).map_err(|e| e.to_string())
        }
        "attribute" => {
            let (name, probs) = fields.split_first().ok_or("attribute report needs a name")?;
            let kind = AttributeKind::from_name(name).ok_or_else(|| format!("unknown attribute `{name}`"))?;
            attribute_report(&model.catalog, kind, &numbers(probs, None)?).map(Report::Attribute)
        }
        "declaration" => {
            let p = numbers(fields, Some(classes))?;
            DeclarationReport::probabilities(source, p).map(Report::Declaration).map_err(|e| e.to_string())
        }
        "declaration_mass" => {
            if fields.is_empty() {
                return Err("mass declaration has no focal elements".into());
            }
            let text = format!("frame {{{}}}\n{}", model.frame().elements().join(","), fields.join("\n"));
            let m = parse_mass_text(&text).map_err(|e| match e {
                fusionkit_core::Error::Parse { line, message } => format!("focal field {}: {message}", line - 1),
                other => other.to_string(),
            })?;
            Ok(Report::Declaration(DeclarationReport::mass(source, m)))
        }
        other => Err(format!("unknown report_type `{other}`")),
    }
}

/// A report for one attribute; the others stay at their priors.
fn attribute_report(
    catalog: &AttributeCatalog,
    kind: AttributeKind,
    probs: &[f64],
) -> Result<fusionkit_core::attributes::AttributeReport, String> {
    let i = catalog.position(kind).ok_or_else(|| format!("attribute `{}` is not in the catalog", kind.name()))?;
    let mut report = initialize_attributes(catalog);
    if probs.len() != report.posteriors[i].len() {
        return Err(format!("`{}` has {} outcomes, found {}", kind.name(), report.posteriors[i].len(), probs.len()));
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(format!("`{}` probabilities must sum to 1", kind.name()));
    }
    report.posteriors[i] = probs.to_vec();
    Ok(report)
}

/// One posterior row per associated report set, each folded into the last.
pub fn classify_stream(
    reports: Vec<TimedReport>,
    model: &FusionModel,
    prior: ClassPosterior,
) -> Result<Vec<(u64, Vec<f64>)>, fusionkit_core::Error> {
    let mut posterior = prior;
    let mut rows = Vec::new();
    for set in associate_single_target(reports) {
        let declared = classify_reports(std::slice::from_ref(&set), model, &posterior)?;
        let Declaration::Probabilities(p) = declared.declaration else { unreachable!("fusion declares probabilities") };
        posterior = ClassPosterior { probabilities: p.clone(), step_index: posterior.step_index + 1 };
        rows.push((set.step, p));
    }
    Ok(rows)
}

/// Header `step,p_class<id>...`.
pub fn write_declarations(path: &Path, class_ids: &[u32], rows: &[(u64, Vec<f64>)]) -> Result<(), AppError> {
    let err = |e: csv::Error| AppError::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let mut header = vec!["step".to_string()];
    header.extend(class_ids.iter().map(|id| format!("p_class{id}")));
    w.write_record(&header).map_err(err)?;
    for (step, p) in rows {
        let mut record = vec![step.to_string()];
        record.extend(p.iter().map(f64::to_string));
        w.write_record(&record).map_err(err)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}
