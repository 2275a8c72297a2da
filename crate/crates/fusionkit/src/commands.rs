//! Subcommand bodies, independent of argument parsing.

use std::path::{Path, PathBuf};

use fusionkit_core::classification::{length_catalog, ClassPosterior, FusionModel};
use fusionkit_core::evidence::{combine_dempster, parse_mass_text, MassFunction};
use fusionkit_core::simulation::McSummary;

use crate::config::{Config, Overrides};
use crate::error::AppError;
use crate::{harness, output, reports};

pub fn load_config(path: Option<&Path>) -> Result<Config, AppError> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default_config()),
    }
}

/// Runs every configured subset and writes the outputs.
pub fn simulate(config: &Config, threads: usize) -> Result<Vec<McSummary>, AppError> {
    let classes = config.classes();
    let base = config.scenario();
    let summaries = config
        .feature_subsets()
        .into_iter()
        .map(|f| {
            harness::run_parallel(
                &base.with_features(f),
                &classes,
                config.experiment.runs,
                config.experiment.seed,
                threads,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    output::write_all(&config.experiment.out, &summaries, config.experiment.seed)?;
    Ok(summaries)
}

pub fn simulate_with(
    path: Option<&Path>,
    overrides: &Overrides,
    threads: usize,
) -> Result<(Config, Vec<McSummary>), AppError> {
    let mut config = load_config(path)?;
    config.apply(overrides)?;
    let summaries = simulate(&config, threads)?;
    Ok((config, summaries))
}

fn read_mass(path: &Path) -> Result<MassFunction, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_mass_text(&text).map_err(|e| AppError::core(path.display().to_string(), e))
}

/// `m1 ⊕ m2` printed as focal lines followed by `K <conflict>`. The second
/// file may list the frame in another order.
pub fn evidence(first: &Path, second: &Path) -> Result<String, AppError> {
    let m1 = read_mass(first)?;
    let m2 = read_mass(second)?;
    let m2 = if m2.frame() == m1.frame() {
        m2
    } else {
        m2.reframe(m1.frame()).map_err(|e| AppError::core(second.display().to_string(), e))?
    };
    let c = combine_dempster(&m1, &m2).map_err(|e| AppError::core("combination", e))?;
    Ok(format!("{}K {}\n", c.mass, c.conflict))
}

/// Fuses `reports` into `<out>/declarations.csv`.
pub fn classify(reports_path: &Path, config: &Config, out: &Path) -> Result<PathBuf, AppError> {
    let classes = config.classes();
    let catalog = length_catalog(&classes, config.scenario.length_sigma).map_err(|e| AppError::core("config", e))?;
    let model = FusionModel::new(classes.clone(), catalog).map_err(|e| AppError::core("config", e))?;
    let prior = match &config.scenario.prior {
        Some(p) => ClassPosterior::new(p.clone()).map_err(|e| AppError::core("config", e))?,
        None => ClassPosterior::uniform(classes.len()),
    };
    let timed = reports::read_reports(reports_path, &model)?;
    let rows = reports::classify_stream(timed, &model, prior)
        .map_err(|e| AppError::core(reports_path.display().to_string(), e))?;
    std::fs::create_dir_all(out).map_err(|e| AppError::io(out, e))?;
    let path = out.join(reports::DECLARATIONS_FILE);
    let ids: Vec<u32> = classes.iter().map(|c| c.class_id).collect();
    reports::write_declarations(&path, &ids, &rows)?;
    Ok(path)
}
