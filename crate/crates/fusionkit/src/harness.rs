//! Parallel Monte Carlo over independent run seeds.

use fusionkit_core::classification::ClassDefinition;
use fusionkit_core::simulation::{run_once, run_seed, summarize, McSummary, RunResult, Scenario};
use rayon::prelude::*;

use crate::error::AppError;

pub const THREADS_ENV: &str = "FUSIONKIT_THREADS";

/// Worker count: `FUSIONKIT_THREADS` if set, otherwise the available cores.
pub fn worker_threads(env: Option<&str>) -> Result<usize, AppError> {
    match env {
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(AppError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs `runs` seeds on `threads` workers. Results are gathered in run-index
/// order before summing, so the summary does not depend on scheduling.
pub fn run_parallel(
    scenario: &Scenario,
    classes: &[ClassDefinition],
    runs: usize,
    base_seed: u64,
    threads: usize,
) -> Result<McSummary, AppError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| AppError::Usage(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<_> = pool
        .install(|| (0..runs).into_par_iter().map(|i| run_once(scenario, classes, run_seed(base_seed, i))).collect());
    let label = scenario.features.to_string();
    let results = outcomes
        .into_iter()
        .collect::<Result<Vec<RunResult>, _>>()
        .map_err(|e| AppError::core(format!("subset {label}"), e))?;
    summarize(scenario, classes, &results).map_err(|e| AppError::core(format!("subset {label}"), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fusionkit_core::simulation::run_monte_carlo;

    #[test]
    fn thread_count_does_not_change_the_summary() {
        let s = Scenario { steps: 30, ..Scenario::default() };
        let c = ClassDefinition::maritime_classes();
        let seq = run_monte_carlo(&s, &c, 17, 5).unwrap();
        for t in [1, 3, 8] {
            assert_eq!(run_parallel(&s, &c, 17, 5, t).unwrap(), seq);
        }
    }

    #[test]
    fn thread_env() {
        assert_eq!(worker_threads(Some("4")).unwrap(), 4);
        assert!(worker_threads(Some("0")).is_err());
        assert!(worker_threads(Some("x")).is_err());
        assert!(worker_threads(None).unwrap() >= 1);
    }
}
