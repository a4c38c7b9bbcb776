//! Parallel gallery execution with deterministic output.
//!
//! Experiments are independent, so they run on a rayon pool sized by
//! `--jobs`. Determinism comes from keeping the parallelism outside the
//! experiments: each one computes its report alone, and the results are
//! collected back in request order, so the merged document is the same
//! whatever the job count. Timings are measured per experiment and only
//! surface when explicitly requested.

use std::time::Instant;

use filterlab_core::gallery::{run_experiment, GalleryParams, Report, ReportStatus};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("experiment `{name}` failed: {detail}")]
    Experiment { name: String, detail: String },
    #[error("worker pool: {detail}")]
    Pool { detail: String },
}

/// Reports in request order plus per-experiment wall times.
#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<Report>,
    pub timings_ms: Vec<(String, u64)>,
}

/// Run the named experiments, each with its own parameter block, on at most
/// `jobs` workers (`None` lets the pool pick). Order of `requests` is the
/// order of the returned reports.
pub fn run_gallery(
    requests: &[(String, GalleryParams)],
    jobs: Option<usize>,
) -> Result<RunOutcome, RunnerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| RunnerError::Pool { detail: e.to_string() })?;
    let results: Result<Vec<(Report, u64)>, RunnerError> = pool.install(|| {
        requests
            .par_iter()
            .map(|(name, params)| {
                let start = Instant::now();
                let report = run_experiment(name, params).map_err(|e| {
                    RunnerError::Experiment { name: name.clone(), detail: e.to_string() }
                })?;
                Ok((report, start.elapsed().as_millis() as u64))
            })
            .collect()
    });
    let mut reports = Vec::with_capacity(requests.len());
    let mut timings_ms = Vec::with_capacity(requests.len());
    for (report, ms) in results? {
        timings_ms.push((report.name.clone(), ms));
        reports.push(report);
    }
    Ok(RunOutcome { reports, timings_ms })
}

/// The CLI exit code for a batch of report statuses: 0 when everything
/// passed, 2 when anything failed, 3 when the only non-passes were
/// inconclusive.
pub fn exit_code_for_statuses(statuses: impl IntoIterator<Item = ReportStatus>) -> i32 {
    let mut inconclusive = false;
    for status in statuses {
        match status {
            ReportStatus::Fail => return 2,
            ReportStatus::Inconclusive => inconclusive = true,
            ReportStatus::Pass => {}
        }
    }
    if inconclusive {
        3
    } else {
        0
    }
}

/// The same three-way mapping for a single verdict outcome.
pub fn exit_code_for_outcome(outcome: filterlab_core::verdict::Outcome) -> i32 {
    use filterlab_core::verdict::Outcome;
    match outcome {
        Outcome::Holds => 0,
        Outcome::Fails => 2,
        Outcome::Inconclusive => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use filterlab_core::verdict::Outcome;

    fn quick_params() -> GalleryParams {
        GalleryParams { horizon: Some(400_000), cases: Some(2), ..GalleryParams::default() }
    }

    #[test]
    fn job_count_does_not_change_the_merged_reports() {
        let requests: Vec<(String, GalleryParams)> = ["sparse-product", "cesaro-lemma", "dual-pointwise"]
            .iter()
            .map(|n| (n.to_string(), quick_params()))
            .collect();
        let serial = run_gallery(&requests, Some(1)).expect("experiments run");
        let parallel = run_gallery(&requests, Some(4)).expect("experiments run");
        assert_eq!(
            serial.reports, parallel.reports,
            "reports must be identical and in request order regardless of the pool size"
        );
        let names: Vec<&str> = serial.reports.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, vec!["sparse-product", "cesaro-lemma", "dual-pointwise"]);
    }

    #[test]
    fn unknown_experiment_surfaces_as_a_runner_error() {
        let requests = vec![("no-such".to_string(), quick_params())];
        let err = run_gallery(&requests, Some(1)).expect_err("dispatch must fail");
        assert!(err.to_string().contains("no-such"), "the error names the experiment: {err}");
    }

    #[test]
    fn exit_codes_follow_the_three_way_contract() {
        use ReportStatus::*;
        assert_eq!(exit_code_for_statuses([Pass, Pass]), 0);
        assert_eq!(exit_code_for_statuses([Pass, Fail, Inconclusive]), 2);
        assert_eq!(exit_code_for_statuses([Pass, Inconclusive]), 3);
        assert_eq!(exit_code_for_statuses([]), 0);
        assert_eq!(exit_code_for_outcome(Outcome::Holds), 0);
        assert_eq!(exit_code_for_outcome(Outcome::Fails), 2);
        assert_eq!(exit_code_for_outcome(Outcome::Inconclusive), 3);
    }
}
