//! GA runs over datasets, strategy studies, hyperparameter search and
//! report files.

mod report;
mod run;
mod search;
mod study;

pub use report::{
    emit_report, histogram, histogram_file, ranking_txt, runs_csv, summary_csv, timings_csv, trials_csv, write_runs,
    write_trials, HISTOGRAM_BINS,
};
pub use run::{run_seed, run_single, run_single_until, RunResult};
pub use search::{
    evaluate_trials, hyperparameter_search, ParamRange, SearchBounds, SearchOutcome, Stage, Trial, TrialOutcome,
    TrialSetup,
};
pub use study::{dispersion, mean, percentile, performance_metric, run_study, Dispersion, StudyOptions, StudyResult};
