use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::RunResult;
use super::search::{Trial, TrialOutcome};
use super::study::StudyResult;
use crate::error::{Error, Result};
use crate::eval::EvalMode;

pub const HISTOGRAM_BINS: usize = 10;

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Per-run finals and best-fitness series, one row per run. Contains no
/// timing data, so identical runs give identical bytes.
pub fn runs_csv(runs: &[RunResult]) -> String {
    let mut out = String::from(
        "strategies,target_id,seed,final_fidelity,final_composite,final_depth,final_t_count,generations,best_fitness_series\n",
    );
    for r in runs {
        let series: Vec<String> = r.best_fitness_per_generation.iter().map(f64::to_string).collect();
        let f = &r.final_best;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.strategies.label(),
            r.target_id,
            r.seed,
            f.fidelity,
            f.composite,
            f.depth,
            f.t_count,
            r.generations(),
            series.join(";")
        );
    }
    out
}

/// Chosen evaluation mode, auto-selection measurements and wall time.
pub fn timings_csv(runs: &[RunResult]) -> String {
    let mut out =
        String::from("strategies,target_id,seed,eval_mode,serial_batch_us,serial_single_us,parallel_us,wall_ms\n");
    for r in runs {
        let timing = |mode: EvalMode| {
            r.eval_timings
                .iter()
                .find(|t| t.0 == mode)
                .map_or(String::new(), |t| t.1.as_micros().to_string())
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.strategies.label(),
            r.target_id,
            r.seed,
            r.eval_mode,
            timing(EvalMode::SerialBatch),
            timing(EvalMode::SerialSingle),
            timing(EvalMode::ParallelBatch),
            r.wall_time.as_millis()
        );
    }
    out
}

pub fn summary_csv(studies: &[StudyResult]) -> String {
    let mut out = String::from("strategies,runs,mean,median,p25,p75,stddev\n");
    for s in studies {
        let d = &s.dispersion;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.label(),
            s.runs.len(),
            s.performance,
            d.median,
            d.p25,
            d.p75,
            d.stddev
        );
    }
    out
}

pub fn ranking_txt(studies: &[StudyResult]) -> String {
    let width = studies.iter().map(|s| s.label().len()).max().unwrap_or(0);
    let mut out = String::new();
    for (i, s) in studies.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>2}. {:<width$}  mean {:.4}  median {:.4}  p25 {:.4}  p75 {:.4}",
            i + 1,
            s.label(),
            s.performance,
            s.dispersion.median,
            s.dispersion.p25,
            s.dispersion.p75
        );
    }
    out
}

/// Histogram of final composites over `[lo, hi]` in equal bins; the last
/// bin is closed. Returns `(bin_lo, bin_hi, count)` rows.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64, usize)> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0; bins];
    for &v in values {
        let bin = if width > 0.0 {
            (((v - lo) / width).floor() as usize).min(bins - 1)
        } else {
            0
        };
        counts[bin] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            (
                lo + width * i as f64,
                if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
                c,
            )
        })
        .collect()
}

pub fn histogram_csv(rows: &[(f64, f64, usize)]) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (lo, hi, c) in rows {
        let _ = writeln!(out, "{lo},{hi},{c}");
    }
    out
}

/// File name of a strategy set's histogram, e.g. `hist_delete+swap.csv`.
pub fn histogram_file(label: &str) -> String {
    format!("hist_{label}.csv")
}

pub fn trials_csv(trials: &[Trial]) -> String {
    let keys: Vec<&str> = trials
        .first()
        .map(|t| t.params.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();
    let mut out = format!("trial,{},score,status,wall_ms\n", keys.join(","));
    for t in trials {
        let values: Vec<String> = t.params.iter().map(|(_, v)| v.to_string()).collect();
        let (score, status) = match &t.outcome {
            TrialOutcome::Scored(s) => (s.to_string(), "ok".to_owned()),
            TrialOutcome::Failed(msg) => (String::new(), format!("\"failed: {}\"", msg.replace('"', "'"))),
        };
        let _ = writeln!(
            out,
            "{},{},{score},{status},{}",
            t.id,
            values.join(","),
            t.wall_time.as_millis()
        );
    }
    out
}

/// Writes `runs.csv` and `timings.csv` into `out_dir`.
pub fn write_runs(runs: &[RunResult], out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write(&out_dir.join("runs.csv"), &runs_csv(runs))?;
    write(&out_dir.join("timings.csv"), &timings_csv(runs))
}

/// Writes `summary.csv`, `runs.csv`, `timings.csv`, one histogram per
/// strategy set on shared bin edges, and `ranking.txt`.
pub fn emit_report(studies: &[StudyResult], out_dir: &Path) -> Result<()> {
    if studies.is_empty() {
        return Err(Error::EmptyStudy);
    }
    let runs: Vec<RunResult> = studies.iter().flat_map(|s| s.runs.iter().cloned()).collect();
    write_runs(&runs, out_dir)?;
    write(&out_dir.join("summary.csv"), &summary_csv(studies))?;
    write(&out_dir.join("ranking.txt"), &ranking_txt(studies))?;

    let finals = |s: &StudyResult| s.runs.iter().map(|r| r.final_best.composite).collect::<Vec<_>>();
    let all: Vec<f64> = studies.iter().flat_map(finals).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for s in studies {
        let rows = histogram(&finals(s), lo, hi, HISTOGRAM_BINS);
        write(&out_dir.join(histogram_file(&s.label())), &histogram_csv(&rows))?;
    }
    Ok(())
}

pub fn write_trials(trials: &[Trial], out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write(&out_dir.join("trials.csv"), &trials_csv(trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::experiment::study::tests::fake_run;
    use qevo_core::StrategySet;
    use std::time::Duration;

    #[test]
    fn histogram_conserves_counts() {
        let values = [0.1, 0.2, 0.2, 0.35, 0.9, 1.0, 0.55];
        let rows = histogram(&values, 0.1, 1.0, 10);
        assert_eq!(rows.len(), 10);
        assert_eq!(rows.iter().map(|r| r.2).sum::<usize>(), values.len());
        assert_eq!(rows[0].0, 0.1);
        assert_eq!(rows[9].1, 1.0);
        assert_eq!(rows[9].2, 1);
        let flat = histogram(&[0.5, 0.5], 0.5, 0.5, 10);
        assert_eq!(flat[0].2, 2);
    }

    #[test]
    fn runs_csv_format() {
        let mut r = fake_run("q4-s1-0000", 3, 0.5);
        r.best_fitness_per_generation = vec![0.25, 0.5];
        let csv = runs_csv(&[r]);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "delete+swap,q4-s1-0000,3,1,0.5,0,0,1,0.25;0.5"
        );
    }

    #[test]
    fn report_files_are_stable() {
        let set = |b| StrategySet::from_bits(b).unwrap();
        let studies: Vec<StudyResult> = [(10u8, 0.5), (1, 0.25)]
            .into_iter()
            .map(|(bits, v)| {
                let runs = vec![fake_run("a", 1, v), fake_run("b", 1, v + 0.125)];
                StudyResult::from_runs(set(bits), Config::default(), runs).unwrap()
            })
            .collect();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        emit_report(&studies, a.path()).unwrap();
        emit_report(&studies, b.path()).unwrap();
        for f in [
            "summary.csv",
            "runs.csv",
            "ranking.txt",
            "hist_delete+swap.csv",
            "hist_change.csv",
        ] {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap(),
                "{f}"
            );
        }
        let summary = fs::read_to_string(a.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 3);
        assert!(summary.lines().nth(1).unwrap().starts_with("delete+swap,2,0.5625,"));
        let hist = fs::read_to_string(a.path().join("hist_change.csv")).unwrap();
        let total: usize = hist
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn trial_log_rows() {
        let trials = vec![
            Trial {
                id: 0,
                params: vec![("evolutionary.mutation_rate".into(), toml::Value::Float(0.5))],
                outcome: TrialOutcome::Scored(0.25),
                wall_time: Duration::from_millis(7),
            },
            Trial {
                id: 1,
                params: vec![("evolutionary.mutation_rate".into(), toml::Value::Float(0.75))],
                outcome: TrialOutcome::Failed("bad \"x\"".into()),
                wall_time: Duration::from_millis(1),
            },
        ];
        let csv = trials_csv(&trials);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "trial,evolutionary.mutation_rate,score,status,wall_ms");
        assert_eq!(lines[1], "0,0.5,0.25,ok,7");
        assert_eq!(lines[2], "1,0.75,,\"failed: bad 'x'\",1");
    }
}
