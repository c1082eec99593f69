//! Configuration files and CSV output.
//!
//! All CSV files are UTF-8, comma separated, `\n` terminated, with a header row
//! and plain decimal numbers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::engine::TickReport;
use crate::error::Error;
use crate::experiments::{RunSummary, SensitivityCell, WelchComparison};
use crate::params::SimulationParams;

pub const TICKS_HEADER: [&str; 16] = [
    "run_id",
    "tick",
    "cohort_size",
    "n_budget_fail",
    "n_exam_fail",
    "n_deciders",
    "n_completers",
    "n_completers_firstgen",
    "n_completers_edufam",
    "completion_rate",
    "avg_loan_firstgen",
    "avg_loan_edufam",
    "pop_seniors",
    "share_educated",
    "n_deciders_firstgen",
    "n_deciders_edufam",
];

pub const SUMMARY_HEADER: [&str; 5] = ["scenario", "metric", "mean", "sd", "n"];
pub const SENSITIVITY_HEADER: [&str; 5] = ["parameter", "value", "metric", "mean", "sd"];
pub const WELCH_HEADER: [&str; 6] = ["scenario", "comparison", "unit", "t", "dof", "p"];

/// Reads a config file; missing keys take their defaults.
pub fn load_params(path: &Path) -> Result<SimulationParams, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::ReadConfig {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(SimulationParams::from_toml_str(&text)?)
}

/// Creates the output directory if needed.
pub fn ensure_out_dir(dir: &Path) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir).map_err(|source| Error::OutputDir {
        path: dir.to_path_buf(),
        source,
    })?;
    let probe = dir.join(".edusim-write-test");
    fs::write(&probe, b"").map_err(|source| Error::OutputDir {
        path: dir.to_path_buf(),
        source,
    })?;
    let _ = fs::remove_file(probe);
    Ok(dir.to_path_buf())
}

/// Writes the fully resolved configuration next to the results.
pub fn write_resolved_config(dir: &Path, params: &SimulationParams) -> Result<PathBuf, Error> {
    let path = dir.join("config.toml");
    fs::write(&path, params.to_toml_string())?;
    Ok(path)
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes `ticks.csv` rows for each `(run_id, reports)`.
pub fn write_ticks<'a, W, I>(out: W, runs: I) -> Result<(), Error>
where
    W: Write,
    I: IntoIterator<Item = (usize, &'a [TickReport])>,
{
    let mut w = writer(out);
    w.write_record(TICKS_HEADER)?;
    for (run_id, reports) in runs {
        for r in reports {
            w.write_record([
                run_id.to_string(),
                r.tick.to_string(),
                r.cohort_size.to_string(),
                r.n_budget_fail.to_string(),
                r.n_exam_fail.to_string(),
                r.n_deciders.to_string(),
                r.n_completers.to_string(),
                r.n_completers_firstgen.to_string(),
                r.n_completers_edufam.to_string(),
                num(r.completion_rate().unwrap_or(0.0)),
                num(r.avg_loan_firstgen),
                num(r.avg_loan_edufam),
                r.pop_seniors.to_string(),
                num(r.share_educated),
                r.n_deciders_firstgen.to_string(),
                r.n_deciders_edufam.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv`: one pooled row per metric plus one `<metric>.rep_mean`
/// row over per-replication means.
pub fn write_summary<'a, W, I>(out: W, summaries: I) -> Result<(), Error>
where
    W: Write,
    I: IntoIterator<Item = &'a RunSummary>,
{
    let mut w = writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        for m in &s.metrics {
            w.write_record([
                s.scenario.clone(),
                m.metric.name().to_string(),
                num(m.mean),
                num(m.sd),
                m.n.to_string(),
            ])?;
            w.write_record([
                s.scenario.clone(),
                format!("{}.rep_mean", m.metric.name()),
                num(m.rep_mean()),
                num(m.rep_sd()),
                m.rep_means.len().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sensitivity<W: Write>(out: W, cells: &[SensitivityCell]) -> Result<(), Error> {
    let mut w = writer(out);
    w.write_record(SENSITIVITY_HEADER)?;
    for c in cells {
        for m in &c.summary.metrics {
            w.write_record([
                c.parameter.clone(),
                num(c.value),
                m.metric.name().to_string(),
                num(m.mean),
                num(m.sd),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes Welch test results as `(scenario, comparison)` rows.
pub fn write_welch<'a, W, I>(out: W, rows: I) -> Result<(), Error>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a WelchComparison)>,
{
    let mut w = writer(out);
    w.write_record(WELCH_HEADER)?;
    for (scenario, c) in rows {
        w.write_record([
            scenario.to_string(),
            c.label.clone(),
            c.unit.name().to_string(),
            num(c.result.t),
            num(c.result.dof),
            num(c.result.p),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_file<F>(dir: &Path, name: &str, body: F) -> Result<PathBuf, Error>
where
    F: FnOnce(fs::File) -> Result<(), Error>,
{
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|source| Error::OutputDir {
        path: dir.to_path_buf(),
        source,
    })?;
    body(file)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;

    #[test]
    fn ticks_csv_has_header_and_one_row_per_tick() {
        let mut p = SimulationParams::default();
        p.population.n_seniors_init = 200;
        p.engine.ticks = 7;
        let a = engine::run(&p, 1).unwrap();
        let b = engine::run(&p, 2).unwrap();
        let mut buf = Vec::new();
        write_ticks(&mut buf, [(0, a.as_slice()), (1, b.as_slice())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 14);
        assert_eq!(lines[0], TICKS_HEADER.join(","));
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert!(lines[1].starts_with("0,1,"));
        assert!(lines[14].starts_with("1,7,"));
    }

    #[test]
    fn numbers_are_plain_decimals() {
        assert_eq!(num(1234567.5), "1234567.5");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(0.000123), "0.000123");
    }

    #[test]
    fn missing_config_is_a_config_error() {
        let err = load_params(Path::new("/definitely/not/here.toml")).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn resolved_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = SimulationParams::default();
        p.decision.omega_econ = 0.5;
        p.economics.annual_interest = 0.031;
        let path = write_resolved_config(dir.path(), &p).unwrap();
        assert_eq!(load_params(&path).unwrap(), p);
    }
}
