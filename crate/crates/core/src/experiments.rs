//! Monte Carlo replication, scenario presets, one-at-a-time sensitivity sweeps
//! and aggregation of tick reports into run summaries.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{self, TickReport};
use crate::error::ConfigError;
use crate::params::{parse_override, SimulationParams};
use crate::stats::{self, WelchResult};

/// A named set of parameter overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub overrides: Vec<(String, String)>,
}

impl ScenarioSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            overrides: Vec::new(),
        }
    }

    pub fn with(mut self, path: &str, value: &str) -> Self {
        self.overrides.push((path.to_string(), value.to_string()));
        self
    }

    pub fn baseline() -> Self {
        Self::new("baseline")
    }

    /// No supplementary (income-tested) grant.
    pub fn scenario1() -> Self {
        Self::new("scenario1").with("economics.suppl_enabled", "false")
    }

    /// No basic grant for anyone.
    pub fn scenario2() -> Self {
        Self::new("scenario2").with("economics.basic_enabled", "false")
    }

    /// No perceived wage premium.
    pub fn scenario3() -> Self {
        Self::new("scenario3").with("economics.premium_neutralized", "true")
    }

    pub fn presets() -> Vec<Self> {
        vec![
            Self::baseline(),
            Self::scenario1(),
            Self::scenario2(),
            Self::scenario3(),
        ]
    }

    /// Looks up a preset by `baseline`, `0`-`3`, or `scenario1`-`scenario3`.
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "baseline" | "base" | "0" => Ok(Self::baseline()),
            "1" | "scenario1" => Ok(Self::scenario1()),
            "2" | "scenario2" => Ok(Self::scenario2()),
            "3" | "scenario3" => Ok(Self::scenario3()),
            _ => Err(ConfigError::UnknownScenario(name.to_string())),
        }
    }

    /// Parses `name[:path=value[;path=value...]]`, e.g. `custom:decision.kappa=2`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let Some((name, rest)) = text.split_once(':') else {
            return Self::preset(text);
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(ConfigError::UnknownScenario(text.to_string()));
        }
        let mut spec = Self::preset(name).unwrap_or_else(|_| Self::new(name));
        for item in rest.split(';').filter(|s| !s.trim().is_empty()) {
            let (path, value) = parse_override(item)?;
            spec.overrides.push((path, value));
        }
        Ok(spec)
    }

    pub fn apply(&self, base: &SimulationParams) -> Result<SimulationParams, ConfigError> {
        let mut params = base.clone();
        for (path, value) in &self.overrides {
            params.set_path(path, value)?;
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Metric {
    CompletionRate,
    CompletionRateEdufam,
    CompletionRateFirstgen,
    LoanEdufam,
    LoanFirstgen,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::CompletionRate,
        Metric::CompletionRateEdufam,
        Metric::CompletionRateFirstgen,
        Metric::LoanEdufam,
        Metric::LoanFirstgen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::CompletionRate => "completion_rate",
            Metric::CompletionRateEdufam => "completion_rate_edufam",
            Metric::CompletionRateFirstgen => "completion_rate_firstgen",
            Metric::LoanEdufam => "loan_edufam",
            Metric::LoanFirstgen => "loan_firstgen",
        }
    }

    /// Value for one tick; `None` when the tick has no observations for it.
    pub fn extract(self, r: &TickReport) -> Option<f64> {
        match self {
            Metric::CompletionRate => r.completion_rate(),
            Metric::CompletionRateEdufam => r.completion_rate_edufam(),
            Metric::CompletionRateFirstgen => r.completion_rate_firstgen(),
            Metric::LoanEdufam => r.loan_edufam(),
            Metric::LoanFirstgen => r.loan_firstgen(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: Metric,
    /// Mean and sd over all tick-level values pooled across ticks and replications.
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
    /// One mean per replication (replications without observations are skipped).
    pub rep_means: Vec<f64>,
}

impl MetricSummary {
    pub fn rep_mean(&self) -> f64 {
        stats::mean(&self.rep_means)
    }

    pub fn rep_sd(&self) -> f64 {
        stats::std_dev(&self.rep_means)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestUnit {
    /// Samples are per-replication means.
    Replication,
    /// Samples are pooled tick-level values.
    Tick,
}

impl TestUnit {
    pub fn name(self) -> &'static str {
        match self {
            TestUnit::Replication => "replication",
            TestUnit::Tick => "tick",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelchComparison {
    pub label: String,
    pub unit: TestUnit,
    pub result: WelchResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub n_reps: usize,
    pub burn_in: u32,
    pub metrics: Vec<MetricSummary>,
    pub comparisons: Vec<WelchComparison>,
    /// Pooled tick values per metric, kept for cross-scenario tests.
    #[serde(skip)]
    pooled: Vec<(Metric, Vec<f64>)>,
}

impl RunSummary {
    pub fn metric(&self, metric: Metric) -> &MetricSummary {
        self.metrics
            .iter()
            .find(|m| m.metric == metric)
            .expect("every metric is summarized")
    }

    pub fn pooled(&self, metric: Metric) -> &[f64] {
        self.pooled
            .iter()
            .find(|(m, _)| *m == metric)
            .map(|(_, v)| v.as_slice())
            .unwrap_or(&[])
    }
}

fn sorted_mean_sd(values: &mut [f64]) -> (f64, f64) {
    // summing in sorted order makes the result independent of replication order
    values.sort_by(f64::total_cmp);
    (stats::mean(values), stats::std_dev(values))
}

fn welch_pair(label: &str, unit: TestUnit, a: &[f64], b: &[f64]) -> Option<WelchComparison> {
    stats::welch_t(a, b).map(|result| WelchComparison {
        label: label.to_string(),
        unit,
        result,
    })
}

/// Summarizes the tick reports of several replications, ignoring ticks up to `burn_in`.
pub fn summarize(scenario: &str, runs: &[Vec<TickReport>], burn_in: u32) -> RunSummary {
    let mut metrics = Vec::with_capacity(Metric::ALL.len());
    let mut pooled = Vec::with_capacity(Metric::ALL.len());
    for metric in Metric::ALL {
        let mut all = Vec::new();
        let mut rep_means = Vec::with_capacity(runs.len());
        for run in runs {
            let mut values: Vec<f64> = run
                .iter()
                .filter(|r| r.tick > burn_in)
                .filter_map(|r| metric.extract(r))
                .collect();
            if values.is_empty() {
                continue;
            }
            rep_means.push(sorted_mean_sd(&mut values).0);
            all.extend(values);
        }
        let (mean, sd) = sorted_mean_sd(&mut all);
        metrics.push(MetricSummary {
            metric,
            mean,
            sd,
            n: all.len(),
            rep_means,
        });
        pooled.push((metric, all));
    }

    let mut summary = RunSummary {
        scenario: scenario.to_string(),
        n_reps: runs.len(),
        burn_in,
        metrics,
        comparisons: Vec::new(),
        pooled,
    };
    let pairs = [
        (
            "completion_rate_edufam_vs_firstgen",
            Metric::CompletionRateEdufam,
            Metric::CompletionRateFirstgen,
        ),
        (
            "loan_edufam_vs_firstgen",
            Metric::LoanEdufam,
            Metric::LoanFirstgen,
        ),
    ];
    for (label, a, b) in pairs {
        let c = welch_pair(
            label,
            TestUnit::Replication,
            &summary.metric(a).rep_means,
            &summary.metric(b).rep_means,
        );
        let d = welch_pair(label, TestUnit::Tick, summary.pooled(a), summary.pooled(b));
        summary.comparisons.extend(c.into_iter().chain(d));
    }
    summary
}

/// Welch tests of one metric between two scenarios, at both test units.
pub fn compare(base: &RunSummary, other: &RunSummary, metric: Metric) -> Vec<WelchComparison> {
    let label = format!("{}_{}_vs_{}", metric.name(), other.scenario, base.scenario);
    let a = welch_pair(
        &label,
        TestUnit::Replication,
        &other.metric(metric).rep_means,
        &base.metric(metric).rep_means,
    );
    let b = welch_pair(
        &label,
        TestUnit::Tick,
        other.pooled(metric),
        base.pooled(metric),
    );
    a.into_iter().chain(b).collect()
}

#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    pub summary: RunSummary,
    pub params: SimulationParams,
    /// Tick reports per replication, in seed order.
    pub runs: Vec<Vec<TickReport>>,
}

/// Runs `n_reps` replications with seeds `base_seed + i` (in parallel) and summarizes them.
pub fn monte_carlo(
    params: &SimulationParams,
    scenario: &ScenarioSpec,
    n_reps: usize,
    base_seed: u64,
    burn_in: u32,
) -> Result<MonteCarloResult, ConfigError> {
    if n_reps == 0 {
        return Err(ConfigError::Invalid {
            field: "experiments.reps".to_string(),
            reason: "at least one replication is required".to_string(),
        });
    }
    let params = scenario.apply(params)?;
    params.validate()?;
    let runs = (0..n_reps as u64)
        .into_par_iter()
        .map(|i| engine::run(&params, base_seed.wrapping_add(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(&scenario.name, &runs, burn_in);
    Ok(MonteCarloResult {
        summary,
        params,
        runs,
    })
}

/// Parameters swept in the one-at-a-time analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    StepsFromParent,
    Universities,
    Weight,
    SocialReach,
    Segregation,
    Kappa,
    BirthRate,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 7] = [
        SweepParameter::StepsFromParent,
        SweepParameter::Universities,
        SweepParameter::Weight,
        SweepParameter::SocialReach,
        SweepParameter::Segregation,
        SweepParameter::Kappa,
        SweepParameter::BirthRate,
    ];

    pub fn path(self) -> &'static str {
        match self {
            SweepParameter::StepsFromParent => "population.steps_from_parent",
            SweepParameter::Universities => "population.n_universities",
            SweepParameter::Weight => "decision.omega_econ",
            SweepParameter::SocialReach => "network.senior_reach_mean",
            SweepParameter::Segregation => "population.segregation",
            SweepParameter::Kappa => "decision.kappa",
            SweepParameter::BirthRate => "population.birth_rate",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::StepsFromParent => "steps_from_parent",
            SweepParameter::Universities => "n_universities",
            SweepParameter::Weight => "omega_econ",
            SweepParameter::SocialReach => "senior_reach_mean",
            SweepParameter::Segregation => "segregation",
            SweepParameter::Kappa => "kappa",
            SweepParameter::BirthRate => "birth_rate",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParameter::StepsFromParent => vec![3.0, 10.0, 15.0],
            SweepParameter::Universities => vec![5.0, 11.0, 25.0],
            SweepParameter::Weight => vec![0.25, 0.5, 0.75, 1.0],
            SweepParameter::SocialReach => vec![1.0, 4.0, 10.0],
            SweepParameter::Segregation => vec![0.25, 0.5, 0.75],
            SweepParameter::Kappa => vec![0.5, 1.0, 1.8, 2.0],
            SweepParameter::BirthRate => vec![0.25, 0.5, 0.75],
        }
    }

    /// Accepts the short name or the dotted parameter path.
    pub fn from_name(name: &str) -> Option<Self> {
        let name = name.trim();
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name || p.path() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub label: String,
    pub path: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// A sweep over a known parameter name or any dotted parameter path.
    pub fn new(parameter: &str, values: Vec<f64>) -> Self {
        match SweepParameter::from_name(parameter) {
            Some(p) => Self {
                label: p.name().to_string(),
                path: p.path().to_string(),
                values,
            },
            None => Self {
                label: parameter.trim().to_string(),
                path: parameter.trim().to_string(),
                values,
            },
        }
    }

    pub fn defaults() -> Vec<Self> {
        SweepParameter::ALL
            .into_iter()
            .map(|p| Self::new(p.name(), p.default_values()))
            .collect()
    }

    /// Checks every value can be applied to `base`.
    pub fn validate(&self, base: &SimulationParams) -> Result<(), ConfigError> {
        for v in &self.values {
            let mut p = base.clone();
            p.set_path(&self.path, &format_value(*v))?;
        }
        Ok(())
    }
}

/// Formats a sweep value so integer fields accept whole numbers.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Parses a comma-separated list of numbers.
pub fn parse_values(text: &str) -> Result<Vec<f64>, ConfigError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(ConfigError::BadValueList(text.to_string())),
    }
}

#[derive(Debug, Clone)]
pub struct SensitivityCell {
    pub parameter: String,
    pub value: f64,
    pub summary: RunSummary,
}

/// Varies each swept parameter alone, all others held at `base`.
pub fn oat_sensitivity(
    base: &SimulationParams,
    sweeps: &[SweepSpec],
    n_reps: usize,
    seed: u64,
    burn_in: u32,
) -> Result<Vec<SensitivityCell>, ConfigError> {
    for sweep in sweeps {
        sweep.validate(base)?;
    }
    let mut cells = Vec::new();
    for sweep in sweeps {
        for &value in &sweep.values {
            let scenario = ScenarioSpec::new(format!("{}={}", sweep.label, format_value(value)))
                .with(&sweep.path, &format_value(value));
            let result = monte_carlo(base, &scenario, n_reps, seed, burn_in)?;
            cells.push(SensitivityCell {
                parameter: sweep.label.clone(),
                value,
                summary: result.summary,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimulationParams {
        let mut p = SimulationParams::default();
        p.population.n_seniors_init = 400;
        p.population.carrying_capacity = 500;
        p.engine.ticks = 15;
        p
    }

    #[test]
    fn presets_change_one_lever_each() {
        let base = SimulationParams::default();
        let b = ScenarioSpec::baseline().apply(&base).unwrap();
        assert_eq!(b, base);
        let s1 = ScenarioSpec::scenario1().apply(&base).unwrap();
        let s2 = ScenarioSpec::scenario2().apply(&base).unwrap();
        let s3 = ScenarioSpec::scenario3().apply(&base).unwrap();
        let mut expect = base.clone();
        expect.economics.suppl_enabled = false;
        assert_eq!(s1, expect);
        let mut expect = base.clone();
        expect.economics.basic_enabled = false;
        assert_eq!(s2, expect);
        let mut expect = base.clone();
        expect.economics.premium_neutralized = true;
        assert_eq!(s3, expect);
    }

    #[test]
    fn preset_names() {
        assert_eq!(ScenarioSpec::preset("3").unwrap().name, "scenario3");
        assert_eq!(ScenarioSpec::preset("Baseline").unwrap().name, "baseline");
        assert!(ScenarioSpec::preset("4").is_err());
        let custom =
            ScenarioSpec::parse("steep:decision.kappa=2;population.segregation=0.9").unwrap();
        assert_eq!(custom.name, "steep");
        assert_eq!(custom.overrides.len(), 2);
        let p = custom.apply(&SimulationParams::default()).unwrap();
        assert_eq!(p.decision.kappa, 2.0);
        assert!(ScenarioSpec::parse(":x=1").is_err());
    }

    #[test]
    fn values_lists() {
        assert_eq!(parse_values("0.25, 0.5,1").unwrap(), vec![0.25, 0.5, 1.0]);
        assert!(parse_values("").is_err());
        assert!(parse_values("1,,2").is_err());
        assert!(parse_values("1,inf").is_err());
    }

    #[test]
    fn sweep_names_resolve_to_paths() {
        assert_eq!(SweepSpec::new("kappa", vec![1.0]).path, "decision.kappa");
        assert_eq!(SweepSpec::new("decision.kappa", vec![1.0]).label, "kappa");
        assert_eq!(
            SweepSpec::new("economics.loan_cap", vec![1.0]).label,
            "economics.loan_cap"
        );
        assert_eq!(SweepSpec::defaults().len(), 7);
        let bad = SweepSpec::new("population.n_universities", vec![2.5]);
        assert!(bad.validate(&SimulationParams::default()).is_err());
    }

    #[test]
    fn zero_reps_rejected() {
        assert!(monte_carlo(&small(), &ScenarioSpec::baseline(), 0, 0, 0).is_err());
    }

    #[test]
    fn single_rep_has_zero_replication_sd() {
        let r = monte_carlo(&small(), &ScenarioSpec::baseline(), 1, 3, 0).unwrap();
        assert_eq!(r.summary.n_reps, 1);
        for m in &r.summary.metrics {
            assert_eq!(m.rep_sd(), 0.0);
            assert!(m.sd >= 0.0);
        }
    }

    #[test]
    fn same_seed_same_summary() {
        let a = monte_carlo(&small(), &ScenarioSpec::baseline(), 3, 11, 0).unwrap();
        let b = monte_carlo(&small(), &ScenarioSpec::baseline(), 3, 11, 0).unwrap();
        assert_eq!(a.summary, b.summary);
    }

    #[test]
    fn aggregation_ignores_replication_order() {
        let r = monte_carlo(&small(), &ScenarioSpec::baseline(), 4, 1, 0).unwrap();
        let mut reversed = r.runs.clone();
        reversed.reverse();
        let a = summarize("x", &r.runs, 0);
        let b = summarize("x", &reversed, 0);
        for (ma, mb) in a.metrics.iter().zip(&b.metrics) {
            assert_eq!(ma.mean, mb.mean);
            assert_eq!(ma.sd, mb.sd);
            assert_eq!(ma.n, mb.n);
        }
    }

    #[test]
    fn burn_in_drops_early_ticks() {
        let r = monte_carlo(&small(), &ScenarioSpec::baseline(), 2, 1, 0).unwrap();
        let all = summarize("x", &r.runs, 0);
        let late = summarize("x", &r.runs, 10);
        assert!(late.metric(Metric::CompletionRate).n < all.metric(Metric::CompletionRate).n);
    }

    #[test]
    fn empty_sweep_list_gives_empty_table() {
        assert!(oat_sensitivity(&small(), &[], 2, 0, 0).unwrap().is_empty());
    }
}
