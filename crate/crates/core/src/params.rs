//! Simulation parameters.
//!
//! `SimulationParams` is the single source of configuration. It is grouped in
//! the same sections as the config file (`[population]`, `[network]`,
//! `[economics]`, `[decision]`, `[engine]`, `[experiments]`); every field can be
//! addressed by a dotted path such as `decision.kappa` and overridden from the
//! command line or a scenario preset.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationParams {
    pub population: PopulationParams,
    pub network: NetworkParams,
    pub economics: EconomicsParams,
    pub decision: DecisionParams,
    pub engine: EngineParams,
    pub experiments: ExperimentParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationParams {
    pub world_width: f64,
    pub world_height: f64,
    pub n_seniors_init: usize,
    pub n_universities: usize,
    /// Segregation index: 0 places agents at random, 1 always among the similarly educated.
    pub segregation: f64,
    pub birth_rate: f64,
    pub carrying_capacity: usize,
    pub retirement_age: u32,
    pub init_age_min: u32,
    pub init_age_max: u32,
    pub decision_age: u32,
    pub steps_from_parent: f64,
    pub share_educated_init: f64,
    /// Share of practical seniors working as self-employed constructors at set-up.
    pub constructor_share: f64,
    /// Probability of the high-earning band within an education branch.
    pub high_band_share: f64,
    pub lives_out_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    pub student_reach: f64,
    pub senior_reach_mean: f64,
    pub senior_reach_sd: f64,
    pub reach_floor: f64,
    pub outlier_share: f64,
    pub extreme_share: f64,
    pub outlier_value: f64,
    pub extreme_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WageBand {
    pub mean: f64,
    pub sd: f64,
}

impl WageBand {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }
}

/// Gross monthly wage distributions per occupation band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncomeBands {
    pub edu_high: WageBand,
    pub edu_low: WageBand,
    pub prac_high: WageBand,
    pub prac_low: WageBand,
    pub constructor: WageBand,
    pub wage_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomicsParams {
    pub cost_home: f64,
    pub cost_out: f64,
    pub basic_home: f64,
    pub basic_out: f64,
    pub suppl_max: f64,
    pub suppl_full_threshold: f64,
    pub suppl_zero_threshold: f64,
    pub loan_cap: f64,
    pub annual_interest: f64,
    pub horizon_months: u32,
    pub employment_rate: f64,
    pub work_income_mean: f64,
    pub work_income_sigma_log: f64,
    pub suppl_enabled: bool,
    pub basic_enabled: bool,
    pub premium_neutralized: bool,
    /// Premium assigned when expected educated consumption is not positive.
    pub dominated_premium: f64,
    pub bands: IncomeBands,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionParams {
    pub kappa: f64,
    /// Weight of the economic component; the social component gets `1 - omega_econ`.
    pub omega_econ: f64,
    pub ability_mean: f64,
    pub ability_sd: f64,
    pub attempt_noise_sd: f64,
    pub pass_threshold: f64,
    pub max_attempts: u32,
    pub openness_mean: f64,
    pub openness_sd: f64,
    /// Tail share inverted on each side of the peer-ratio distribution.
    pub peer_tail: f64,
    pub min_cohort_for_inversion: usize,
    pub invert_centrality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineParams {
    pub ticks: u32,
    pub study_duration_ticks: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    pub reps: usize,
    pub base_seed: u64,
    pub burn_in: u32,
}

impl Default for PopulationParams {
    fn default() -> Self {
        Self {
            world_width: 20.0,
            world_height: 20.0,
            n_seniors_init: 3000,
            n_universities: 11,
            segregation: 0.5,
            birth_rate: 0.05,
            carrying_capacity: 3500,
            retirement_age: 45,
            init_age_min: 25,
            init_age_max: 34,
            decision_age: 17,
            steps_from_parent: 3.0,
            share_educated_init: 0.36,
            constructor_share: 0.036,
            high_band_share: 0.5,
            lives_out_share: 0.53,
        }
    }
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            student_reach: 4.5,
            senior_reach_mean: 5.5,
            senior_reach_sd: 1.0,
            reach_floor: 0.5,
            outlier_share: 0.05,
            extreme_share: 0.01,
            outlier_value: 9.0,
            extreme_value: 14.0,
        }
    }
}

impl Default for IncomeBands {
    fn default() -> Self {
        Self {
            edu_high: WageBand::new(5246.5, 1445.76),
            edu_low: WageBand::new(3665.71, 211.11),
            prac_high: WageBand::new(3059.43, 343.62),
            prac_low: WageBand::new(2514.14, 184.98),
            constructor: WageBand::new(7350.0, 634.29),
            wage_floor: 500.0,
        }
    }
}

impl Default for EconomicsParams {
    fn default() -> Self {
        Self {
            cost_home: 749.0,
            cost_out: 1444.0,
            basic_home: 121.33,
            basic_out: 302.39,
            suppl_max: 457.60,
            suppl_full_threshold: 36592.92,
            suppl_zero_threshold: 80000.0,
            loan_cap: 1054.17,
            annual_interest: 0.0256,
            horizon_months: 420,
            employment_rate: 0.72,
            work_income_mean: 508.0,
            work_income_sigma_log: 0.5,
            suppl_enabled: true,
            basic_enabled: true,
            premium_neutralized: false,
            dominated_premium: -5.0,
            bands: IncomeBands::default(),
        }
    }
}

impl Default for DecisionParams {
    fn default() -> Self {
        Self {
            kappa: 1.8,
            omega_econ: 0.75,
            ability_mean: 6.7,
            ability_sd: 0.9,
            attempt_noise_sd: 0.4,
            pass_threshold: 5.5,
            max_attempts: 3,
            openness_mean: 0.5,
            openness_sd: 0.15,
            peer_tail: 0.10,
            min_cohort_for_inversion: 10,
            invert_centrality: false,
        }
    }
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            ticks: 100,
            study_duration_ticks: 5,
        }
    }
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            reps: 100,
            base_seed: 0,
            burn_in: 0,
        }
    }
}

fn check(cond: bool, field: &str, msg: &str) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            field: field.to_string(),
            reason: msg.to_string(),
        })
    }
}

fn probability(v: f64, field: &str) -> Result<(), ConfigError> {
    check(
        (0.0..=1.0).contains(&v),
        field,
        "must be a probability in [0, 1]",
    )
}

fn positive(v: f64, field: &str) -> Result<(), ConfigError> {
    check(v.is_finite() && v > 0.0, field, "must be finite and > 0")
}

fn non_negative(v: f64, field: &str) -> Result<(), ConfigError> {
    check(v.is_finite() && v >= 0.0, field, "must be finite and >= 0")
}

impl SimulationParams {
    /// Weight of the social component of the preference.
    pub fn omega_social(&self) -> f64 {
        1.0 - self.decision.omega_econ
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.population;
        positive(p.world_width, "population.world_width")?;
        positive(p.world_height, "population.world_height")?;
        check(
            p.n_universities >= 1,
            "population.n_universities",
            "at least one university is required",
        )?;
        probability(p.segregation, "population.segregation")?;
        probability(p.birth_rate, "population.birth_rate")?;
        check(
            p.init_age_min <= p.init_age_max,
            "population.init_age_min",
            "must not exceed population.init_age_max",
        )?;
        non_negative(p.steps_from_parent, "population.steps_from_parent")?;
        probability(p.share_educated_init, "population.share_educated_init")?;
        probability(p.constructor_share, "population.constructor_share")?;
        probability(p.high_band_share, "population.high_band_share")?;
        probability(p.lives_out_share, "population.lives_out_share")?;

        let n = &self.network;
        non_negative(n.student_reach, "network.student_reach")?;
        positive(n.senior_reach_mean, "network.senior_reach_mean")?;
        non_negative(n.senior_reach_sd, "network.senior_reach_sd")?;
        positive(n.reach_floor, "network.reach_floor")?;
        probability(n.outlier_share, "network.outlier_share")?;
        probability(n.extreme_share, "network.extreme_share")?;
        check(
            n.extreme_share <= n.outlier_share,
            "network.extreme_share",
            "must not exceed network.outlier_share",
        )?;
        positive(n.outlier_value, "network.outlier_value")?;
        positive(n.extreme_value, "network.extreme_value")?;

        let e = &self.economics;
        for (v, f) in [
            (e.cost_home, "economics.cost_home"),
            (e.cost_out, "economics.cost_out"),
            (e.basic_home, "economics.basic_home"),
            (e.basic_out, "economics.basic_out"),
            (e.suppl_max, "economics.suppl_max"),
            (e.suppl_full_threshold, "economics.suppl_full_threshold"),
            (e.loan_cap, "economics.loan_cap"),
            (e.annual_interest, "economics.annual_interest"),
            (e.work_income_sigma_log, "economics.work_income_sigma_log"),
        ] {
            non_negative(v, f)?;
        }
        check(
            e.suppl_zero_threshold > e.suppl_full_threshold,
            "economics.suppl_zero_threshold",
            "must exceed economics.suppl_full_threshold",
        )?;
        check(
            e.horizon_months >= 1,
            "economics.horizon_months",
            "must be >= 1",
        )?;
        probability(e.employment_rate, "economics.employment_rate")?;
        positive(e.work_income_mean, "economics.work_income_mean")?;
        check(
            e.dominated_premium.is_finite(),
            "economics.dominated_premium",
            "must be finite",
        )?;
        let b = &e.bands;
        for (band, f) in [
            (b.edu_high, "economics.bands.edu_high"),
            (b.edu_low, "economics.bands.edu_low"),
            (b.prac_high, "economics.bands.prac_high"),
            (b.prac_low, "economics.bands.prac_low"),
            (b.constructor, "economics.bands.constructor"),
        ] {
            positive(band.mean, f)?;
            non_negative(band.sd, f)?;
        }
        positive(b.wage_floor, "economics.bands.wage_floor")?;

        let d = &self.decision;
        check(
            d.kappa.is_finite() && d.kappa > 0.0,
            "decision.kappa",
            "must be finite and > 0",
        )?;
        probability(d.omega_econ, "decision.omega_econ")?;
        check(
            (1.0..=10.0).contains(&d.ability_mean),
            "decision.ability_mean",
            "must lie on the 1-10 grade scale",
        )?;
        non_negative(d.ability_sd, "decision.ability_sd")?;
        non_negative(d.attempt_noise_sd, "decision.attempt_noise_sd")?;
        check(
            (1.0..=10.0).contains(&d.pass_threshold),
            "decision.pass_threshold",
            "must lie on the 1-10 grade scale",
        )?;
        check(d.max_attempts >= 1, "decision.max_attempts", "must be >= 1")?;
        check(
            d.openness_mean > 0.0 && d.openness_mean < 1.0,
            "decision.openness_mean",
            "must lie in (0, 1)",
        )?;
        non_negative(d.openness_sd, "decision.openness_sd")?;
        check(
            (0.0..0.5).contains(&d.peer_tail),
            "decision.peer_tail",
            "must lie in [0, 0.5)",
        )?;

        check(
            self.engine.study_duration_ticks >= 1,
            "engine.study_duration_ticks",
            "must be >= 1",
        )?;
        check(
            self.experiments.base_seed <= i64::MAX as u64,
            "experiments.base_seed",
            "must fit in a signed 64-bit integer",
        )?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let params: SimulationParams =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("parameters always serialize")
    }

    /// Sets the field at `path` (e.g. `decision.kappa`) from its textual value.
    ///
    /// The value is parsed according to the type of the existing field, so
    /// unknown paths and ill-typed values are rejected. The result is validated.
    pub fn set_path(&mut self, path: &str, value: &str) -> Result<(), ConfigError> {
        let mut root = toml::Table::try_from(&*self).expect("parameters always serialize");
        let segments: Vec<&str> = path.split('.').collect();
        if segments.iter().any(|s| s.is_empty()) {
            return Err(ConfigError::UnknownPath(path.to_string()));
        }
        let (last, parents) = segments.split_last().expect("split yields one segment");
        let mut table = &mut root;
        for seg in parents {
            table = match table.get_mut(*seg) {
                Some(toml::Value::Table(t)) => t,
                _ => return Err(ConfigError::UnknownPath(path.to_string())),
            };
        }
        let slot = table
            .get_mut(*last)
            .ok_or_else(|| ConfigError::UnknownPath(path.to_string()))?;
        let bad = || ConfigError::BadValue {
            path: path.to_string(),
            value: value.to_string(),
        };
        let trimmed = value.trim();
        *slot = match slot {
            toml::Value::Float(_) => {
                let v: f64 = trimmed.parse().map_err(|_| bad())?;
                if !v.is_finite() {
                    return Err(bad());
                }
                toml::Value::Float(v)
            }
            toml::Value::Integer(_) => toml::Value::Integer(trimmed.parse().map_err(|_| bad())?),
            toml::Value::Boolean(_) => toml::Value::Boolean(trimmed.parse().map_err(|_| bad())?),
            toml::Value::String(_) => toml::Value::String(trimmed.to_string()),
            _ => return Err(ConfigError::UnknownPath(path.to_string())),
        };
        let updated: SimulationParams = root.try_into().map_err(|_: toml::de::Error| bad())?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    /// Reads the field at `path` as a floating-point number (integers are widened).
    pub fn get_path(&self, path: &str) -> Option<f64> {
        let root = toml::Table::try_from(self).ok()?;
        let mut value: &toml::Value = root.get(path.split('.').next()?)?;
        for seg in path.split('.').skip(1) {
            value = value.as_table()?.get(seg)?;
        }
        match value {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            toml::Value::Boolean(b) => Some(if *b { 1.0 } else { 0.0 }),
            _ => None,
        }
    }
}

/// Parses a `path=value` override.
pub fn parse_override(text: &str) -> Result<(String, String), ConfigError> {
    let (path, value) = text
        .split_once('=')
        .ok_or_else(|| ConfigError::MalformedOverride(text.to_string()))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(ConfigError::MalformedOverride(text.to_string()));
    }
    Ok((path.to_string(), value.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimulationParams::default().validate().unwrap();
    }

    #[test]
    fn omega_weights_sum_to_one() {
        let p = SimulationParams::default();
        assert_eq!(p.decision.omega_econ + p.omega_social(), 1.0);
        assert_eq!(p.omega_social(), 0.25);
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let mut p = SimulationParams::default();
        p.decision.kappa = 1.23456789;
        p.economics.suppl_enabled = false;
        let text = p.to_toml_string();
        assert_eq!(SimulationParams::from_toml_str(&text).unwrap(), p);
    }

    #[test]
    fn missing_keys_take_defaults() {
        let p = SimulationParams::from_toml_str("[decision]\nkappa = 2.0\n").unwrap();
        assert_eq!(p.decision.kappa, 2.0);
        assert_eq!(p.population.n_seniors_init, 3000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            SimulationParams::from_toml_str("[decision]\nkapa = 2.0\n"),
            Err(ConfigError::Parse(_))
        ));
        assert!(SimulationParams::from_toml_str("[nope]\nx = 1\n").is_err());
    }

    #[test]
    fn invalid_segregation_is_rejected() {
        let err = SimulationParams::from_toml_str("[population]\nsegregation = 1.5\n").unwrap_err();
        assert!(
            matches!(err, ConfigError::Invalid { ref field, .. } if field == "population.segregation")
        );
    }

    #[test]
    fn set_path_parses_by_field_type() {
        let mut p = SimulationParams::default();
        p.set_path("decision.kappa", "0.5").unwrap();
        p.set_path("population.n_universities", "25").unwrap();
        p.set_path("economics.suppl_enabled", "false").unwrap();
        p.set_path("economics.bands.edu_low.mean", "4000").unwrap();
        assert_eq!(p.decision.kappa, 0.5);
        assert_eq!(p.population.n_universities, 25);
        assert!(!p.economics.suppl_enabled);
        assert_eq!(p.economics.bands.edu_low.mean, 4000.0);
        assert_eq!(p.get_path("population.n_universities"), Some(25.0));
    }

    #[test]
    fn set_path_rejects_unknown_and_ill_typed() {
        let mut p = SimulationParams::default();
        assert!(matches!(
            p.set_path("decision.nope", "1"),
            Err(ConfigError::UnknownPath(_))
        ));
        assert!(matches!(
            p.set_path("decision", "1"),
            Err(ConfigError::UnknownPath(_))
        ));
        assert!(matches!(
            p.set_path("", "1"),
            Err(ConfigError::UnknownPath(_))
        ));
        assert!(matches!(
            p.set_path("population.n_universities", "2.5"),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            p.set_path("decision.kappa", "NaN"),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            p.set_path("population.segregation", "2"),
            Err(ConfigError::Invalid { .. })
        ));
        assert_eq!(p, SimulationParams::default());
    }

    #[test]
    fn override_syntax() {
        assert_eq!(
            parse_override(" decision.kappa = 2 ").unwrap(),
            ("decision.kappa".to_string(), "2".to_string())
        );
        assert!(parse_override("decision.kappa").is_err());
        assert!(parse_override("=2").is_err());
    }
}
