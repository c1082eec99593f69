//! Money flows: study costs, grants, parental endowment, work income, loans and
//! repayment, the budget constraint, expected wages and the consumption premium.
//!
//! All amounts are euros per month unless a name says otherwise; household
//! income is gross euros per year.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::network::WageObservation;
use crate::params::{EconomicsParams, IncomeBands, WageBand};
use crate::population::{Education, OccupationBand, Student};

/// Monthly living expenses of a student living away from home, by item.
pub const LIVING_EXPENSES_OUT: [(&str, f64); 9] = [
    ("rent", 494.0),
    ("groceries", 201.0),
    ("study_materials", 57.0),
    ("tuition", 211.0),
    ("leisure", 144.0),
    ("clothing", 62.0),
    ("transport", 84.0),
    ("telephone", 22.0),
    ("vacation", 169.0),
];

/// Total printed under the expense table. The items themselves add up to 1444.
pub const LIVING_EXPENSES_PRINTED_TOTAL: f64 = 1258.0;

/// Parental spending on a child's higher education by income decile:
/// (average gross household income per year, absolute spending per year).
pub const ENDOWMENT_DECILES: [(f64, f64); 10] = [
    (13800.0, 2249.40),
    (24300.0, 1992.60),
    (32000.0, 2208.00),
    (41000.0, 2091.00),
    (52000.0, 2704.00),
    (65200.0, 3520.80),
    (80900.0, 4045.00),
    (99900.0, 5294.70),
    (127100.0, 7371.80),
    (229200.0, 12835.20),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSchedule {
    pub cost_home: f64,
    pub cost_out: f64,
}

impl CostSchedule {
    pub fn from_params(p: &EconomicsParams) -> Self {
        Self {
            cost_home: p.cost_home,
            cost_out: p.cost_out,
        }
    }

    pub fn cost(&self, lives_out: bool) -> f64 {
        if lives_out {
            self.cost_out
        } else {
            self.cost_home
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrantSchedule {
    pub basic_home: f64,
    pub basic_out: f64,
    pub suppl_max: f64,
    pub suppl_full_threshold: f64,
    pub suppl_zero_threshold: f64,
    pub basic_enabled: bool,
    pub suppl_enabled: bool,
}

impl GrantSchedule {
    pub fn from_params(p: &EconomicsParams) -> Self {
        Self {
            basic_home: p.basic_home,
            basic_out: p.basic_out,
            suppl_max: p.suppl_max,
            suppl_full_threshold: p.suppl_full_threshold,
            suppl_zero_threshold: p.suppl_zero_threshold,
            basic_enabled: p.basic_enabled,
            suppl_enabled: p.suppl_enabled,
        }
    }
}

pub fn basic_grant(lives_out: bool, grants: &GrantSchedule) -> f64 {
    match (grants.basic_enabled, lives_out) {
        (false, _) => 0.0,
        (true, true) => grants.basic_out,
        (true, false) => grants.basic_home,
    }
}

/// Income-tested grant: full up to the first threshold, then linearly down to
/// zero at the second.
pub fn supplementary_grant(household_income: f64, grants: &GrantSchedule) -> f64 {
    if !grants.suppl_enabled {
        return 0.0;
    }
    let (full, zero) = (grants.suppl_full_threshold, grants.suppl_zero_threshold);
    if household_income <= full {
        grants.suppl_max
    } else if household_income >= zero {
        0.0
    } else {
        grants.suppl_max * (zero - household_income) / (zero - full)
    }
}

/// Monthly parental contribution. Brackets are bounded by the midpoints between
/// consecutive decile averages; the outer brackets are open.
pub fn parental_endowment(household_income: f64) -> f64 {
    let decile = ENDOWMENT_DECILES
        .windows(2)
        .position(|w| household_income < (w[0].0 + w[1].0) / 2.0)
        .unwrap_or(ENDOWMENT_DECILES.len() - 1);
    ENDOWMENT_DECILES[decile].1 / 12.0
}

/// Log-normal work income for employed students, parameterized by its mean and
/// the log-scale spread.
#[derive(Debug, Clone, Copy)]
pub struct WorkIncome {
    pub employment_rate: f64,
    dist: LogNormal<f64>,
}

impl WorkIncome {
    pub fn from_params(p: &EconomicsParams) -> Self {
        Self::new(
            p.employment_rate,
            p.work_income_mean,
            p.work_income_sigma_log,
        )
    }

    pub fn new(employment_rate: f64, mean: f64, sigma_log: f64) -> Self {
        let mu_log = mean.ln() - sigma_log * sigma_log / 2.0;
        Self {
            employment_rate,
            dist: LogNormal::new(mu_log, sigma_log).expect("sigma is finite and >= 0"),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.gen_bool(self.employment_rate) {
            self.dist.sample(rng)
        } else {
            0.0
        }
    }

    pub fn draw_employed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng)
    }
}

pub fn work_income<R: Rng + ?Sized>(p: &EconomicsParams, rng: &mut R) -> f64 {
    WorkIncome::from_params(p).draw(rng)
}

/// A student's monthly resources against the cost of studying.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub cost: f64,
    pub basic_grant: f64,
    pub suppl_grant: f64,
    pub endowment: f64,
    pub work_income: f64,
    pub loan_capacity: f64,
}

impl Budget {
    /// Resources other than the loan.
    pub fn own_resources(&self) -> f64 {
        self.basic_grant + self.suppl_grant + self.endowment + self.work_income
    }

    pub fn total(&self) -> f64 {
        self.own_resources() + self.loan_capacity
    }

    pub fn eligible(&self) -> bool {
        self.total() - self.cost > 0.0
    }
}

/// Assembles the budget given an already-drawn work income.
pub fn compute_budget(
    lives_out: bool,
    household_income: f64,
    work_income: f64,
    p: &EconomicsParams,
) -> Budget {
    let grants = GrantSchedule::from_params(p);
    Budget {
        cost: CostSchedule::from_params(p).cost(lives_out),
        basic_grant: basic_grant(lives_out, &grants),
        suppl_grant: supplementary_grant(household_income, &grants),
        endowment: parental_endowment(household_income),
        work_income,
        loan_capacity: p.loan_cap,
    }
}

/// Draws the student's work income and assembles their budget.
pub fn draw_budget<R: Rng + ?Sized>(student: &Student, p: &EconomicsParams, rng: &mut R) -> Budget {
    let work = work_income(p, rng);
    compute_budget(student.lives_out, student.household_income, work, p)
}

/// Students borrow only the deficit not covered by their other resources.
pub fn loan_take_up(budget: &Budget) -> f64 {
    (budget.cost - budget.own_resources()).clamp(0.0, budget.loan_capacity)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoanTerms {
    pub cap: f64,
    pub annual_interest: f64,
    pub horizon_months: u32,
}

impl LoanTerms {
    pub fn from_params(p: &EconomicsParams) -> Self {
        Self {
            cap: p.loan_cap,
            annual_interest: p.annual_interest,
            horizon_months: p.horizon_months,
        }
    }
}

/// Monthly repayment of the debt built up by borrowing `loan_monthly` for
/// `study_years`, as an annuity over the repayment horizon.
pub fn repayment_cost(loan_monthly: f64, terms: &LoanTerms, study_years: u32) -> f64 {
    let debt = loan_monthly * 12.0 * f64::from(study_years);
    if debt <= 0.0 {
        return 0.0;
    }
    let n = f64::from(terms.horizon_months);
    let r = terms.annual_interest / 12.0;
    if r == 0.0 {
        debt / n
    } else {
        debt * r / (1.0 - (1.0 + r).powf(-n))
    }
}

pub fn band_params(bands: &IncomeBands, band: OccupationBand) -> WageBand {
    match band {
        OccupationBand::EduHigh => bands.edu_high,
        OccupationBand::EduLow => bands.edu_low,
        OccupationBand::PracHigh => bands.prac_high,
        OccupationBand::PracLow => bands.prac_low,
        OccupationBand::Constructor => bands.constructor,
    }
}

/// Normal wage draw for the band, truncated above the wage floor.
pub fn draw_wage<R: Rng + ?Sized>(bands: &IncomeBands, band: OccupationBand, rng: &mut R) -> f64 {
    let WageBand { mean, sd } = band_params(bands, band);
    if sd == 0.0 {
        return mean.max(bands.wage_floor);
    }
    let normal = Normal::new(mean, sd).expect("sd is finite and >= 0");
    for _ in 0..1000 {
        let w = normal.sample(rng);
        if w > bands.wage_floor {
            return w;
        }
    }
    mean.max(bands.wage_floor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedWage {
    pub value: f64,
    /// No observation of this branch was available and the fallback mean was used.
    pub fallback: bool,
}

/// Fallback expectation when a student observes nobody of a branch: the mean of
/// that branch's low-earning band.
pub fn fallback_wage(bands: &IncomeBands, branch: Education) -> f64 {
    match branch {
        Education::Educated => bands.edu_low.mean,
        Education::Practical => bands.prac_low.mean,
    }
}

/// Weighted mean of the observed wages in one education branch.
pub fn expected_wage(
    observations: &[WageObservation],
    branch: Education,
    bands: &IncomeBands,
) -> ExpectedWage {
    let (num, den) = observations
        .iter()
        .filter(|o| o.education == branch)
        .fold((0.0, 0.0), |(n, d), o| {
            (n + o.weight * o.wage, d + o.weight)
        });
    if den > 0.0 {
        ExpectedWage {
            value: num / den,
            fallback: false,
        }
    } else {
        ExpectedWage {
            value: fallback_wage(bands, branch),
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Premium {
    pub value: f64,
    /// Expected educated consumption was not positive.
    pub dominated: bool,
}

/// Log ratio of expected educated consumption (wage net of repayment) to the
/// expected practical wage.
pub fn consumption_premium(
    educated_wage: f64,
    practical_wage: f64,
    repayment: f64,
    neutralized: bool,
    dominated_value: f64,
) -> Premium {
    if neutralized {
        return Premium {
            value: 0.0,
            dominated: false,
        };
    }
    let educated_consumption = educated_wage - repayment;
    if educated_consumption <= 0.0 || practical_wage <= 0.0 {
        return Premium {
            value: dominated_value,
            dominated: true,
        };
    }
    Premium {
        value: (educated_consumption / practical_wage).ln(),
        dominated: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SimRng;
    use rand::SeedableRng;

    fn grants() -> GrantSchedule {
        GrantSchedule::from_params(&EconomicsParams::default())
    }

    #[test]
    fn basic_grant_by_living_situation() {
        let g = grants();
        assert_eq!(basic_grant(false, &g), 121.33);
        assert_eq!(basic_grant(true, &g), 302.39);
        let off = GrantSchedule {
            basic_enabled: false,
            ..g
        };
        assert_eq!(basic_grant(true, &off), 0.0);
        assert_eq!(basic_grant(false, &off), 0.0);
    }

    #[test]
    fn supplementary_grant_thresholds() {
        let g = grants();
        assert_eq!(supplementary_grant(30000.0, &g), 457.60);
        assert_eq!(supplementary_grant(36592.92, &g), 457.60);
        assert_eq!(supplementary_grant(80000.0, &g), 0.0);
        assert_eq!(supplementary_grant(120000.0, &g), 0.0);
        let off = GrantSchedule {
            suppl_enabled: false,
            ..g
        };
        assert_eq!(supplementary_grant(0.0, &off), 0.0);
    }

    #[test]
    fn endowment_decile_lookup() {
        assert!((parental_endowment(13800.0) - 187.45).abs() < 1e-9);
        assert!((parental_endowment(229200.0) - 1069.60).abs() < 1e-9);
        assert!((parental_endowment(52000.0) - 2704.0 / 12.0).abs() < 1e-9);
        assert!((parental_endowment(0.0) - 187.45).abs() < 1e-9);
        assert!((parental_endowment(1e7) - 1069.60).abs() < 1e-9);
        // bracket edges: midpoint between 13800 and 24300 is 19050
        assert_eq!(parental_endowment(19049.99), 2249.40 / 12.0);
        assert_eq!(parental_endowment(19050.0), 1992.60 / 12.0);
    }

    #[test]
    fn unemployed_students_earn_nothing() {
        let w = WorkIncome::new(0.0, 508.0, 0.5);
        let mut rng = SimRng::seed_from_u64(1);
        assert!((0..1000).all(|_| w.draw(&mut rng) == 0.0));
    }

    #[test]
    fn employment_share() {
        let w = WorkIncome::from_params(&EconomicsParams::default());
        let mut rng = SimRng::seed_from_u64(2);
        let n = 50_000;
        let employed = (0..n).filter(|_| w.draw(&mut rng) > 0.0).count() as f64 / n as f64;
        assert!((employed - 0.72).abs() < 0.01, "{employed}");
    }

    #[test]
    fn loan_rules() {
        let b = Budget {
            cost: 1444.0,
            basic_grant: 600.0,
            suppl_grant: 500.0,
            endowment: 0.0,
            work_income: 0.0,
            loan_capacity: 1054.17,
        };
        assert!((loan_take_up(&b) - 344.0).abs() < 1e-9);
        let rich = Budget {
            endowment: 2000.0,
            ..b
        };
        assert_eq!(loan_take_up(&rich), 0.0);
        let broke = Budget {
            basic_grant: 0.0,
            suppl_grant: 0.0,
            ..b
        };
        assert_eq!(loan_take_up(&broke), 1054.17);
    }

    #[test]
    fn repayment_without_interest() {
        let terms = LoanTerms {
            cap: 1054.17,
            annual_interest: 0.0,
            horizon_months: 420,
        };
        assert_eq!(repayment_cost(0.0, &terms, 5), 0.0);
        assert!((repayment_cost(344.0, &terms, 5) - 20640.0 / 420.0).abs() < 1e-9);
    }

    #[test]
    fn wage_draws_respect_floor() {
        let bands = IncomeBands::default();
        let mut rng = SimRng::seed_from_u64(5);
        for band in [
            OccupationBand::EduHigh,
            OccupationBand::EduLow,
            OccupationBand::PracHigh,
            OccupationBand::PracLow,
            OccupationBand::Constructor,
        ] {
            for _ in 0..2000 {
                assert!(draw_wage(&bands, band, &mut rng) > 500.0);
            }
        }
    }

    #[test]
    fn single_observation_is_its_own_expectation() {
        let obs = [WageObservation {
            wage: 3210.0,
            weight: 1.7,
            education: Education::Educated,
        }];
        let e = expected_wage(&obs, Education::Educated, &IncomeBands::default());
        assert_eq!(
            e,
            ExpectedWage {
                value: 3210.0,
                fallback: false
            }
        );
    }

    #[test]
    fn empty_branch_uses_fallback() {
        let e = expected_wage(&[], Education::Educated, &IncomeBands::default());
        assert_eq!(
            e,
            ExpectedWage {
                value: 3665.71,
                fallback: true
            }
        );
        let e = expected_wage(&[], Education::Practical, &IncomeBands::default());
        assert_eq!(e.value, 2514.14);
    }

    #[test]
    fn premium_cases() {
        assert_eq!(
            consumption_premium(3000.0, 3000.0, 0.0, false, -5.0).value,
            0.0
        );
        assert_eq!(
            consumption_premium(3050.0, 3000.0, 50.0, false, -5.0).value,
            0.0
        );
        assert_eq!(
            consumption_premium(9000.0, 1000.0, 10.0, true, -5.0).value,
            0.0
        );
        let dominated = consumption_premium(100.0, 3000.0, 200.0, false, -5.0);
        assert_eq!(
            dominated,
            Premium {
                value: -5.0,
                dominated: true
            }
        );
    }
}
