//! Oracle and property checks for `edusim`, shared by the core test suites and
//! the acceptance target.
//!
//! Every oracle here is written from scratch and never calls the function it
//! is checking.

use edusim::decision::{
    self, centrality, completion_probability, peer_influence, preference, student_disposition,
    Decision, PeerThresholds, PreferenceInputs,
};
use edusim::economics::{
    basic_grant, compute_budget, consumption_premium, expected_wage, fallback_wage, loan_take_up,
    parental_endowment, repayment_cost, supplementary_grant, Budget, GrantSchedule, LoanTerms,
    WorkIncome, ENDOWMENT_DECILES, LIVING_EXPENSES_OUT,
};
use edusim::engine::Simulation;
use edusim::experiments::ScenarioSpec;
use edusim::network::{self, classmates_of, AgentRef, ReachProfile, WageObservation};
use edusim::population::{
    own_side_probability, AgentId, Education, Gender, OccupationBand, Point, Population, Senior,
    Student, StudentState, University, WorldGrid,
};
use edusim::stats::welch_t;
use edusim::{io, SimRng, SimulationParams};
use rand::SeedableRng;
use statrs::distribution::{ContinuousCDF, Normal};

pub struct Check {
    pub name: &'static str,
    pub result: Result<(), String>,
}

impl Check {
    fn new(name: &'static str, result: Result<(), String>) -> Self {
        Self { name, result }
    }
}

/// Asserts every check passed, listing the ones that did not.
pub fn assert_all(checks: &[Check]) {
    let failed: Vec<String> = checks
        .iter()
        .filter_map(|c| {
            c.result
                .as_ref()
                .err()
                .map(|e| format!("{}: {}", c.name, e))
        })
        .collect();
    assert!(
        failed.is_empty(),
        "{} failing check(s):\n{}",
        failed.len(),
        failed.join("\n")
    );
}

pub fn rel_close(got: f64, want: f64, rel: f64) -> Result<(), String> {
    let scale = want.abs().max(f64::MIN_POSITIVE);
    if (got - want).abs() <= rel * scale || got == want {
        Ok(())
    } else {
        Err(format!("got {got}, want {want} (rel tol {rel})"))
    }
}

pub fn abs_close(got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("got {got}, want {want} +/- {tol}"))
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn all(results: impl IntoIterator<Item = Result<(), String>>) -> Result<(), String> {
    results
        .into_iter()
        .collect::<Result<Vec<()>, String>>()
        .map(|_| ())
}

const REL: f64 = 1e-6;

pub fn senior(id: AgentId, band: OccupationBand, wage: f64, at: Point, reach: f64) -> Senior {
    Senior {
        id,
        age: 30,
        gender: Gender::Female,
        band,
        wage,
        position: at,
        social_reach: reach,
    }
}

pub fn student(id: AgentId, at: Point, reach: f64) -> Student {
    Student {
        id,
        age: 17,
        gender: Gender::Male,
        parent_id: AgentId::MAX,
        parent_wage: 3000.0,
        parent_band: OccupationBand::PracLow,
        parent_weight: 1.0,
        position: at,
        social_reach: reach,
        ability: 6.7,
        grade: None,
        failed_attempts: 0,
        lives_out: true,
        openness: 0.5,
        state: StudentState::Deciding,
        loan_monthly: 0.0,
        household_income: 36000.0,
        hatched_tick: 0,
    }
}

fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

// Independent oracles.

fn oracle_linear(x: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Level payment that amortizes `debt` over `n` months at monthly rate `r`,
/// found by bisection on the month-by-month balance rather than the closed form.
fn oracle_annuity(debt: f64, r: f64, n: u32) -> f64 {
    let balance_after = |pay: f64| {
        let mut b = debt;
        for _ in 0..n {
            b = b * (1.0 + r) - pay;
        }
        b
    };
    let (mut lo, mut hi) = (0.0, debt);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance_after(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn oracle_percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (v.len() - 1) as f64;
    let i = pos as usize;
    if i + 1 >= v.len() {
        return v[v.len() - 1];
    }
    v[i] + (pos - i as f64) * (v[i + 1] - v[i])
}

fn oracle_logistic(p: f64) -> f64 {
    let e = std::f64::consts::E;
    1.0 / (1.0 + e.powf(-p))
}

fn oracle_weighted_mean(pairs: &[(f64, f64)]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(w, x) in pairs {
        num += w * x;
        den += w;
    }
    num / den
}

fn hand_welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    let m = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let v = |x: &[f64]| {
        let mu = m(x);
        x.iter().map(|y| (y - mu).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
    };
    let (sa, sb) = (v(a) / a.len() as f64, v(b) / b.len() as f64);
    let t = (m(a) - m(b)) / (sa + sb).sqrt();
    let dof =
        (sa + sb).powi(2) / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    (t, dof)
}

// Derived examples.

pub fn derived_checks() -> Vec<Check> {
    let p = SimulationParams::default();
    let e = &p.economics;
    let grants = GrantSchedule::from_params(e);
    let mut out = Vec::new();

    out.push(Check::new("expected students per tick", {
        let n = p.population.n_seniors_init as f64;
        let want = n * p.population.birth_rate;
        let mut r = rng(11);
        let draws = 1000;
        let mut total = 0usize;
        for _ in 0..draws {
            let mut pop = Population::init_world(&p, &mut r).unwrap();
            total += pop.hatch_students(&p, 0, &mut r);
        }
        let se =
            (n * p.population.birth_rate * (1.0 - p.population.birth_rate) / draws as f64).sqrt();
        abs_close(total as f64 / draws as f64, want, 4.0 * se).and(rel_close(want, 150.0, REL))
    }));

    out.push(Check::new("reach tail frequencies", {
        let profile = ReachProfile::from_params(&p.network);
        let mut r = rng(12);
        let n = 100_000;
        let (mut extreme, mut tail) = (0usize, 0usize);
        for _ in 0..n {
            let v = network::assign_social_reach(&profile, &mut r);
            if v == profile.extreme_value {
                extreme += 1;
            }
            if v == profile.extreme_value || v == profile.outlier_value {
                tail += 1;
            }
        }
        let se = |q: f64| (q * (1.0 - q) / n as f64).sqrt();
        all([
            abs_close(tail as f64 / n as f64, 0.05, 4.0 * se(0.05)),
            abs_close(extreme as f64 / n as f64, 0.01, 4.0 * se(0.01)),
        ])
    }));

    out.push(Check::new("perception is not mutual", {
        let mut pop = Population::empty(WorldGrid::new(20.0, 20.0));
        let s = senior(0, OccupationBand::EduLow, 3000.0, Point::new(5.0, 5.0), 5.5);
        let st = student(1, Point::new(10.0, 5.0), 4.5);
        pop.add_senior(s.clone());
        pop.add_student(st.clone());
        let senior_sees = network::senior_neighbors(&s, &pop);
        let student_sees = network::student_neighbors(&st, &pop);
        all([
            rel_close(s.position.distance(&st.position), 5.0, REL),
            ensure(
                senior_sees.contains(&AgentRef::Student(1)),
                "senior should list the student",
            ),
            ensure(
                !student_sees.contains(&AgentRef::Senior(0)),
                "student should not list the senior",
            ),
        ])
    }));

    out.push(Check::new("parent and neighbor wage entries", {
        let mut st = student(10, Point::new(5.0, 5.0), 4.5);
        st.parent_id = 0;
        st.parent_wage = 4000.0;
        st.parent_band = OccupationBand::EduHigh;
        st.parent_weight = 1.5;
        let seniors = vec![
            senior(
                0,
                OccupationBand::EduHigh,
                4000.0,
                Point::new(15.0, 15.0),
                5.5,
            ),
            senior(
                1,
                OccupationBand::PracLow,
                3000.0,
                Point::new(6.0, 5.0),
                5.5,
            ),
        ];
        let obs = network::working_neighbor_wages(&st, &seniors);
        let want = [
            WageObservation {
                wage: 3000.0,
                weight: 1.0,
                education: Education::Practical,
            },
            WageObservation {
                wage: 4000.0,
                weight: 1.5,
                education: Education::Educated,
            },
        ];
        ensure(
            obs.len() == 2 && want.iter().all(|w| obs.contains(w)),
            format!("got {obs:?}"),
        )
    }));

    out.push(Check::new("supplementary grant interpolation", {
        let x = 58296.46;
        let want = oracle_linear(
            x,
            e.suppl_full_threshold,
            e.suppl_max,
            e.suppl_zero_threshold,
            0.0,
        );
        let got = supplementary_grant(x, &grants);
        all([rel_close(got, want, REL), abs_close(got, 228.80, 0.005)])
    }));

    out.push(Check::new("budget component sum, eligible", {
        let b = compute_budget(true, 13800.0, 508.0, e);
        let want = 302.39 + 457.60 + 2249.40 / 12.0 + 508.0 + 1054.17;
        all([
            rel_close(b.total(), want, REL),
            abs_close(b.total(), 2509.61, 0.005),
            ensure(b.eligible(), "should be eligible"),
        ])
    }));

    out.push(Check::new("budget component sum, ineligible", {
        let b = Budget {
            cost: e.cost_out,
            basic_grant: 0.0,
            suppl_grant: 0.0,
            endowment: 0.0,
            work_income: 0.0,
            loan_capacity: e.loan_cap,
        };
        all([
            rel_close(b.total(), 1054.17, REL),
            ensure(!b.eligible(), "should be ineligible"),
        ])
    }));

    out.push(Check::new("home-living students are always eligible", {
        let mut worst = f64::INFINITY;
        let mut all_eligible = true;
        for income in (0..=300_000).step_by(500) {
            let b = compute_budget(false, income as f64, 0.0, e);
            worst = worst.min(b.total() - b.cost);
            all_eligible &= b.eligible();
        }
        all([
            ensure(all_eligible, "an income level was ineligible"),
            ensure(
                worst >= 1054.17 + 121.33 - 749.0 - 1e-9,
                format!("margin {worst}"),
            ),
        ])
    }));

    out.push(Check::new("loan covers the deficit up to the cap", {
        let mk = |own: f64| Budget {
            cost: 1444.0,
            basic_grant: own,
            suppl_grant: 0.0,
            endowment: 0.0,
            work_income: 0.0,
            loan_capacity: 1054.17,
        };
        all([
            rel_close(loan_take_up(&mk(1100.0)), 344.0, REL),
            rel_close(loan_take_up(&mk(0.0)), 1054.17, REL),
        ])
    }));

    out.push(Check::new("repayment without interest", {
        let terms = LoanTerms {
            cap: e.loan_cap,
            annual_interest: 0.0,
            horizon_months: 420,
        };
        let got = repayment_cost(344.0, &terms, 5);
        all([
            rel_close(got, 20640.0 / 420.0, REL),
            abs_close(got, 49.14, 0.005),
        ])
    }));

    out.push(Check::new("repayment annuity", {
        let terms = LoanTerms::from_params(e);
        let got = repayment_cost(344.0, &terms, 5);
        rel_close(
            got,
            oracle_annuity(344.0 * 12.0 * 5.0, 0.0256 / 12.0, 420),
            REL,
        )
    }));

    out.push(Check::new("expected wage weighted mean", {
        let obs = [
            WageObservation {
                wage: 4000.0,
                weight: 1.5,
                education: Education::Educated,
            },
            WageObservation {
                wage: 3000.0,
                weight: 1.0,
                education: Education::Educated,
            },
        ];
        let got = expected_wage(&obs, Education::Educated, &e.bands);
        let want = oracle_weighted_mean(&[(1.5, 4000.0), (1.0, 3000.0)]);
        all([
            rel_close(got.value, want, REL),
            rel_close(want, 3600.0, REL),
            ensure(!got.fallback, "no fallback"),
        ])
    }));

    out.push(Check::new("consumption premium", {
        let got = consumption_premium(4000.0, 2500.0, 0.0, false, e.dominated_premium);
        all([
            rel_close(got.value, (4000.0f64 / 2500.0).ln(), REL),
            abs_close(got.value, 0.4700, 5e-5),
        ])
    }));

    out.push(Check::new("first-attempt pass rate", {
        let d = &p.decision;
        let sd = (d.ability_sd.powi(2) + d.attempt_noise_sd.powi(2)).sqrt();
        let want = Normal::new(0.0, 1.0)
            .unwrap()
            .cdf((d.ability_mean - d.pass_threshold) / sd);
        let mut r = rng(13);
        let n = 100_000;
        let passed = (0..n)
            .filter(|_| {
                let a = decision::draw_ability(d, &mut r);
                decision::take_exam(a, d, &mut r).passed()
            })
            .count();
        let se = (want * (1.0 - want) / n as f64).sqrt();
        all([
            abs_close(passed as f64 / n as f64, want, 4.0 * se),
            abs_close(want, 0.889, 0.001),
        ])
    }));

    out.push(Check::new("disposition power", {
        let got = student_disposition(5.0, 1.8);
        all([
            rel_close(got, (1.8 * 0.5f64.ln()).exp(), REL),
            abs_close(got, 0.2872, 5e-5),
        ])
    }));

    out.push(Check::new("peer influence on a fixed cohort", {
        let mut ratios: Vec<f64> = (0..18).map(|i| 0.8 + 0.025 * i as f64).collect();
        ratios.push(7.0 / 6.0);
        ratios.push(2.0);
        let th = PeerThresholds::from_ratios(&ratios, 0.10, 10).expect("cohort of 20");
        let lo = oracle_percentile(&ratios, 0.10);
        let hi = oracle_percentile(&ratios, 0.90);
        let inside = peer_influence(Some(7.0 / 6.0), Some(th));
        let above = peer_influence(Some(2.0), Some(th));
        all([
            rel_close(th.low, lo, REL),
            rel_close(th.high, hi, REL),
            ensure(
                lo <= 7.0 / 6.0 && 7.0 / 6.0 <= hi,
                "7/6 should sit inside the band",
            ),
            ensure(2.0 > hi, "2.0 should sit above the band"),
            rel_close(inside, 7.0 / 6.0, REL),
            rel_close(above, 0.5, REL),
        ])
    }));

    out.push(Check::new("openness draws", {
        let mut r = rng(14);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| decision::openness(&p.decision, &mut r))
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        all([
            ensure(
                xs.iter().all(|x| *x > 0.0 && *x < 1.0),
                "draw outside (0, 1)",
            ),
            abs_close(mean, 0.5, 0.01),
        ])
    }));

    out.push(Check::new("centrality", {
        let world = WorldGrid::new(20.0, 20.0);
        let unis = [
            University {
                id: 0,
                position: Point::new(2.0, 7.0),
            },
            University {
                id: 1,
                position: Point::new(2.0, 17.0),
            },
        ];
        let got = centrality(Point::new(2.0, 2.0), &unis, &world, false);
        let diag = (20.0f64 * 20.0 + 20.0 * 20.0).sqrt();
        all([
            rel_close(got, 10.0 / diag, REL),
            abs_close(got, 0.3536, 5e-5),
        ])
    }));

    out.push(Check::new("preference", {
        let x = PreferenceInputs {
            premium: 0.47,
            disposition: 0.287,
            peer_influence: 1.0,
            personality: 0.5,
            centrality: 0.3,
            omega_econ: 0.75,
        };
        let want = 0.75 * 0.47 + 0.25 * (0.287 + 0.5 + 0.3);
        all([
            rel_close(preference(&x), want, REL),
            abs_close(want, 0.6243, 5e-5),
        ])
    }));

    out.push(Check::new("logistic", {
        all([
            rel_close(completion_probability(1.0), oracle_logistic(1.0), REL),
            abs_close(completion_probability(1.0), 0.7311, 5e-5),
            rel_close(completion_probability(-5.0), oracle_logistic(-5.0), REL),
            abs_close(completion_probability(-5.0), 0.0067, 5e-5),
        ])
    }));

    out.push(Check::new("enrollment share at P = 0", {
        let mut r = rng(15);
        let n = 10_000;
        let prob = completion_probability(0.0);
        let enrolled = (0..n)
            .filter(|_| decision::decide(prob, &mut r) == Decision::Enroll)
            .count();
        abs_close(enrolled as f64 / n as f64, 0.5, 0.015)
    }));

    out.push(Check::new("work income mean", {
        let w = WorkIncome::from_params(e);
        let mut r = rng(16);
        let n = 100_000;
        let mean = (0..n).map(|_| w.draw_employed(&mut r)).sum::<f64>() / n as f64;
        abs_close(mean, 508.0, 10.0)
    }));

    out.push(Check::new("welch hand example", {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let got = welch_t(&a, &b).unwrap();
        let (t, dof) = hand_welch(&a, &b);
        all([
            rel_close(got.t, t, REL),
            rel_close(got.dof, dof, REL),
            rel_close(t, -1.0, REL),
            rel_close(dof, 8.0, REL),
        ])
    }));

    out
}

// Calibration constants and the example values they produce.

pub fn calibration_constants() -> Vec<Check> {
    let p = SimulationParams::default();
    let e = &p.economics;
    let grants = GrantSchedule::from_params(e);
    let b = &e.bands;
    let eq = |got: f64, want: f64| ensure(got == want, format!("got {got}, want {want}"));
    let mut out = Vec::new();

    out.push(Check::new(
        "population defaults",
        all([
            eq(p.population.n_seniors_init as f64, 3000.0),
            eq(p.population.n_universities as f64, 11.0),
            eq(p.population.segregation, 0.5),
            eq(p.population.birth_rate, 0.05),
            eq(p.population.carrying_capacity as f64, 3500.0),
            eq(p.population.retirement_age as f64, 45.0),
            eq(p.population.steps_from_parent, 3.0),
            eq(p.population.share_educated_init, 0.36),
            eq(p.network.student_reach, 4.5),
            eq(p.network.senior_reach_mean, 5.5),
        ]),
    ));

    out.push(Check::new("initial world", {
        let pop = Population::init_world(&p, &mut rng(1)).unwrap();
        all([
            eq(pop.seniors.len() as f64, 3000.0),
            eq(pop.universities.len() as f64, 11.0),
        ])
    }));

    out.push(Check::new(
        "own-side probability",
        eq(own_side_probability(0.5), 0.75),
    ));

    out.push(Check::new(
        "decision defaults",
        all([
            eq(p.decision.kappa, 1.8),
            eq(p.decision.omega_econ, 0.75),
            eq(p.engine.study_duration_ticks as f64, 5.0),
            eq(p.engine.ticks as f64, 100.0),
        ]),
    ));

    out.push(Check::new(
        "living costs",
        all([
            eq(e.cost_home, 749.0),
            eq(e.cost_out, 1444.0),
            eq(
                LIVING_EXPENSES_OUT.iter().map(|(_, v)| v).sum::<f64>(),
                1444.0,
            ),
        ]),
    ));

    out.push(Check::new("basic grant", {
        let mut off = e.clone();
        off.basic_enabled = false;
        let g_off = GrantSchedule::from_params(&off);
        all([
            eq(basic_grant(false, &grants), 121.33),
            eq(basic_grant(true, &grants), 302.39),
            eq(basic_grant(true, &g_off), 0.0),
        ])
    }));

    out.push(Check::new(
        "supplementary grant",
        all([
            eq(supplementary_grant(30000.0, &grants), 457.60),
            eq(supplementary_grant(36592.92, &grants), 457.60),
            eq(supplementary_grant(80000.0, &grants), 0.0),
        ]),
    ));

    out.push(Check::new(
        "parental endowment",
        all([
            rel_close(parental_endowment(13800.0), 2249.40 / 12.0, REL),
            abs_close(parental_endowment(13800.0), 187.45, 0.005),
            rel_close(parental_endowment(229200.0), 12835.20 / 12.0, REL),
            abs_close(parental_endowment(229200.0), 1069.60, 0.005),
            rel_close(parental_endowment(52000.0), 2704.00 / 12.0, REL),
            abs_close(parental_endowment(52000.0), 225.33, 0.005),
            eq(ENDOWMENT_DECILES.len() as f64, 10.0),
        ]),
    ));

    out.push(Check::new(
        "loan and work income",
        all([
            eq(e.loan_cap, 1054.17),
            eq(e.annual_interest, 0.0256),
            eq(e.horizon_months as f64, 420.0),
            eq(e.employment_rate, 0.72),
            eq(e.work_income_mean, 508.0),
            eq(
                loan_take_up(&Budget {
                    cost: 1444.0,
                    basic_grant: 0.0,
                    suppl_grant: 0.0,
                    endowment: 0.0,
                    work_income: 0.0,
                    loan_capacity: e.loan_cap,
                }),
                1054.17,
            ),
        ]),
    ));

    out.push(Check::new(
        "wage bands",
        all([
            eq(b.edu_high.mean, 5246.5),
            eq(b.edu_high.sd, 1445.76),
            eq(b.edu_low.mean, 3665.71),
            eq(b.edu_low.sd, 211.11),
            eq(b.prac_high.mean, 3059.43),
            eq(b.prac_high.sd, 343.62),
            eq(b.prac_low.mean, 2514.14),
            eq(b.prac_low.sd, 184.98),
            eq(b.constructor.mean, 7350.0),
            eq(b.constructor.sd, 634.29),
            eq(fallback_wage(b, Education::Educated), 3665.71),
            eq(expected_wage(&[], Education::Educated, b).value, 3665.71),
        ]),
    ));

    out.push(Check::new("scenario 3 neutralizes the premium", {
        let s3 = ScenarioSpec::scenario3().apply(&p).unwrap();
        let direct = consumption_premium(9000.0, 1000.0, 0.0, true, -5.0).value;
        let mut sim = Simulation::new(&s3, 5).unwrap();
        let mut seen = 0usize;
        let mut nonzero = 0usize;
        for _ in 0..20 {
            sim.step_observed(|r| {
                seen += 1;
                if r.premium.value != 0.0 || r.inputs.premium != 0.0 {
                    nonzero += 1;
                }
            });
        }
        all([
            eq(direct, 0.0),
            ensure(
                seen > 0 && nonzero == 0,
                format!("{nonzero} of {seen} decisions"),
            ),
        ])
    }));

    out.push(Check::new("omega 1 leaves the premium alone", {
        let x = PreferenceInputs {
            premium: 0.8123,
            disposition: 0.4,
            peer_influence: 1.3,
            personality: 0.6,
            centrality: 0.2,
            omega_econ: 1.0,
        };
        eq(preference(&x), 0.8123)
    }));

    out.push(Check::new("100 reports per run", {
        let mut q = p.clone();
        q.population.n_seniors_init = 300;
        q.population.carrying_capacity = 350;
        eq(edusim::run(&q, 1).unwrap().len() as f64, 100.0)
    }));

    out.push(Check::new("graduation after 5 ticks", graduation_delay()));

    out
}

fn graduation_delay() -> Result<(), String> {
    let mut p = SimulationParams::default();
    p.population.n_seniors_init = 400;
    p.population.carrying_capacity = 500;
    let mut sim = Simulation::new(&p, 3).unwrap();
    let mut enrolled_at = std::collections::HashMap::new();
    for _ in 0..30 {
        let before: Vec<AgentId> = sim.population().students.iter().map(|s| s.id).collect();
        let tick_students: std::collections::HashMap<AgentId, StudentState> = sim
            .population()
            .students
            .iter()
            .map(|s| (s.id, s.state))
            .collect();
        sim.step();
        let now = sim.tick();
        for s in &sim.population().students {
            if let StudentState::Enrolled { enrolled_tick, .. } = s.state {
                enrolled_at.entry(s.id).or_insert(enrolled_tick);
            }
        }
        let still: std::collections::HashSet<AgentId> =
            sim.population().students.iter().map(|s| s.id).collect();
        for id in before {
            if still.contains(&id) {
                continue;
            }
            let was_enrolled =
                matches!(tick_students.get(&id), Some(StudentState::Enrolled { .. }));
            if let (true, Some(t)) = (was_enrolled, enrolled_at.get(&id)) {
                if now != t + 5 {
                    return Err(format!("student {id} enrolled at {t} left at {now}"));
                }
            }
        }
    }
    Ok(())
}

// Properties checked on grids and full runs.

pub fn grant_grid() -> Result<(), String> {
    let e = SimulationParams::default().economics;
    let g = GrantSchedule::from_params(&e);
    let slope = e.suppl_max / (e.suppl_zero_threshold - e.suppl_full_threshold);
    let mut prev = supplementary_grant(0.0, &g);
    if prev != e.suppl_max {
        return Err(format!("grant at 0 is {prev}"));
    }
    for x in 1..=100_000 {
        let s = supplementary_grant(x as f64, &g);
        if s > prev {
            return Err(format!("grant rises at {x}"));
        }
        if prev - s > slope + 1e-9 {
            return Err(format!("grant jumps by {} at {x}", prev - s));
        }
        if !(0.0..=e.suppl_max).contains(&s) {
            return Err(format!("grant {s} out of range at {x}"));
        }
        prev = s;
    }
    ensure(prev == 0.0, format!("grant at 100000 is {prev}"))
}

pub fn logistic_grid() -> Result<(), String> {
    let mut prev = 0.0;
    for i in -3000..=3000 {
        let x = i as f64 / 100.0;
        let y = completion_probability(x);
        if !(y > 0.0 && y < 1.0) {
            return Err(format!("sigma({x}) = {y}"));
        }
        if (y + completion_probability(-x) - 1.0).abs() > 1e-12 {
            return Err(format!("asymmetric at {x}"));
        }
        if y <= prev {
            return Err(format!("not increasing at {x}"));
        }
        prev = y;
    }
    ensure(completion_probability(0.0) == 0.5, "sigma(0) != 0.5")
}

/// Every decision of a full run satisfies the budget identity and the
/// minimal-borrowing rule.
pub fn budget_identity_full_run(seed: u64) -> Result<(), String> {
    let p = SimulationParams::default();
    let mut sim = Simulation::new(&p, seed).map_err(|e| e.to_string())?;
    let mut err = None;
    let mut n = 0usize;
    for _ in 0..p.engine.ticks {
        sim.step_observed(|r| {
            n += 1;
            let b = &r.budget;
            let sum = b.basic_grant + b.suppl_grant + b.endowment + b.work_income + b.loan_capacity;
            let deficit =
                (b.cost - (b.basic_grant + b.suppl_grant + b.endowment + b.work_income)).max(0.0);
            let ok = (b.total() - sum).abs() <= 1e-9 * sum.max(1.0)
                && b.eligible()
                && (r.loan_monthly - deficit.min(b.loan_capacity)).abs() <= 1e-9
                && r.loan_monthly <= p.economics.loan_cap
                && b.total() >= b.cost;
            if !ok && err.is_none() {
                err = Some(format!(
                    "tick {} student {}: {:?} loan {}",
                    r.tick, r.student_id, b, r.loan_monthly
                ));
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => ensure(n > 1000, format!("only {n} decisions observed")),
    }
}

/// Classmate relations over `n` random placements are symmetric.
pub fn classmate_reciprocity(n: usize, seed: u64) -> Result<(), String> {
    let world = WorldGrid::new(20.0, 20.0);
    let mut r = rng(seed);
    let students: Vec<Student> = (0..n as AgentId)
        .map(|i| student(i, world.random_point(&mut r), 4.5))
        .collect();
    let lists: Vec<std::collections::HashSet<AgentId>> = students
        .iter()
        .map(|s| {
            classmates_of(s, &students)
                .into_iter()
                .map(|c| c.id)
                .collect()
        })
        .collect();
    let mut links = 0usize;
    for (i, l) in lists.iter().enumerate() {
        for &j in l {
            links += 1;
            if !lists[j as usize].contains(&(i as AgentId)) {
                return Err(format!("{i} lists {j} but not the reverse"));
            }
        }
        if l.contains(&(i as AgentId)) {
            return Err(format!("{i} lists itself"));
        }
    }
    ensure(links > 0, "no links at all")
}

pub fn ticks_csv(params: &SimulationParams, seed: u64) -> Vec<u8> {
    let reports = edusim::run(params, seed).unwrap();
    let mut buf = Vec::new();
    io::write_ticks(&mut buf, [(0usize, reports.as_slice())]).unwrap();
    buf
}

pub fn seeded_determinism() -> Result<(), String> {
    let p = SimulationParams::default();
    let a = ticks_csv(&p, 42);
    let b = ticks_csv(&p, 42);
    let c = ticks_csv(&p, 43);
    all([
        ensure(a == b, "same seed produced different bytes"),
        ensure(a != c, "different seeds gave equal output"),
    ])
}

/// Seniors are conserved every tick and no id is both a student and a senior.
pub fn conservation_full_run(seed: u64) -> Result<(), String> {
    let p = SimulationParams::default();
    let mut sim = Simulation::new(&p, seed).map_err(|e| e.to_string())?;
    for _ in 0..p.engine.ticks {
        let students_before = sim.population().students.len();
        let r = sim.step();
        if r.pop_seniors != r.expected_seniors() {
            return Err(format!(
                "tick {}: {} seniors, expected {}",
                r.tick,
                r.pop_seniors,
                r.expected_seniors()
            ));
        }
        let pop = sim.population();
        if pop.seniors.len() != r.pop_seniors {
            return Err(format!(
                "tick {}: report says {} seniors, world has {}",
                r.tick,
                r.pop_seniors,
                pop.seniors.len()
            ));
        }
        let left = r.n_graduates + r.n_to_practical;
        if students_before + r.n_hatched != pop.students.len() + left {
            return Err(format!(
                "tick {}: {} students + {} hatched != {} remaining + {} left",
                r.tick,
                students_before,
                r.n_hatched,
                pop.students.len(),
                left
            ));
        }
        let seniors: std::collections::HashSet<AgentId> =
            pop.seniors.iter().map(|s| s.id).collect();
        if let Some(s) = pop.students.iter().find(|s| seniors.contains(&s.id)) {
            return Err(format!(
                "tick {}: id {} is both student and senior",
                r.tick, s.id
            ));
        }
    }
    Ok(())
}
