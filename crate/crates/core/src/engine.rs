//! Per-tick scheduler.
//!
//! Every tick runs, in order: (a) exams for deciding students, (b) nothing (the
//! living situation is fixed at hatch), (c) budget, expectations and the
//! enrollment decision, (d) progress of enrolled students and graduation,
//! (e) hatching, (f) aging, (g) retirement and culling, (h) the tick report.
//! Within a phase agents are handled in ascending id order and all randomness
//! comes from the replication's single stream, so a seed fixes the trajectory.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::decision::{self, Decision, PreferenceInputs};
use crate::economics::{self, Budget, LoanTerms, Premium};
use crate::error::ConfigError;
use crate::network::{self, ReachProfile, SpatialIndex};
use crate::params::SimulationParams;
use crate::population::{self, AgentId, Education, Population, Senior, Student, StudentState};
use crate::SimRng;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TickReport {
    pub tick: u32,
    /// Students sitting the exam for the first time.
    pub cohort_size: usize,
    /// Students retrying after a failed exam.
    pub n_retriers: usize,
    pub n_exam_fail: usize,
    pub n_gave_up: usize,
    pub n_budget_fail: usize,
    pub n_deciders: usize,
    pub n_deciders_firstgen: usize,
    pub n_deciders_edufam: usize,
    pub n_completers: usize,
    pub n_completers_firstgen: usize,
    pub n_completers_edufam: usize,
    /// Mean monthly loan of this tick's first-generation enrollees, 0 when there are none.
    pub avg_loan_firstgen: f64,
    pub avg_loan_edufam: f64,
    pub n_graduates: usize,
    /// Students who became practical seniors (budget failure, declined, or gave up).
    pub n_to_practical: usize,
    pub n_hatched: usize,
    pub n_retired: usize,
    pub n_culled: usize,
    pub n_wage_fallback: usize,
    pub n_premium_dominated: usize,
    pub seniors_start: usize,
    pub pop_seniors: usize,
    pub share_educated: f64,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl TickReport {
    pub fn completion_rate(&self) -> Option<f64> {
        ratio(self.n_completers, self.n_deciders)
    }

    pub fn completion_rate_firstgen(&self) -> Option<f64> {
        ratio(self.n_completers_firstgen, self.n_deciders_firstgen)
    }

    pub fn completion_rate_edufam(&self) -> Option<f64> {
        ratio(self.n_completers_edufam, self.n_deciders_edufam)
    }

    pub fn loan_firstgen(&self) -> Option<f64> {
        (self.n_completers_firstgen > 0).then_some(self.avg_loan_firstgen)
    }

    pub fn loan_edufam(&self) -> Option<f64> {
        (self.n_completers_edufam > 0).then_some(self.avg_loan_edufam)
    }

    /// `pop_seniors` recomputed from the tick's flows.
    pub fn expected_seniors(&self) -> usize {
        self.seniors_start + self.n_graduates + self.n_to_practical - self.n_retired - self.n_culled
    }
}

/// Everything that went into one student's enrollment decision.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub tick: u32,
    pub student_id: AgentId,
    pub parent_educated: bool,
    pub budget: Budget,
    pub loan_monthly: f64,
    pub repayment: f64,
    pub expected_educated_wage: f64,
    pub expected_practical_wage: f64,
    pub premium: Premium,
    pub inputs: PreferenceInputs,
    pub preference: f64,
    pub probability: f64,
    pub decision: Decision,
}

pub struct Simulation {
    params: SimulationParams,
    population: Population,
    rng: SimRng,
    tick: u32,
    reach: ReachProfile,
}

impl Simulation {
    /// Builds the initial world and hatches the first cohort.
    pub fn new(params: &SimulationParams, seed: u64) -> Result<Self, ConfigError> {
        let mut rng = SimRng::seed_from_u64(seed);
        let mut population = Population::init_world(params, &mut rng)?;
        population.hatch_students(params, 0, &mut rng);
        Ok(Self {
            params: params.clone(),
            population,
            rng,
            tick: 0,
            reach: ReachProfile::from_params(&params.network),
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn params(&self) -> &SimulationParams {
        &self.params
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn step(&mut self) -> TickReport {
        self.step_observed(|_| {})
    }

    /// Advances one tick, passing every enrollment decision to `observe`.
    pub fn step_observed<F: FnMut(&DecisionRecord)>(&mut self, mut observe: F) -> TickReport {
        self.tick += 1;
        let tick = self.tick;
        let params = &self.params;
        let pop = &mut self.population;
        let rng = &mut self.rng;
        let dp = &params.decision;
        let ep = &params.economics;

        let mut report = TickReport {
            tick,
            seniors_start: pop.seniors.len(),
            ..TickReport::default()
        };

        // (a) exams
        let mut takers = Vec::new();
        let mut passed = Vec::new();
        let mut leaving: Vec<(usize, Education)> = Vec::new();
        for (i, s) in pop.students.iter_mut().enumerate() {
            if s.state != StudentState::Deciding {
                continue;
            }
            if s.failed_attempts == 0 {
                report.cohort_size += 1;
            } else {
                report.n_retriers += 1;
            }
            let outcome = decision::take_exam(s.ability, dp, rng);
            s.grade = Some(outcome.grade());
            takers.push(i);
            if outcome.passed() {
                passed.push(i);
            } else {
                report.n_exam_fail += 1;
                s.failed_attempts += 1;
                if s.failed_attempts >= dp.max_attempts {
                    report.n_gave_up += 1;
                    leaving.push((i, Education::Practical));
                }
            }
        }

        // (c) budget constraint
        let mut deciders: Vec<(usize, Budget)> = Vec::with_capacity(passed.len());
        for &i in &passed {
            let budget = economics::draw_budget(&pop.students[i], ep, rng);
            if budget.eligible() {
                deciders.push((i, budget));
            } else {
                report.n_budget_fail += 1;
                leaving.push((i, Education::Practical));
            }
        }

        // (c) phase 1: everything that only reads the tick-start snapshot
        let world = pop.world;
        let taker_index = SpatialIndex::build(
            world.width,
            world.height,
            takers.iter().map(|&i| pop.students[i].position).collect(),
        );
        let senior_index = SpatialIndex::build(
            world.width,
            world.height,
            pop.seniors.iter().map(|s| s.position).collect(),
        );
        let ratios: Vec<Option<f64>> = deciders
            .iter()
            .map(|&(i, _)| {
                let s = &pop.students[i];
                let grades: Vec<f64> = taker_index
                    .within(s.position, s.social_reach)
                    .into_iter()
                    .map(|k| takers[k])
                    .filter(|&j| j != i)
                    .filter_map(|j| pop.students[j].grade)
                    .collect();
                decision::peer_ratio(&grades, s.grade.expect("exam taken this tick"))
            })
            .collect();
        let cohort: Vec<f64> = ratios.iter().flatten().copied().collect();
        let thresholds = decision::PeerThresholds::from_ratios(
            &cohort,
            dp.peer_tail,
            dp.min_cohort_for_inversion,
        );

        let terms = LoanTerms::from_params(ep);
        let study_years = params.engine.study_duration_ticks;
        let mut records: Vec<DecisionRecord> = Vec::with_capacity(deciders.len());
        for (&(i, budget), &ratio) in deciders.iter().zip(&ratios) {
            let s = &pop.students[i];
            let obs = network::working_neighbor_wages_indexed(s, &pop.seniors, &senior_index);
            let ye = economics::expected_wage(&obs, Education::Educated, &ep.bands);
            let yp = economics::expected_wage(&obs, Education::Practical, &ep.bands);
            report.n_wage_fallback += usize::from(ye.fallback) + usize::from(yp.fallback);
            let loan = economics::loan_take_up(&budget);
            let repayment = economics::repayment_cost(loan, &terms, study_years);
            let premium = economics::consumption_premium(
                ye.value,
                yp.value,
                repayment,
                ep.premium_neutralized,
                ep.dominated_premium,
            );
            report.n_premium_dominated += usize::from(premium.dominated);
            let inputs = PreferenceInputs {
                premium: premium.value,
                disposition: decision::student_disposition(s.grade.expect("exam taken"), dp.kappa),
                peer_influence: decision::peer_influence(ratio, thresholds),
                personality: s.openness,
                centrality: decision::centrality(
                    s.position,
                    &pop.universities,
                    &world,
                    dp.invert_centrality,
                ),
                omega_econ: dp.omega_econ,
            };
            let preference = decision::preference(&inputs);
            records.push(DecisionRecord {
                tick,
                student_id: s.id,
                parent_educated: s.parent_educated(),
                budget,
                loan_monthly: loan,
                repayment,
                expected_educated_wage: ye.value,
                expected_practical_wage: yp.value,
                premium,
                inputs,
                preference,
                probability: decision::completion_probability(preference),
                decision: Decision::Practical,
            });
        }

        // (c) phase 2: draw and apply decisions
        let (mut loan_firstgen, mut loan_edufam) = (0.0, 0.0);
        for (&(i, _), record) in deciders.iter().zip(records.iter_mut()) {
            record.decision = decision::decide(record.probability, rng);
            let educated_family = record.parent_educated;
            if educated_family {
                report.n_deciders_edufam += 1;
            } else {
                report.n_deciders_firstgen += 1;
            }
            match record.decision {
                Decision::Enroll => {
                    let s = &mut pop.students[i];
                    s.state = StudentState::Enrolled {
                        ticks_remaining: params.engine.study_duration_ticks,
                        enrolled_tick: tick,
                    };
                    s.loan_monthly = record.loan_monthly;
                    report.n_completers += 1;
                    if educated_family {
                        report.n_completers_edufam += 1;
                        loan_edufam += record.loan_monthly;
                    } else {
                        report.n_completers_firstgen += 1;
                        loan_firstgen += record.loan_monthly;
                    }
                }
                Decision::Practical => leaving.push((i, Education::Practical)),
            }
            observe(record);
        }
        report.n_deciders = deciders.len();
        if report.n_completers_firstgen > 0 {
            report.avg_loan_firstgen = loan_firstgen / report.n_completers_firstgen as f64;
        }
        if report.n_completers_edufam > 0 {
            report.avg_loan_edufam = loan_edufam / report.n_completers_edufam as f64;
        }

        // (d) studies progress; graduation after the full duration
        for (i, s) in pop.students.iter_mut().enumerate() {
            if let StudentState::Enrolled {
                ticks_remaining,
                enrolled_tick,
            } = &mut s.state
            {
                if *enrolled_tick < tick {
                    *ticks_remaining -= 1;
                    if *ticks_remaining == 0 {
                        leaving.push((i, Education::Educated));
                        report.n_graduates += 1;
                    }
                }
            }
        }
        report.n_to_practical = leaving.len() - report.n_graduates;

        // students become seniors, in id order
        leaving.sort_unstable_by_key(|&(i, _)| i);
        let mut gone = vec![false; pop.students.len()];
        let mut new_seniors = Vec::with_capacity(leaving.len());
        for &(i, education) in &leaving {
            gone[i] = true;
            new_seniors.push(become_senior(
                &pop.students[i],
                education,
                params,
                &self.reach,
                &world,
                rng,
            ));
        }
        let mut k = 0;
        pop.students.retain(|_| {
            let keep = !gone[k];
            k += 1;
            keep
        });
        if !new_seniors.is_empty() {
            pop.seniors.extend(new_seniors);
            pop.seniors.sort_by_key(|s| s.id);
        }

        // (e) hatching
        report.n_hatched = pop.hatch_students(params, tick, rng);

        // (f) aging; students hatched this tick sit their exam at the decision age
        for s in &mut pop.seniors {
            s.age += 1;
        }
        for s in &mut pop.students {
            if s.hatched_tick != tick {
                s.age += 1;
            }
        }

        // (g) retirement and carrying capacity
        let culls = pop.cull_and_retire(params, rng);
        report.n_retired = culls.retired;
        report.n_culled = culls.culled;

        // (h)
        report.pop_seniors = pop.seniors.len();
        report.share_educated = pop.share_educated();
        debug_assert_eq!(report.pop_seniors, report.expected_seniors());
        report
    }
}

fn become_senior<R: Rng + ?Sized>(
    student: &Student,
    education: Education,
    params: &SimulationParams,
    reach: &ReachProfile,
    world: &population::WorldGrid,
    rng: &mut R,
) -> Senior {
    let band = population::draw_band(education, params.population.high_band_share, 0.0, rng);
    Senior {
        id: student.id,
        age: student.age,
        gender: student.gender,
        band,
        wage: economics::draw_wage(&params.economics.bands, band, rng),
        position: population::assign_location(world, education, params.population.segregation, rng),
        social_reach: network::assign_social_reach(reach, rng),
    }
}

/// Runs one replication for the configured number of ticks.
pub fn run(params: &SimulationParams, seed: u64) -> Result<Vec<TickReport>, ConfigError> {
    let mut sim = Simulation::new(params, seed)?;
    Ok((0..params.engine.ticks).map(|_| sim.step()).collect())
}
