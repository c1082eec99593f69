//! The enrollment decision: exam, disposition, peer influence, openness,
//! centrality, the preference aggregate and the logistic completion probability.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::params::DecisionParams;
use crate::population::{Point, University, WorldGrid};

const GRADE_MIN: f64 = 1.0;
const GRADE_MAX: f64 = 10.0;

/// Persistent ability, drawn once per student and clipped to the grade scale.
pub fn draw_ability<R: Rng + ?Sized>(p: &DecisionParams, rng: &mut R) -> f64 {
    let noise = if p.ability_sd > 0.0 {
        Normal::new(0.0, p.ability_sd)
            .expect("sd is finite")
            .sample(rng)
    } else {
        0.0
    };
    (p.ability_mean + noise).clamp(GRADE_MIN, GRADE_MAX)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExamOutcome {
    Passed(f64),
    Failed(f64),
}

impl ExamOutcome {
    pub fn grade(self) -> f64 {
        match self {
            ExamOutcome::Passed(g) | ExamOutcome::Failed(g) => g,
        }
    }

    pub fn passed(self) -> bool {
        matches!(self, ExamOutcome::Passed(_))
    }
}

/// One exam attempt: the grade is the ability plus attempt noise, clipped to [1, 10].
pub fn take_exam<R: Rng + ?Sized>(ability: f64, p: &DecisionParams, rng: &mut R) -> ExamOutcome {
    let noise = if p.attempt_noise_sd > 0.0 {
        Normal::new(0.0, p.attempt_noise_sd)
            .expect("sd is finite")
            .sample(rng)
    } else {
        0.0
    };
    let grade = (ability + noise).clamp(GRADE_MIN, GRADE_MAX);
    if grade >= p.pass_threshold {
        ExamOutcome::Passed(grade)
    } else {
        ExamOutcome::Failed(grade)
    }
}

/// `(grade / 10)^kappa`.
pub fn student_disposition(grade: f64, kappa: f64) -> f64 {
    (grade / GRADE_MAX).powf(kappa)
}

/// Percentile of sorted data with linear interpolation between order statistics
/// (`q` in [0, 1]).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Cut-offs outside of which peer ratios are inverted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeerThresholds {
    pub low: f64,
    pub high: f64,
}

impl PeerThresholds {
    /// Thresholds from this tick's cohort of ratios. Cohorts smaller than
    /// `min_cohort` get no thresholds and every ratio passes through.
    pub fn from_ratios(ratios: &[f64], tail: f64, min_cohort: usize) -> Option<Self> {
        if ratios.is_empty() || ratios.len() < min_cohort {
            return None;
        }
        let mut sorted = ratios.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            low: percentile(&sorted, tail),
            high: percentile(&sorted, 1.0 - tail),
        })
    }
}

/// Class average over own grade; `None` when there are no classmates.
pub fn peer_ratio(classmate_grades: &[f64], own_grade: f64) -> Option<f64> {
    if classmate_grades.is_empty() || own_grade <= 0.0 {
        return None;
    }
    let mean = classmate_grades.iter().sum::<f64>() / classmate_grades.len() as f64;
    Some(mean / own_grade)
}

/// The ratio itself inside the middle of the cohort distribution, its inverse in
/// either tail, and 1 for students without classmates.
pub fn peer_influence(ratio: Option<f64>, thresholds: Option<PeerThresholds>) -> f64 {
    let Some(ratio) = ratio else {
        return 1.0;
    };
    match thresholds {
        Some(t) if ratio < t.low || ratio > t.high => 1.0 / ratio,
        _ => ratio,
    }
}

/// Openness to experience: a normal draw truncated to (0, 1).
pub fn openness<R: Rng + ?Sized>(p: &DecisionParams, rng: &mut R) -> f64 {
    if p.openness_sd == 0.0 {
        return p.openness_mean;
    }
    let normal = Normal::new(p.openness_mean, p.openness_sd).expect("sd is finite");
    loop {
        let o = normal.sample(rng);
        if o > 0.0 && o < 1.0 {
            return o;
        }
    }
}

/// Mean distance to the universities relative to the world diagonal.
pub fn centrality(
    position: Point,
    universities: &[University],
    world: &WorldGrid,
    invert: bool,
) -> f64 {
    assert!(
        !universities.is_empty(),
        "centrality needs at least one university"
    );
    let mean = universities
        .iter()
        .map(|u| u.position.distance(&position))
        .sum::<f64>()
        / universities.len() as f64;
    let cen = (mean / world.diagonal()).clamp(0.0, 1.0);
    if invert {
        1.0 - cen
    } else {
        cen
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreferenceInputs {
    pub premium: f64,
    pub disposition: f64,
    pub peer_influence: f64,
    pub personality: f64,
    pub centrality: f64,
    pub omega_econ: f64,
}

impl PreferenceInputs {
    pub fn omega_social(&self) -> f64 {
        1.0 - self.omega_econ
    }
}

/// Weighted sum of the economic premium and the social block.
pub fn preference(x: &PreferenceInputs) -> f64 {
    let social = x.peer_influence * x.disposition + x.personality + x.centrality;
    x.omega_econ * x.premium + x.omega_social() * social
}

/// Logistic function, evaluated without overflow for large |p|.
pub fn completion_probability(p: f64) -> f64 {
    if p >= 0.0 {
        1.0 / (1.0 + (-p).exp())
    } else {
        let e = p.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Enroll,
    Practical,
}

pub fn decide<R: Rng + ?Sized>(probability: f64, rng: &mut R) -> Decision {
    if rng.gen_bool(probability.clamp(0.0, 1.0)) {
        Decision::Enroll
    } else {
        Decision::Practical
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SimRng;
    use rand::SeedableRng;

    fn no_noise() -> DecisionParams {
        DecisionParams {
            attempt_noise_sd: 0.0,
            ..DecisionParams::default()
        }
    }

    #[test]
    fn exam_outcomes_without_noise() {
        let mut rng = SimRng::seed_from_u64(0);
        assert_eq!(
            take_exam(10.0, &no_noise(), &mut rng),
            ExamOutcome::Passed(10.0)
        );
        assert_eq!(
            take_exam(5.0, &no_noise(), &mut rng),
            ExamOutcome::Failed(5.0)
        );
        assert_eq!(
            take_exam(5.5, &no_noise(), &mut rng),
            ExamOutcome::Passed(5.5)
        );
    }

    #[test]
    fn grades_stay_on_scale() {
        let p = DecisionParams {
            attempt_noise_sd: 5.0,
            ..DecisionParams::default()
        };
        let mut rng = SimRng::seed_from_u64(1);
        for _ in 0..5000 {
            let g = take_exam(draw_ability(&p, &mut rng), &p, &mut rng).grade();
            assert!((1.0..=10.0).contains(&g));
        }
    }

    #[test]
    fn disposition_edge_cases() {
        assert_eq!(student_disposition(10.0, 1.8), 1.0);
        assert_eq!(student_disposition(10.0, 0.5), 1.0);
        assert_eq!(student_disposition(6.3, 1.0), 0.63);
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 5.0);
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert!((percentile(&v, 0.1) - 1.4).abs() < 1e-12);
        assert_eq!(percentile(&[7.0], 0.9), 7.0);
    }

    #[test]
    fn peer_influence_defaults() {
        assert_eq!(peer_influence(None, None), 1.0);
        assert_eq!(peer_ratio(&[], 7.0), None);
        assert_eq!(peer_ratio(&[7.0, 7.0], 7.0), Some(1.0));
        let t = Some(PeerThresholds {
            low: 0.9,
            high: 1.1,
        });
        assert_eq!(peer_influence(Some(1.0), t), 1.0);
        assert_eq!(peer_influence(Some(2.0), t), 0.5);
        assert_eq!(peer_influence(Some(0.5), t), 2.0);
    }

    #[test]
    fn small_cohorts_skip_inversion() {
        assert_eq!(PeerThresholds::from_ratios(&[1.0; 9], 0.1, 10), None);
        assert!(PeerThresholds::from_ratios(&[1.0; 10], 0.1, 10).is_some());
    }

    #[test]
    fn degenerate_openness() {
        let p = DecisionParams {
            openness_sd: 0.0,
            ..DecisionParams::default()
        };
        let mut rng = SimRng::seed_from_u64(3);
        assert!((0..100).all(|_| openness(&p, &mut rng) == 0.5));
    }

    #[test]
    fn centrality_extremes() {
        let world = WorldGrid::new(20.0, 20.0);
        let here = [University {
            id: 0,
            position: Point::new(3.0, 4.0),
        }];
        assert_eq!(centrality(Point::new(3.0, 4.0), &here, &world, false), 0.0);
        assert_eq!(centrality(Point::new(3.0, 4.0), &here, &world, true), 1.0);
        let corner = [University {
            id: 0,
            position: Point::new(20.0, 20.0),
        }];
        assert!((centrality(Point::new(0.0, 0.0), &corner, &world, false) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preference_endpoints() {
        let zero = PreferenceInputs {
            premium: 0.0,
            disposition: 0.0,
            peer_influence: 0.0,
            personality: 0.0,
            centrality: 0.0,
            omega_econ: 0.75,
        };
        assert_eq!(preference(&zero), 0.0);
        let econ_only = PreferenceInputs {
            premium: 0.47,
            disposition: 0.3,
            peer_influence: 1.2,
            personality: 0.6,
            centrality: 0.4,
            omega_econ: 1.0,
        };
        assert_eq!(preference(&econ_only), 0.47);
    }

    #[test]
    fn logistic_is_stable() {
        assert_eq!(completion_probability(0.0), 0.5);
        assert_eq!(completion_probability(1000.0), 1.0);
        assert_eq!(completion_probability(-1000.0), 0.0);
        assert!(completion_probability(-745.0) >= 0.0);
    }

    #[test]
    fn decide_limits() {
        let mut rng = SimRng::seed_from_u64(4);
        assert!((0..1000).all(|_| decide(1.0, &mut rng) == Decision::Enroll));
        assert!((0..1000).all(|_| decide(0.0, &mut rng) == Decision::Practical));
    }
}
