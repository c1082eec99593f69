//! Social-circles network.
//!
//! Links are implicit: an agent perceives every other agent within its social
//! reach (Euclidean distance, inclusive). Seniors carry heterogeneous, fat-tailed
//! reaches so perception need not be mutual; students share one reach so that
//! classmate links are reciprocal.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::params::NetworkParams;
use crate::population::{AgentId, Education, Point, Population, Senior, Student};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachProfile {
    pub senior_mean: f64,
    pub senior_sd: f64,
    pub floor: f64,
    /// Share of agents outside the normal body; includes the extreme share.
    pub outlier_share: f64,
    pub extreme_share: f64,
    pub outlier_value: f64,
    pub extreme_value: f64,
}

impl ReachProfile {
    pub fn from_params(p: &NetworkParams) -> Self {
        Self {
            senior_mean: p.senior_reach_mean,
            senior_sd: p.senior_reach_sd,
            floor: p.reach_floor,
            outlier_share: p.outlier_share,
            extreme_share: p.extreme_share,
            outlier_value: p.outlier_value,
            extreme_value: p.extreme_value,
        }
    }
}

/// Draws a senior's social reach: `extreme_share` of agents get the extreme
/// value, a further `outlier_share - extreme_share` the outlier value, and the
/// rest a normal draw truncated above the floor.
pub fn assign_social_reach<R: Rng + ?Sized>(profile: &ReachProfile, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    if u < profile.extreme_share {
        return profile.extreme_value;
    }
    if u < profile.outlier_share {
        return profile.outlier_value;
    }
    if profile.senior_sd == 0.0 {
        return profile.senior_mean.max(profile.floor);
    }
    let normal =
        Normal::new(profile.senior_mean, profile.senior_sd).expect("sd is finite and >= 0");
    for _ in 0..1000 {
        let r = normal.sample(rng);
        if r > profile.floor {
            return r;
        }
    }
    profile.senior_mean.max(profile.floor)
}

/// Weight of the parent link, `1 + r` with `r ~ U(0, 1)`.
pub fn parent_link_weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 + rng.gen::<f64>()
}

/// Uniform bucket grid over a set of positions, for radius queries.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
    points: Vec<Point>,
}

impl SpatialIndex {
    pub fn build(width: f64, height: f64, points: Vec<Point>) -> Self {
        let cell = 1.0;
        let cols = (width / cell).ceil().max(1.0) as usize;
        let rows = (height / cell).ceil().max(1.0) as usize;
        let mut buckets = vec![Vec::new(); cols * rows];
        for (i, p) in points.iter().enumerate() {
            let (c, r) = Self::cell_of(cell, cols, rows, *p);
            buckets[r * cols + c].push(i);
        }
        Self {
            cell,
            cols,
            rows,
            buckets,
            points,
        }
    }

    fn cell_of(cell: f64, cols: usize, rows: usize, p: Point) -> (usize, usize) {
        let c = ((p.x / cell).floor().max(0.0) as usize).min(cols - 1);
        let r = ((p.y / cell).floor().max(0.0) as usize).min(rows - 1);
        (c, r)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of all points within `radius` of `center` (inclusive), in ascending order.
    pub fn within(&self, center: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if radius < 0.0 || self.points.is_empty() {
            return out;
        }
        let lo_c = ((center.x - radius) / self.cell).floor().max(0.0) as usize;
        let lo_r = ((center.y - radius) / self.cell).floor().max(0.0) as usize;
        let hi_c = (((center.x + radius) / self.cell).floor().max(0.0) as usize).min(self.cols - 1);
        let hi_r = (((center.y + radius) / self.cell).floor().max(0.0) as usize).min(self.rows - 1);
        for r in lo_r..=hi_r {
            for c in lo_c..=hi_c {
                for &i in &self.buckets[r * self.cols + c] {
                    if self.points[i].distance(&center) <= radius {
                        out.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AgentRef {
    Senior(AgentId),
    Student(AgentId),
}

/// Every agent within `reach` of `position`, excluding `self_id`.
pub fn neighbors_of(
    self_id: AgentId,
    position: Point,
    reach: f64,
    population: &Population,
) -> Vec<AgentRef> {
    let seniors = population
        .seniors
        .iter()
        .filter(|s| s.id != self_id && s.position.distance(&position) <= reach)
        .map(|s| AgentRef::Senior(s.id));
    let students = population
        .students
        .iter()
        .filter(|s| s.id != self_id && s.position.distance(&position) <= reach)
        .map(|s| AgentRef::Student(s.id));
    seniors.chain(students).collect()
}

pub fn senior_neighbors(senior: &Senior, population: &Population) -> Vec<AgentRef> {
    neighbors_of(senior.id, senior.position, senior.social_reach, population)
}

pub fn student_neighbors(student: &Student, population: &Population) -> Vec<AgentRef> {
    neighbors_of(
        student.id,
        student.position,
        student.social_reach,
        population,
    )
}

/// Other students within the student's reach.
pub fn classmates_of<'a>(student: &Student, students: &'a [Student]) -> Vec<&'a Student> {
    students
        .iter()
        .filter(|o| {
            o.id != student.id && o.position.distance(&student.position) <= student.social_reach
        })
        .collect()
}

/// One wage a student observes when forming expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WageObservation {
    pub wage: f64,
    pub weight: f64,
    pub education: Education,
}

/// Wages of all seniors within the student's reach (weight 1) plus the parent's
/// wage, snapshotted at hatch, with the parent link weight regardless of distance.
pub fn working_neighbor_wages(student: &Student, seniors: &[Senior]) -> Vec<WageObservation> {
    let mut out: Vec<WageObservation> = seniors
        .iter()
        .filter(|s| {
            s.id != student.parent_id
                && s.position.distance(&student.position) <= student.social_reach
        })
        .map(|s| WageObservation {
            wage: s.wage,
            weight: 1.0,
            education: s.education(),
        })
        .collect();
    out.push(parent_observation(student));
    out
}

/// Same as [`working_neighbor_wages`], using a spatial index over `seniors`.
pub fn working_neighbor_wages_indexed(
    student: &Student,
    seniors: &[Senior],
    index: &SpatialIndex,
) -> Vec<WageObservation> {
    let mut out: Vec<WageObservation> = index
        .within(student.position, student.social_reach)
        .into_iter()
        .map(|i| &seniors[i])
        .filter(|s| s.id != student.parent_id)
        .map(|s| WageObservation {
            wage: s.wage,
            weight: 1.0,
            education: s.education(),
        })
        .collect();
    out.push(parent_observation(student));
    out
}

fn parent_observation(student: &Student) -> WageObservation {
    WageObservation {
        wage: student.parent_wage,
        weight: student.parent_weight,
        education: student.parent_band.education(),
    }
}
