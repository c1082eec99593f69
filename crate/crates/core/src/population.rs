//! Agents and population dynamics: the world grid, senior initialization,
//! segregated placement, hatching of students, and retirement/culling.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decision;
use crate::economics;
use crate::error::ConfigError;
use crate::network::{self, ReachProfile};
use crate::params::SimulationParams;

pub type AgentId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Education {
    Educated,
    Practical,
}

impl Education {
    pub fn opposite(self) -> Self {
        match self {
            Education::Educated => Education::Practical,
            Education::Practical => Education::Educated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OccupationBand {
    EduHigh,
    EduLow,
    PracHigh,
    PracLow,
    Constructor,
}

impl OccupationBand {
    pub fn education(self) -> Education {
        match self {
            OccupationBand::EduHigh | OccupationBand::EduLow => Education::Educated,
            _ => Education::Practical,
        }
    }
}

/// A bounded (non-toroidal) plane. The left half is the practical side, the
/// right half the educated side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldGrid {
    pub width: f64,
    pub height: f64,
}

impl WorldGrid {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x < self.width && p.y >= 0.0 && p.y < self.height
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }

    pub fn side_of(&self, p: Point) -> Education {
        if p.x < self.width / 2.0 {
            Education::Practical
        } else {
            Education::Educated
        }
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            rng.gen_range(0.0..self.width),
            rng.gen_range(0.0..self.height),
        )
    }

    pub fn random_point_on_side<R: Rng + ?Sized>(&self, side: Education, rng: &mut R) -> Point {
        let half = self.width / 2.0;
        let x = match side {
            Education::Practical => rng.gen_range(0.0..half),
            Education::Educated => rng.gen_range(half..self.width),
        };
        Point::new(x, rng.gen_range(0.0..self.height))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Senior {
    pub id: AgentId,
    pub age: u32,
    pub gender: Gender,
    pub band: OccupationBand,
    /// Gross monthly wage in euros.
    pub wage: f64,
    pub position: Point,
    pub social_reach: f64,
}

impl Senior {
    pub fn education(&self) -> Education {
        self.band.education()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StudentState {
    Deciding,
    Enrolled {
        ticks_remaining: u32,
        enrolled_tick: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Student {
    pub id: AgentId,
    pub age: u32,
    pub gender: Gender,
    pub parent_id: AgentId,
    /// Parent's wage and band at hatch time.
    pub parent_wage: f64,
    pub parent_band: OccupationBand,
    /// Weight of the parent link in wage expectations, in [1, 2].
    pub parent_weight: f64,
    pub position: Point,
    pub social_reach: f64,
    /// Persistent ability on the 1-10 grade scale.
    pub ability: f64,
    /// Grade of the most recent exam attempt.
    pub grade: Option<f64>,
    pub failed_attempts: u32,
    pub lives_out: bool,
    pub openness: f64,
    pub state: StudentState,
    pub loan_monthly: f64,
    /// Gross yearly household income.
    pub household_income: f64,
    pub hatched_tick: u32,
}

impl Student {
    pub fn parent_educated(&self) -> bool {
        self.parent_band.education() == Education::Educated
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct University {
    pub id: usize,
    pub position: Point,
}

#[derive(Debug, Clone)]
pub struct Population {
    pub world: WorldGrid,
    pub universities: Vec<University>,
    /// Kept sorted by id.
    pub seniors: Vec<Senior>,
    /// Kept sorted by id.
    pub students: Vec<Student>,
    next_id: AgentId,
}

/// Picks a location for an agent of the given education. With probability
/// `1/2 + segregation/2` the agent lands on its own side of the world,
/// otherwise on the opposite side.
pub fn assign_location<R: Rng + ?Sized>(
    world: &WorldGrid,
    education: Education,
    segregation: f64,
    rng: &mut R,
) -> Point {
    let own_side = rng.gen_bool(own_side_probability(segregation));
    let side = if own_side {
        education
    } else {
        education.opposite()
    };
    world.random_point_on_side(side, rng)
}

pub fn own_side_probability(segregation: f64) -> f64 {
    0.5 + 0.5 * segregation
}

/// Draws a band within an education branch. Constructors only exist among practical
/// seniors when `constructor_share > 0`.
pub fn draw_band<R: Rng + ?Sized>(
    education: Education,
    high_share: f64,
    constructor_share: f64,
    rng: &mut R,
) -> OccupationBand {
    match education {
        Education::Educated => {
            if rng.gen_bool(high_share) {
                OccupationBand::EduHigh
            } else {
                OccupationBand::EduLow
            }
        }
        Education::Practical => {
            if constructor_share > 0.0 && rng.gen_bool(constructor_share) {
                OccupationBand::Constructor
            } else if rng.gen_bool(high_share) {
                OccupationBand::PracHigh
            } else {
                OccupationBand::PracLow
            }
        }
    }
}

/// Displaces `origin` by `steps` unit steps along one random heading. Steps that
/// would leave the world are not taken.
pub fn step_away<R: Rng + ?Sized>(
    world: &WorldGrid,
    origin: Point,
    steps: f64,
    rng: &mut R,
) -> Point {
    let heading = rng.gen_range(0.0..std::f64::consts::TAU);
    let (dy, dx) = heading.sin_cos();
    let mut pos = origin;
    let mut remaining = steps;
    while remaining > 0.0 {
        let len = remaining.min(1.0);
        let next = Point::new(pos.x + dx * len, pos.y + dy * len);
        if world.contains(next) {
            pos = next;
        }
        remaining -= len;
    }
    pos
}

/// Counts returned by [`Population::cull_and_retire`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CullCounts {
    pub retired: usize,
    pub culled: usize,
}

impl Population {
    /// Creates the initial seniors and universities.
    pub fn init_world<R: Rng + ?Sized>(
        params: &SimulationParams,
        rng: &mut R,
    ) -> Result<Self, ConfigError> {
        params.validate()?;
        let p = &params.population;
        let world = WorldGrid::new(p.world_width, p.world_height);
        let reach = ReachProfile::from_params(&params.network);
        let bands = &params.economics.bands;

        let mut seniors = Vec::with_capacity(p.n_seniors_init);
        for id in 0..p.n_seniors_init as AgentId {
            let age = rng.gen_range(p.init_age_min..=p.init_age_max);
            let gender = if rng.gen_bool(0.5) {
                Gender::Male
            } else {
                Gender::Female
            };
            let education = if rng.gen_bool(p.share_educated_init) {
                Education::Educated
            } else {
                Education::Practical
            };
            let band = draw_band(education, p.high_band_share, p.constructor_share, rng);
            let wage = economics::draw_wage(bands, band, rng);
            let position = assign_location(&world, education, p.segregation, rng);
            let social_reach = network::assign_social_reach(&reach, rng);
            seniors.push(Senior {
                id,
                age,
                gender,
                band,
                wage,
                position,
                social_reach,
            });
        }

        let universities = (0..p.n_universities)
            .map(|id| University {
                id,
                position: world.random_point(rng),
            })
            .collect();

        Ok(Self {
            world,
            universities,
            seniors,
            students: Vec::new(),
            next_id: p.n_seniors_init as AgentId,
        })
    }

    /// An empty world, mostly useful for tests and hand-built scenarios.
    pub fn empty(world: WorldGrid) -> Self {
        Self {
            world,
            universities: Vec::new(),
            seniors: Vec::new(),
            students: Vec::new(),
            next_id: 0,
        }
    }

    pub fn next_id(&mut self) -> AgentId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Inserts a senior keeping id order.
    pub fn add_senior(&mut self, senior: Senior) -> AgentId {
        if senior.id >= self.next_id {
            self.next_id = senior.id + 1;
        }
        let id = senior.id;
        let at = self.seniors.partition_point(|s| s.id < id);
        self.seniors.insert(at, senior);
        id
    }

    pub fn add_student(&mut self, student: Student) {
        if student.id >= self.next_id {
            self.next_id = student.id + 1;
        }
        let at = self.students.partition_point(|s| s.id < student.id);
        self.students.insert(at, student);
    }

    /// Each senior independently hatches a student with probability `birth_rate`.
    /// New students are appended and their count returned.
    pub fn hatch_students<R: Rng + ?Sized>(
        &mut self,
        params: &SimulationParams,
        tick: u32,
        rng: &mut R,
    ) -> usize {
        let p = &params.population;
        if p.birth_rate <= 0.0 {
            return 0;
        }
        let mut hatched = Vec::new();
        for parent in &self.seniors {
            if !rng.gen_bool(p.birth_rate) {
                continue;
            }
            let id = self.next_id + hatched.len() as AgentId;
            hatched.push(new_student(id, parent, &self.world, params, tick, rng));
        }
        self.next_id += hatched.len() as AgentId;
        let n = hatched.len();
        self.students.extend(hatched);
        n
    }

    /// Removes seniors above the retirement age, then random seniors until the
    /// carrying capacity is respected.
    pub fn cull_and_retire<R: Rng + ?Sized>(
        &mut self,
        params: &SimulationParams,
        rng: &mut R,
    ) -> CullCounts {
        let p = &params.population;
        let before = self.seniors.len();
        self.seniors.retain(|s| s.age <= p.retirement_age);
        let retired = before - self.seniors.len();

        let n = self.seniors.len();
        let mut culled = 0;
        if n > p.carrying_capacity {
            let excess = n - p.carrying_capacity;
            let mut drop = vec![false; n];
            for i in index::sample(rng, n, excess) {
                drop[i] = true;
            }
            let mut k = 0;
            self.seniors.retain(|_| {
                let keep = !drop[k];
                k += 1;
                keep
            });
            culled = excess;
        }
        CullCounts { retired, culled }
    }

    pub fn share_educated(&self) -> f64 {
        if self.seniors.is_empty() {
            return 0.0;
        }
        let educated = self
            .seniors
            .iter()
            .filter(|s| s.education() == Education::Educated)
            .count();
        educated as f64 / self.seniors.len() as f64
    }
}

fn new_student<R: Rng + ?Sized>(
    id: AgentId,
    parent: &Senior,
    world: &WorldGrid,
    params: &SimulationParams,
    tick: u32,
    rng: &mut R,
) -> Student {
    let p = &params.population;
    let position = step_away(world, parent.position, p.steps_from_parent, rng);
    let gender = if rng.gen_bool(0.5) {
        Gender::Male
    } else {
        Gender::Female
    };
    let ability = decision::draw_ability(&params.decision, rng);
    let openness = decision::openness(&params.decision, rng);
    let lives_out = rng.gen_bool(p.lives_out_share);
    let parent_weight = network::parent_link_weight(rng);
    Student {
        id,
        age: p.decision_age,
        gender,
        parent_id: parent.id,
        parent_wage: parent.wage,
        parent_band: parent.band,
        parent_weight,
        position,
        social_reach: params.network.student_reach,
        ability,
        grade: None,
        failed_attempts: 0,
        lives_out,
        openness,
        state: StudentState::Deciding,
        loan_monthly: 0.0,
        household_income: parent.wage * 12.0,
        hatched_tick: tick,
    }
}
