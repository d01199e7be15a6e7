//! Candidate plane normals: Fibonacci lattices on spherical caps and the
//! coarse-to-fine search that shrinks the cap around the running best.
//!
//! Normals are identified with their antipodes, so every sample is stored
//! with a canonical sign and cap membership uses `|⟨a, b⟩|`.

use alloc::vec::Vec;

use crate::geometry::canonical_sign;
use crate::math::{acos, cos, sin, sqrt, to_degrees, to_radians, Vec3};
use crate::par;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Golden angle `π (3 − √5)` in radians.
pub const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Default cap radii (degrees) for rounds 2.. of the search.
pub const DEFAULT_DELTAS: [f64; 3] = [20.7, 6.44, 1.99];
/// Radius of the last cap in the default schedule.
pub const DEFAULT_FINAL_DELTA: f64 = 0.61;
pub const DEFAULT_CANDIDATES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error("direction must be a finite nonzero vector")]
    ZeroDirection,
    #[error("cap radius must lie in (0, 90] degrees, got {0}")]
    InvalidDelta(f64),
    #[error("cap radii must be strictly decreasing")]
    NonDecreasingSchedule,
    #[error("at least two candidates per round are required, got {0}")]
    TooFewCandidates(usize),
}

/// Unit vector with canonical sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vec3);

impl Direction {
    pub fn new(v: Vec3) -> Result<Self, SamplerError> {
        let u = v.normalized().ok_or(SamplerError::ZeroDirection)?;
        Ok(Direction(canonical_sign(u)))
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }

    /// Angle in degrees between the two lines, in `[0, 90]`.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        crate::geometry::direction_angle(self.0, other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCap {
    center: Direction,
    delta: f64,
}

impl SphericalCap {
    pub fn new(center: Direction, delta_degrees: f64) -> Result<Self, SamplerError> {
        if !(delta_degrees > 0.0 && delta_degrees <= 90.0) {
            return Err(SamplerError::InvalidDelta(delta_degrees));
        }
        Ok(SphericalCap { center, delta: delta_degrees })
    }

    /// All planes: the hemisphere about `+z`.
    pub fn full() -> Self {
        SphericalCap { center: Direction(Vec3::Z), delta: 90.0 }
    }

    pub fn center(&self) -> Direction {
        self.center
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

pub fn cap_contains(cap: &SphericalCap, v: &Direction) -> bool {
    let c = cap.center.0.dot(v.0).abs().min(1.0);
    to_degrees(acos(c)) < cap.delta
}

/// Orthonormal pair completing `n` to a right-handed frame.
fn tangent_frame(n: Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let u = helper.cross(n).normalized().unwrap_or(Vec3::Y);
    let v = n.cross(u);
    (u, v)
}

/// `n` golden-angle spiral samples inside the cap, area-uniform in
/// colatitude. A single sample is placed at the center.
pub fn fibonacci_cap(cap: &SphericalCap, n: usize) -> Vec<Direction> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return alloc::vec![cap.center];
    }
    let center = cap.center.0;
    let (u, v) = tangent_frame(center);
    let one_minus_cos = 1.0 - cos(to_radians(cap.delta));
    (0..n)
        .map(|k| {
            let z = 1.0 - one_minus_cos * (k as f64 + 0.5) / n as f64;
            let r = sqrt((1.0 - z * z).max(0.0));
            let phi = GOLDEN_ANGLE * k as f64;
            let p = center.scale(z) + u.scale(r * cos(phi)) + v.scale(r * sin(phi));
            Direction::new(p).expect("spiral point is unit length")
        })
        .collect()
}

/// Smallest angle (degrees) between any two samples.
pub fn min_pairwise_angle(samples: &[Direction]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            best = best.min(a.angle_to(b));
        }
    }
    best
}

/// Largest angle (degrees) from any probe to its nearest sample.
pub fn covering_radius(samples: &[Direction], probes: &[Direction]) -> f64 {
    probes.iter().map(|p| samples.iter().map(|s| s.angle_to(p)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

/// `n` directions drawn uniformly (by area) from the cap, seeded.
pub fn random_cap_probes(cap: &SphericalCap, n: usize, seed: u64) -> Vec<Direction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = cap.center.0;
    let (u, v) = tangent_frame(center);
    let one_minus_cos = 1.0 - cos(to_radians(cap.delta));
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = 1.0 - one_minus_cos * rng.random::<f64>();
        let phi = core::f64::consts::TAU * rng.random::<f64>();
        let r = sqrt((1.0 - z * z).max(0.0));
        let d = Direction::new(center.scale(z) + u.scale(r * cos(phi)) + v.scale(r * sin(phi)))
            .expect("probe is unit length");
        // Strict membership excludes the measure-zero rim.
        if cap_contains(cap, &d) {
            out.push(d);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleConfig {
    deltas: Vec<f64>,
    candidates: usize,
}

impl ScheduleConfig {
    /// `deltas[i]` is the cap radius of round `i + 2`; round 1 covers all planes.
    pub fn new(deltas: Vec<f64>, candidates: usize) -> Result<Self, SamplerError> {
        if candidates < 2 {
            return Err(SamplerError::TooFewCandidates(candidates));
        }
        for d in &deltas {
            if !(*d > 0.0 && *d <= 90.0) {
                return Err(SamplerError::InvalidDelta(*d));
            }
        }
        if deltas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(SamplerError::NonDecreasingSchedule);
        }
        Ok(ScheduleConfig { deltas, candidates })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn rounds(&self) -> usize {
        self.deltas.len() + 1
    }
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let mut deltas = DEFAULT_DELTAS.to_vec();
        deltas.push(DEFAULT_FINAL_DELTA);
        ScheduleConfig { deltas, candidates: DEFAULT_CANDIDATES }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub cap: SphericalCap,
    pub candidates: Vec<Direction>,
    pub scores: Vec<f64>,
    pub best_index: usize,
}

impl RoundTrace {
    pub fn best(&self) -> (Direction, f64) {
        (self.candidates[self.best_index], self.scores[self.best_index])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Direction,
    pub best_score: f64,
    pub rounds: Vec<RoundTrace>,
}

/// Index of the largest score; ties go to the lowest index, NaN never wins.
pub fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &s) in scores.iter().enumerate() {
        if s > best_val {
            best = i;
            best_val = s;
        }
    }
    best
}

/// Maximizes `score` over plane normals. Round 1 samples every plane;
/// later rounds sample a shrinking cap about the previous best, which is
/// kept as candidate 0.
pub fn coarse_to_fine<F>(score: F, schedule: &ScheduleConfig) -> SearchResult
where
    F: Fn(&Direction) -> f64 + Sync + Send,
{
    let n = schedule.candidates;
    let mut rounds: Vec<RoundTrace> = Vec::with_capacity(schedule.rounds());

    let first_cap = SphericalCap::full();
    let mut candidates = fibonacci_cap(&first_cap, n);
    let mut cap = first_cap;
    loop {
        let scores = par::map_indexed(candidates.len(), |i| score(&candidates[i]));
        let best_index = argmax_first(&scores);
        rounds.push(RoundTrace { cap, candidates, scores, best_index });
        let round = rounds.len();
        if round >= schedule.rounds() {
            break;
        }
        let (best, _) = rounds[round - 1].best();
        cap = SphericalCap::new(best, schedule.deltas[round - 1]).expect("validated schedule");
        candidates = Vec::with_capacity(n);
        candidates.push(best);
        candidates.extend(fibonacci_cap(&cap, n - 1));
    }
    let (best, best_score) = rounds.last().expect("at least one round").best();
    SearchResult { best, best_score, rounds }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(x: f64, y: f64, z: f64) -> Direction {
        Direction::new(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn single_sample_is_center() {
        let cap = SphericalCap::new(dir(1.0, 2.0, 3.0), 10.0).unwrap();
        assert_eq!(fibonacci_cap(&cap, 1), vec![cap.center()]);
    }

    #[test]
    fn hemisphere_samples_are_unit_and_distinct() {
        let s = fibonacci_cap(&SphericalCap::full(), 100);
        assert_eq!(s.len(), 100);
        for d in &s {
            assert!((d.vector().norm() - 1.0).abs() < 1e-12);
        }
        assert!(min_pairwise_angle(&s) > 0.0);
    }

    #[test]
    fn cap_membership() {
        let c = dir(0.2, -0.5, 0.8);
        let cap = SphericalCap::new(c, 20.7).unwrap();
        assert!(cap_contains(&cap, &c));
        assert!(cap_contains(&cap, &Direction::new(-c.vector()).unwrap()));
        let ortho = Direction::new(c.vector().cross(Vec3::X)).unwrap();
        assert!(!cap_contains(&cap, &ortho));
    }

    #[test]
    fn rejects_bad_schedules() {
        assert_eq!(ScheduleConfig::new(vec![5.0, 6.0], 8), Err(SamplerError::NonDecreasingSchedule));
        assert_eq!(ScheduleConfig::new(vec![5.0], 1), Err(SamplerError::TooFewCandidates(1)));
        assert!(SphericalCap::new(dir(0.0, 0.0, 1.0), 0.0).is_err());
        assert!(SphericalCap::new(dir(0.0, 0.0, 1.0), 90.5).is_err());
    }

    #[test]
    fn constant_score_picks_first_candidate() {
        let r = coarse_to_fine(|_| 1.0, &ScheduleConfig::default());
        assert_eq!(r.rounds.len(), 5);
        for round in &r.rounds {
            assert_eq!(round.best_index, 0);
        }
        assert_eq!(r.best, r.rounds[0].candidates[0]);
    }

    #[test]
    fn one_round_is_plain_argmax() {
        let schedule = ScheduleConfig::new(vec![], 32).unwrap();
        let target = dir(0.3, 0.1, 0.9);
        let r = coarse_to_fine(|d| -d.angle_to(&target), &schedule);
        let samples = fibonacci_cap(&SphericalCap::full(), 32);
        let expected =
            samples.iter().copied().min_by(|a, b| a.angle_to(&target).total_cmp(&b.angle_to(&target))).unwrap();
        assert_eq!(r.rounds.len(), 1);
        assert_eq!(r.best, expected);
    }

    #[test]
    fn nan_scores_never_win() {
        assert_eq!(argmax_first(&[f64::NAN, 0.5, 0.5, f64::NAN]), 1);
    }
}
