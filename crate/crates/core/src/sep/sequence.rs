use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{residual_parts, within, ApproxSolutionSet, ResidualTable, SepError, SplitProblem, FEASIBILITY_TOL};
use crate::geometry::{point_to_cloud, squared_distance, PointCloud};

/// How each entry is picked from its cloud. Ties always go to the lowest
/// cloud index, which is lexicographic order on `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    /// Closest to the previous entry. The first entry is the point closest
    /// to `start`, or the lexicographically smallest point without one.
    NearestToPrevious { start: Option<Vec<f64>> },
    /// Uniform draw from a seeded ChaCha8 stream.
    Random { seed: u64 },
    /// Farthest from the solution-set cloud `S(ε_min / 10)`.
    FarthestFromSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceEntry {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ApproxSequence {
    pub entries: Vec<SequenceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    /// One of `schedule`, `dimension`, `x-membership`, `y-membership`,
    /// `coupling`, `f-constraint`, `g-constraint`, `evaluation`.
    pub condition: String,
    /// Offending value: the residual part for constraint failures, else NaN.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub valid: bool,
    pub violation: Option<Violation>,
}

fn check_schedule(schedule: &[f64]) -> Result<(), SepError> {
    if let Some(e) = schedule.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(SepError::InvalidSchedule(format!("entries must be positive and finite, got {e}")));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SepError::InvalidSchedule("entries must be strictly decreasing".into()));
    }
    Ok(())
}

/// Draws one grid `ε_n`-solution per schedule entry using the problem's grids.
pub fn make_approx_sequence(
    prob: &SplitProblem,
    schedule: &[f64],
    selector: &Selector,
) -> Result<ApproxSequence, SepError> {
    check_schedule(schedule)?;
    let Some(&largest) = schedule.first() else {
        return Ok(ApproxSequence::default());
    };
    let smallest = schedule[schedule.len() - 1];
    let grids = prob.grids();
    let table = ResidualTable::build(prob, grids.h_out, grids.h_in, largest)?;
    let n = prob.dims().0;

    let solution = match selector {
        Selector::FarthestFromSolution => {
            let s = ApproxSolutionSet::from_table(prob, &table, smallest / 10.0, Vec::new())?;
            if s.cloud.is_empty() {
                return Err(SepError::EmptyApproxSet { epsilon: s.epsilon });
            }
            Some(s.cloud)
        }
        _ => None,
    };
    let mut rng = match selector {
        Selector::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut previous: Option<Vec<f64>> = match selector {
        Selector::NearestToPrevious { start } => start.clone(),
        _ => None,
    };

    let mut entries = Vec::with_capacity(schedule.len());
    for &epsilon in schedule {
        let set = ApproxSolutionSet::from_table(prob, &table, epsilon, Vec::new())?;
        let cloud = &set.cloud;
        if cloud.is_empty() {
            return Err(SepError::EmptyApproxSet { epsilon });
        }
        let pick = match (selector, &solution) {
            (Selector::NearestToPrevious { .. }, _) => match &previous {
                Some(prev) if prev.len() == cloud.dim() => nearest(cloud, prev),
                Some(_) => {
                    return Err(SepError::InvalidProblem("start point has the wrong dimension".into()));
                }
                None => 0,
            },
            (Selector::Random { .. }, _) => rng.as_mut().expect("seeded").gen_range(0..cloud.len()),
            (Selector::FarthestFromSolution, Some(s)) => farthest(cloud, s)?,
            (Selector::FarthestFromSolution, None) => unreachable!("solution cloud computed above"),
        };
        let point = cloud.point(pick);
        previous = Some(point.to_vec());
        entries.push(SequenceEntry { x: point[..n].to_vec(), y: point[n..].to_vec(), epsilon });
    }
    Ok(ApproxSequence { entries })
}

fn nearest(cloud: &PointCloud, target: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, p) in cloud.iter().enumerate() {
        let d = squared_distance(p, target);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

fn farthest(cloud: &PointCloud, solution: &PointCloud) -> Result<usize, SepError> {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, p) in cloud.iter().enumerate() {
        let d = point_to_cloud(p, solution)?;
        if d > best.0 {
            best = (d, i);
        }
    }
    Ok(best.1)
}

/// Checks every entry against its own `ε_n` on the problem's inner grids and
/// reports the first failure.
pub fn validate_approx_sequence(prob: &SplitProblem, seq: &ApproxSequence) -> Validation {
    let fail = |index: usize, condition: &str, residual: f64| Validation {
        valid: false,
        violation: Some(Violation { index, condition: condition.into(), residual }),
    };
    let (n, m) = prob.dims();
    for (index, e) in seq.entries.iter().enumerate() {
        let eps = e.epsilon;
        if !(eps > 0.0 && eps.is_finite()) || (index > 0 && eps > seq.entries[index - 1].epsilon) {
            return fail(index, "schedule", f64::NAN);
        }
        if e.x.len() != n || e.y.len() != m {
            return fail(index, "dimension", f64::NAN);
        }
        if !prob.c().contains(&e.x, FEASIBILITY_TOL).unwrap_or(false) {
            return fail(index, "x-membership", f64::NAN);
        }
        if !prob.q().contains(&e.y, FEASIBILITY_TOL).unwrap_or(false) {
            return fail(index, "y-membership", f64::NAN);
        }
        let parts = match residual_parts(prob, &e.x, &e.y) {
            Ok(p) => p,
            Err(_) => return fail(index, "evaluation", f64::NAN),
        };
        for (condition, value) in [("coupling", parts.coupling), ("f-constraint", parts.f), ("g-constraint", parts.g)] {
            if !within(value, eps) {
                return fail(index, condition, value);
            }
        }
    }
    Validation { valid: true, violation: None }
}
