use serde::Serialize;

use super::checkers::{run_checker, CheckConfig, Property};
use super::AnalysisError;
use crate::expr::Expression;
use crate::geometry::{sample_lattice, ConvexSetSpec, DEFAULT_GRID_CAP};
use crate::sep::{SepError, FEASIBILITY_TOL};

/// Primal and dual (Minty) equilibrium conditions at a candidate point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MintyReport {
    /// `min_y h(candidate, y) >= -slack`.
    pub forward: bool,
    /// `max_y h(y, candidate) <= slack`.
    pub backward: bool,
    pub forward_min: f64,
    pub backward_max: f64,
    /// Half a cell diagonal times the sampled Lipschitz constant of both
    /// sections.
    pub slack: f64,
    pub grid_points: usize,
    /// Whether the monotone, hemicontinuous, convex-second and
    /// diagonal-nonneg checkers all hold on samples.
    pub hypotheses_hold: bool,
    pub warning: Option<String>,
}

/// Evaluates both conditions at `candidate` over the `h_in` lattice of `set`.
pub fn minty_check(
    expr: &Expression,
    set: &ConvexSetSpec,
    candidate: &[f64],
    h_in: f64,
) -> Result<MintyReport, AnalysisError> {
    if !set.contains(candidate, FEASIBILITY_TOL)? {
        return Err(SepError::Infeasible { which: "the set" }.into());
    }
    let lattice = sample_lattice(set, h_in, DEFAULT_GRID_CAP)?;
    let grid = &lattice.cloud;
    let mut forward = Vec::with_capacity(grid.len());
    let mut backward = Vec::with_capacity(grid.len());
    for y in grid.iter() {
        forward.push(expr.eval(&[candidate, y])?);
        backward.push(expr.eval(&[y, candidate])?);
    }
    let lipschitz = lattice
        .neighbors
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (a as usize, b as usize);
            (forward[a] - forward[b]).abs().max((backward[a] - backward[b]).abs())
        })
        .fold(0.0, f64::max)
        / h_in;
    let slack = 0.5 * lipschitz * h_in * (set.dim() as f64).sqrt();
    let forward_min = forward.iter().copied().fold(f64::INFINITY, f64::min);
    let backward_max = backward.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let config = CheckConfig::default();
    let mut hypotheses_hold = true;
    for p in [Property::Monotone, Property::Hemicontinuous, Property::ConvexSecond, Property::DiagonalNonneg] {
        hypotheses_hold &= run_checker(p, "bifunction", expr, set, &config)?.holds();
    }
    let (fwd, bwd) = (forward_min >= -slack, backward_max <= slack);
    let warning = (hypotheses_hold && fwd != bwd).then(|| {
        "forward and backward conditions disagree although the hypotheses hold on samples; \
         the grid is likely too coarse"
            .to_string()
    });
    Ok(MintyReport {
        forward: fwd,
        backward: bwd,
        forward_min,
        backward_max,
        slack,
        grid_points: grid.len(),
        hypotheses_hold,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_cases() {
        let line = ConvexSetSpec::whole_space(1).unwrap().with_window(10.0).unwrap();
        let f = Expression::bifunction("p^2 - x^2", "x", "p", 1).unwrap();
        let at0 = minty_check(&f, &line, &[0.0], 1.0 / 64.0).unwrap();
        assert!(at0.forward && at0.backward && at0.hypotheses_hold);
        assert!(at0.warning.is_none());
        let at1 = minty_check(&f, &line, &[1.0], 1.0 / 64.0).unwrap();
        assert!(!at1.forward && !at1.backward);
        assert_eq!(at1.forward_min, -1.0);
        assert_eq!(at1.backward_max, 1.0);

        let half = ConvexSetSpec::interval(0.0, f64::INFINITY).unwrap().with_window(10.0).unwrap();
        let g = Expression::bifunction("q - y", "y", "q", 1).unwrap();
        let r = minty_check(&g, &half, &[0.0], 1.0 / 64.0).unwrap();
        assert!(r.forward && r.backward);
    }

    #[test]
    fn candidate_must_be_feasible() {
        let unit = ConvexSetSpec::interval(0.0, 1.0).unwrap();
        let f = Expression::bifunction("p - x", "x", "p", 1).unwrap();
        assert!(minty_check(&f, &unit, &[2.0], 0.1).is_err());
    }
}
