//! The split equilibrium problem, its ε-residual, and grid approximations of
//! the approximate solution sets `S(ε)`.

mod approx;
mod residual;
mod sequence;

use thiserror::Error;

use crate::expr::{EvalError, Expression};
use crate::geometry::{ConvexSetSpec, GeometryError, LinearOperatorSpec};

pub use approx::{approx_solution_set, solution_set, ApproxSolutionSet, Certification};
pub use residual::{
    eps_residual, inner_infimum, residual_parts, InnerGrid, InnerMinimum, ResidualParts, ResidualTable,
};
pub use sequence::{
    make_approx_sequence, validate_approx_sequence, ApproxSequence, Selector, SequenceEntry, Validation, Violation,
};

/// Thresholds below this are replaced by it; exact-zero cuts on sampled data
/// carry no meaning.
pub const EPS_FLOOR: f64 = 1e-12;

/// Absolute slack on `residual <= ε` so values such as `0.15 - 0.05` land on
/// the intended side.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Tolerance for the `x ∈ C`, `y ∈ Q` preconditions on caller-supplied points.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Cap on outer points times inner points for one bifunction.
pub const EVALUATION_BUDGET: usize = 10_000_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SepError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("evaluating {bifunction}: {source}")]
    Eval {
        bifunction: &'static str,
        #[source]
        source: EvalError,
    },
    #[error("point is not in {which}")]
    Infeasible { which: &'static str },
    #[error("no grid point is an {epsilon}-solution")]
    EmptyApproxSet { epsilon: f64 },
    #[error("epsilon must be finite and nonnegative, got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("residual table needs {evaluations:e} evaluations, over the cap of {cap:e}")]
    WorkBudgetExceeded { evaluations: f64, cap: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

/// Outer (candidate) and inner (infimum) grid spacings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grids {
    pub h_out: f64,
    pub h_in: f64,
}

impl Grids {
    pub fn new(h_out: f64, h_in: f64) -> Result<Self, SepError> {
        for (name, h) in [("h_out", h_out), ("h_in", h_in)] {
            if !(h > 0.0 && h.is_finite()) {
                return Err(SepError::InvalidProblem(format!("{name} must be positive, got {h}")));
            }
        }
        Ok(Grids { h_out, h_in })
    }
}

/// `(C, Q, f, g, A)` together with the grids used to sample it.
#[derive(Debug, Clone)]
pub struct SplitProblem {
    c: ConvexSetSpec,
    q: ConvexSetSpec,
    f: Expression,
    g: Expression,
    a: LinearOperatorSpec,
    grids: Grids,
}

impl SplitProblem {
    /// `f` must be declared over two variables of dimension `dim C`, `g`
    /// over two of dimension `dim Q`, and `A` must map `C`'s space to `Q`'s.
    pub fn new(
        c: ConvexSetSpec,
        q: ConvexSetSpec,
        f: Expression,
        g: Expression,
        a: LinearOperatorSpec,
        grids: Grids,
    ) -> Result<Self, SepError> {
        let (n, m) = (c.dim(), q.dim());
        check_bifunction("f", &f, n)?;
        check_bifunction("g", &g, m)?;
        if a.rows() != m || a.cols() != n {
            return Err(SepError::InvalidProblem(format!("operator is {}x{}, expected {m}x{n}", a.rows(), a.cols())));
        }
        Ok(SplitProblem { c, q, f, g, a, grids })
    }

    pub fn c(&self) -> &ConvexSetSpec {
        &self.c
    }

    pub fn q(&self) -> &ConvexSetSpec {
        &self.q
    }

    pub fn f(&self) -> &Expression {
        &self.f
    }

    pub fn g(&self) -> &Expression {
        &self.g
    }

    pub fn operator(&self) -> &LinearOperatorSpec {
        &self.a
    }

    pub fn grids(&self) -> Grids {
        self.grids
    }

    pub fn with_grids(mut self, grids: Grids) -> Self {
        self.grids = grids;
        self
    }

    /// `(n, m)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.c.dim(), self.q.dim())
    }
}

fn check_bifunction(name: &str, expr: &Expression, dim: usize) -> Result<(), SepError> {
    let vars = expr.variables();
    if vars.len() != 2 || vars.iter().any(|v| v.dim != dim) {
        return Err(SepError::InvalidProblem(format!("{name} must be declared over two variables of dimension {dim}")));
    }
    Ok(())
}

pub(crate) fn checked_epsilon(epsilon: f64) -> Result<(f64, Option<String>), SepError> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(SepError::InvalidEpsilon(epsilon));
    }
    if epsilon < EPS_FLOOR {
        return Ok((EPS_FLOOR, Some(format!("epsilon {epsilon} raised to {EPS_FLOOR}"))));
    }
    Ok((epsilon, None))
}

#[inline]
pub(crate) fn within(residual: f64, epsilon: f64) -> bool {
    residual <= epsilon + MEMBERSHIP_TOL
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn example1(h: f64) -> SplitProblem {
        let c = ConvexSetSpec::whole_space(1).unwrap().with_window(2.0).unwrap();
        SplitProblem::new(
            c.clone(),
            c,
            Expression::bifunction("p^2 - x^2", "x", "p", 1).unwrap(),
            Expression::bifunction("-y^2*exp(-q^2)", "y", "q", 1).unwrap(),
            LinearOperatorSpec::identity(1),
            Grids::new(h, h).unwrap(),
        )
        .unwrap()
    }

    pub fn example2(h: f64) -> SplitProblem {
        let c = ConvexSetSpec::interval(0.0, 1.0).unwrap();
        SplitProblem::new(
            c.clone(),
            c,
            Expression::bifunction("if(x < 0.5, x, x^2/2)", "x", "p", 1).unwrap(),
            Expression::bifunction("if(y == 0.5, 0, 2)", "y", "q", 1).unwrap(),
            LinearOperatorSpec::identity(1),
            Grids::new(h, h).unwrap(),
        )
        .unwrap()
    }

    pub fn example3(h_out: f64, h_in: f64) -> SplitProblem {
        let c = ConvexSetSpec::interval(0.0, f64::INFINITY).unwrap().with_window(10.0).unwrap();
        SplitProblem::new(
            c.clone(),
            c,
            Expression::bifunction("p^2 - x^2", "x", "p", 1).unwrap(),
            Expression::bifunction("q - y", "y", "q", 1).unwrap(),
            LinearOperatorSpec::identity(1),
            Grids::new(h_out, h_in).unwrap(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_checks() {
        let c = ConvexSetSpec::interval(0.0, 1.0).unwrap();
        let f = Expression::bifunction("p - x", "x", "p", 1).unwrap();
        let wide = Expression::bifunction("p1 - x1", "x", "p", 2).unwrap();
        let grids = Grids::new(0.1, 0.1).unwrap();
        let id = LinearOperatorSpec::identity(1);
        assert!(SplitProblem::new(c.clone(), c.clone(), f.clone(), f.clone(), id.clone(), grids).is_ok());
        assert!(SplitProblem::new(c.clone(), c.clone(), wide, f.clone(), id, grids).is_err());
        let a = LinearOperatorSpec::identity(2);
        assert!(SplitProblem::new(c.clone(), c, f.clone(), f, a, grids).is_err());
        assert!(Grids::new(0.0, 0.1).is_err());
    }

    #[test]
    fn epsilon_floor() {
        assert_eq!(checked_epsilon(0.0).unwrap().0, EPS_FLOOR);
        assert!(checked_epsilon(0.0).unwrap().1.is_some());
        assert_eq!(checked_epsilon(0.5).unwrap(), (0.5, None));
        assert!(checked_epsilon(-1.0).is_err());
        assert!(checked_epsilon(f64::NAN).is_err());
    }
}
