use super::{check_dim, dot, norm, GeometryError};

/// Iteration cap for cyclic projections onto half-space systems.
pub const HALFSPACE_MAX_ITERATIONS: usize = 10_000;
/// Exit tolerance on the largest constraint violation.
pub const HALFSPACE_TOLERANCE: f64 = 1e-10;

/// `⟨normal, x⟩ ≤ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Componentwise bounds; infinite entries allowed.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Intersection of half-spaces, optionally clipped by a bounding box.
    Halfspaces {
        constraints: Vec<Halfspace>,
        witness: Vec<f64>,
        bounds: Option<(Vec<f64>, Vec<f64>)>,
    },
}

/// Lower and upper corners of an axis-aligned box.
pub type BoxBounds = (Vec<f64>, Vec<f64>);

/// A closed convex subset of `R^dim` plus an optional sampling window
/// `[-R, R]^dim` used whenever the set has to be enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSetSpec {
    dim: usize,
    shape: Shape,
    window: Option<f64>,
}

impl ConvexSetSpec {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeometryError> {
        let dim = lower.len();
        if dim == 0 || upper.len() != dim {
            return Err(GeometryError::InvalidSet("box bounds must be nonempty and of equal length".into()));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(GeometryError::InvalidSet(format!("box bound [{l}, {u}] is empty")));
            }
        }
        Ok(ConvexSetSpec { dim, shape: Shape::Box { lower, upper }, window: None })
    }

    /// The interval `[lower, upper]` in one dimension.
    pub fn interval(lower: f64, upper: f64) -> Result<Self, GeometryError> {
        Self::new_box(vec![lower], vec![upper])
    }

    /// All of `R^dim`.
    pub fn whole_space(dim: usize) -> Result<Self, GeometryError> {
        Self::new_box(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self, GeometryError> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::InvalidSet("ball center must be finite".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidSet(format!("ball radius {radius} must be positive")));
        }
        Ok(ConvexSetSpec { dim: center.len(), shape: Shape::Ball { center, radius }, window: None })
    }

    pub fn new_halfspaces(
        constraints: Vec<Halfspace>,
        witness: Vec<f64>,
        bounds: Option<(Vec<f64>, Vec<f64>)>,
    ) -> Result<Self, GeometryError> {
        let dim = witness.len();
        if dim == 0 || witness.iter().any(|w| !w.is_finite()) {
            return Err(GeometryError::InvalidSet("witness point must be finite".into()));
        }
        for h in &constraints {
            check_dim(dim, h.normal.len())?;
            if h.normal.iter().any(|a| !a.is_finite()) || h.offset.is_nan() {
                return Err(GeometryError::InvalidSet("half-space data must be finite".into()));
            }
        }
        if let Some((lo, hi)) = &bounds {
            // validates ordering
            Self::new_box(lo.clone(), hi.clone())?;
            check_dim(dim, lo.len())?;
        }
        let set = ConvexSetSpec { dim, shape: Shape::Halfspaces { constraints, witness, bounds }, window: None };
        let Shape::Halfspaces { witness, .. } = &set.shape else { unreachable!() };
        if !set.contains(witness, 1e-9)? {
            return Err(GeometryError::InvalidSet("witness point violates the constraints".into()));
        }
        Ok(set)
    }

    /// Attach a sampling window `[-radius, radius]^dim`.
    pub fn with_window(mut self, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidSet(format!("window radius {radius} must be positive")));
        }
        self.window = Some(radius);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn window(&self) -> Option<f64> {
        self.window
    }

    pub fn is_bounded(&self) -> bool {
        match &self.shape {
            Shape::Box { lower, upper } => lower.iter().chain(upper).all(|v| v.is_finite()),
            Shape::Ball { .. } => true,
            Shape::Halfspaces { bounds, .. } => {
                bounds.as_ref().is_some_and(|(lo, hi)| lo.iter().chain(hi).all(|v| v.is_finite()))
            }
        }
    }

    /// Membership with additive slack `tol` on every constraint.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, GeometryError> {
        check_dim(self.dim, x.len())?;
        Ok(match &self.shape {
            Shape::Box { lower, upper } => in_box(lower, upper, x, tol),
            Shape::Ball { center, radius } => {
                let d: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                d <= radius + tol
            }
            Shape::Halfspaces { constraints, bounds, .. } => {
                constraints.iter().all(|h| dot(&h.normal, x) <= h.offset + tol)
                    && bounds.as_ref().is_none_or(|(lo, hi)| in_box(lo, hi, x, tol))
            }
        })
    }

    /// Project `x` onto the set. Exact for boxes and balls; half-space
    /// systems use cyclic alternating projections.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        check_dim(self.dim, x.len())?;
        match &self.shape {
            Shape::Box { lower, upper } => Ok(clamp(lower, upper, x)),
            Shape::Ball { center, radius } => {
                let offset: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let d = norm(&offset);
                if d <= *radius {
                    return Ok(x.to_vec());
                }
                let s = radius / d;
                Ok(center.iter().zip(&offset).map(|(c, o)| c + s * o).collect())
            }
            Shape::Halfspaces { constraints, bounds, .. } => {
                let mut z = x.to_vec();
                for _ in 0..HALFSPACE_MAX_ITERATIONS {
                    let mut worst = 0.0f64;
                    for h in constraints {
                        let excess = dot(&h.normal, &z) - h.offset;
                        if excess > 0.0 {
                            let nn = dot(&h.normal, &h.normal);
                            if nn == 0.0 {
                                return Err(GeometryError::NotSupported("zero normal with infeasible offset".into()));
                            }
                            worst = worst.max(excess / nn.sqrt());
                            for (zi, ai) in z.iter_mut().zip(&h.normal) {
                                *zi -= excess / nn * ai;
                            }
                        }
                    }
                    if let Some((lo, hi)) = bounds {
                        let clamped = clamp(lo, hi, &z);
                        for (a, b) in z.iter().zip(&clamped) {
                            worst = worst.max((a - b).abs());
                        }
                        z = clamped;
                    }
                    if worst <= HALFSPACE_TOLERANCE {
                        return Ok(z);
                    }
                }
                Err(GeometryError::NotSupported(format!(
                    "alternating projections did not converge in {HALFSPACE_MAX_ITERATIONS} iterations"
                )))
            }
        }
    }

    /// Finite box that contains every sampled point: the set's own bounds
    /// intersected with the window. `None` when that box is empty.
    pub fn sampling_box(&self) -> Result<Option<BoxBounds>, GeometryError> {
        let (mut lo, mut hi) = match &self.shape {
            Shape::Box { lower, upper } => (lower.clone(), upper.clone()),
            Shape::Ball { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            Shape::Halfspaces { bounds, .. } => {
                bounds.clone().unwrap_or_else(|| (vec![f64::NEG_INFINITY; self.dim], vec![f64::INFINITY; self.dim]))
            }
        };
        if let Some(r) = self.window {
            for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                *l = l.max(-r);
                *h = h.min(r);
            }
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(GeometryError::Unbounded);
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Ok(None);
        }
        Ok(Some((lo, hi)))
    }
}

fn in_box(lower: &[f64], upper: &[f64], x: &[f64], tol: f64) -> bool {
    x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
}

fn clamp(lower: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    x.iter().zip(lower.iter().zip(upper)).map(|(v, (l, u))| v.max(*l).min(*u)).collect()
}
