use rayon::prelude::*;

use super::{SepError, SplitProblem, EVALUATION_BUDGET, FEASIBILITY_TOL};
use crate::expr::Expression;
use crate::geometry::{distance, sample_grid, sample_lattice, ConvexSetSpec, PointCloud, DEFAULT_GRID_CAP};

/// Sampled infimum of a bifunction in its second argument.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerMinimum {
    pub value: f64,
    pub argmin: Vec<f64>,
}

/// `min_p expr(fixed, p)` over the `h_in` lattice of `set`; ties go to the
/// lexicographically smallest `p`.
pub fn inner_infimum(
    expr: &Expression,
    fixed: &[f64],
    set: &ConvexSetSpec,
    h_in: f64,
) -> Result<InnerMinimum, SepError> {
    let grid = sample_grid(set, h_in)?;
    let mut best: Option<(f64, usize)> = None;
    for (i, p) in grid.iter().enumerate() {
        let v = expr.eval(&[fixed, p]).map_err(|source| SepError::Eval { bifunction: "bifunction", source })?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, i));
        }
    }
    let (value, i) = best.ok_or(SepError::Geometry(crate::geometry::GeometryError::EmptyCloud))?;
    Ok(InnerMinimum { value, argmin: grid.point(i).to_vec() })
}

/// Inner lattice of one set with a coarse-to-fine visiting order.
#[derive(Debug, Clone)]
pub struct InnerGrid {
    cloud: PointCloud,
    neighbors: Vec<(u32, u32)>,
    order: Vec<u32>,
    h: f64,
}

/// Outcome of one inner scan.
#[derive(Debug, Clone, Copy)]
struct Scan {
    /// `-min` when complete, otherwise a lower bound above the cutoff.
    residual: f64,
    complete: bool,
    /// Largest neighbour difference quotient; 0 for incomplete scans.
    lipschitz: f64,
}

impl InnerGrid {
    pub fn new(set: &ConvexSetSpec, h: f64) -> Result<Self, SepError> {
        let lattice = sample_lattice(set, h, DEFAULT_GRID_CAP)?;
        if lattice.cloud.is_empty() {
            return Err(SepError::Geometry(crate::geometry::GeometryError::EmptyCloud));
        }
        let order = bit_reversal_order(lattice.cloud.len());
        Ok(InnerGrid { cloud: lattice.cloud, neighbors: lattice.neighbors, order, h })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    /// Scans `expr(fixed, ·)`, stopping once `-value` exceeds `cutoff`.
    /// Complete scans report the exact grid minimum and the sampled Lipschitz constant along lattice edges.
    fn scan(
        &self,
        expr: &Expression,
        name: &'static str,
        fixed: &[f64],
        cutoff: f64,
        values: &mut Vec<f64>,
    ) -> Result<Scan, SepError> {
        values.clear();
        values.resize(self.cloud.len(), 0.0);
        let mut min = f64::INFINITY;
        for &i in &self.order {
            let i = i as usize;
            let v = expr
                .eval(&[fixed, self.cloud.point(i)])
                .map_err(|source| SepError::Eval { bifunction: name, source })?;
            values[i] = v;
            if v < min {
                min = v;
                if -min > cutoff {
                    return Ok(Scan { residual: -min, complete: false, lipschitz: 0.0 });
                }
            }
        }
        let lipschitz =
            self.neighbors.iter().map(|&(a, b)| (values[a as usize] - values[b as usize]).abs()).fold(0.0, f64::max)
                / self.h;
        Ok(Scan { residual: -min, complete: true, lipschitz })
    }
}

/// Visits `0..n` in bit-reversed order so early samples spread over the grid.
fn bit_reversal_order(n: usize) -> Vec<u32> {
    let bits = usize::BITS - (n.max(2) - 1).leading_zeros();
    (0..1usize << bits).map(|k| k.reverse_bits() >> (usize::BITS - bits)).filter(|&r| r < n).map(|r| r as u32).collect()
}

/// The three parts of the ε-residual at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualParts {
    /// `‖y − Ax‖`.
    pub coupling: f64,
    /// `−min_p f(x, p)`.
    pub f: f64,
    /// `−min_q g(y, q)`.
    pub g: f64,
}

impl ResidualParts {
    pub fn value(&self) -> f64 {
        self.coupling.max(self.f).max(self.g).max(0.0)
    }
}

/// Residual components at `(x, y)` on the problem's inner grids.
pub fn residual_parts(prob: &SplitProblem, x: &[f64], y: &[f64]) -> Result<ResidualParts, SepError> {
    let (n, m) = prob.dims();
    if x.len() != n || y.len() != m {
        return Err(SepError::Geometry(crate::geometry::GeometryError::DimensionMismatch {
            expected: n + m,
            got: x.len() + y.len(),
        }));
    }
    if !prob.c().contains(x, FEASIBILITY_TOL)? {
        return Err(SepError::Infeasible { which: "C" });
    }
    if !prob.q().contains(y, FEASIBILITY_TOL)? {
        return Err(SepError::Infeasible { which: "Q" });
    }
    let h_in = prob.grids().h_in;
    let coupling = distance(y, &prob.operator().apply(x)?);
    let f = -inner_infimum(prob.f(), x, prob.c(), h_in).map_err(rename("f"))?.value;
    let g = -inner_infimum(prob.g(), y, prob.q(), h_in).map_err(rename("g"))?.value;
    Ok(ResidualParts { coupling, f, g })
}

/// `max(‖y − Ax‖, −min_p f(x, p), −min_q g(y, q), 0)` on the inner grids;
/// `(x, y)` is a grid `ε`-solution iff this is at most `ε`.
pub fn eps_residual(prob: &SplitProblem, x: &[f64], y: &[f64]) -> Result<f64, SepError> {
    Ok(residual_parts(prob, x, y)?.value())
}

fn rename(name: &'static str) -> impl Fn(SepError) -> SepError {
    move |e| match e {
        SepError::Eval { source, .. } => SepError::Eval { bifunction: name, source },
        other => other,
    }
}

/// Per-coordinate residuals over the outer grids of `C` and `Q`.
///
/// The residual separates as `max(‖y − Ax‖, r_f(x), r_g(y))`, so `r_f` and
/// `r_g` are computed once per outer point instead of once per pair. Scans
/// stop early once a residual provably exceeds `cutoff`; every threshold
/// `ε <= cutoff` is then answered exactly.
#[derive(Debug, Clone)]
pub struct ResidualTable {
    xs: PointCloud,
    ys: PointCloud,
    rf: Vec<f64>,
    rg: Vec<f64>,
    cutoff: f64,
    lipschitz_f: f64,
    lipschitz_g: f64,
    h_out: f64,
    h_in: f64,
}

impl ResidualTable {
    pub fn build(prob: &SplitProblem, h_out: f64, h_in: f64, cutoff: f64) -> Result<Self, SepError> {
        super::Grids::new(h_out, h_in)?;
        let xs = sample_grid(prob.c(), h_out)?;
        let ys = sample_grid(prob.q(), h_out)?;
        let inner_c = InnerGrid::new(prob.c(), h_in)?;
        let inner_q = InnerGrid::new(prob.q(), h_in)?;
        for (outer, inner) in [(&xs, &inner_c), (&ys, &inner_q)] {
            let evaluations = outer.len() as f64 * inner.cloud.len() as f64;
            if evaluations > EVALUATION_BUDGET as f64 {
                return Err(SepError::WorkBudgetExceeded { evaluations, cap: EVALUATION_BUDGET });
            }
        }
        let (rf, lipschitz_f) = scan_all(prob.f(), "f", &xs, &inner_c, cutoff)?;
        let (rg, lipschitz_g) = scan_all(prob.g(), "g", &ys, &inner_q, cutoff)?;
        Ok(ResidualTable { xs, ys, rf, rg, cutoff, lipschitz_f, lipschitz_g, h_out, h_in })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn h_out(&self) -> f64 {
        self.h_out
    }

    pub fn h_in(&self) -> f64 {
        self.h_in
    }

    pub fn outer_x(&self) -> &PointCloud {
        &self.xs
    }

    pub fn outer_y(&self) -> &PointCloud {
        &self.ys
    }

    /// Sampled Lipschitz constants of `f(x, ·)` and `g(y, ·)` over the
    /// fully scanned outer points.
    pub fn lipschitz(&self) -> (f64, f64) {
        (self.lipschitz_f, self.lipschitz_g)
    }

    /// Bound on how far a grid infimum may sit above the true one: half a
    /// cell diagonal times the sampled Lipschitz constant.
    pub fn slack(&self) -> f64 {
        let (n, m) = (self.xs.dim() as f64, self.ys.dim() as f64);
        let half = 0.5 * self.h_in;
        (self.lipschitz_f * half * n.sqrt()).max(self.lipschitz_g * half * m.sqrt())
    }

    /// All outer pairs with residual at most `epsilon`, ordered by `x` index
    /// then `y` index (lexicographic in `(x, y)`), with their residuals.
    pub fn members(&self, prob: &SplitProblem, epsilon: f64) -> Result<(PointCloud, Vec<f64>), SepError> {
        if epsilon > self.cutoff {
            return Err(SepError::InvalidEpsilon(epsilon));
        }
        let (n, m) = (self.xs.dim(), self.ys.dim());
        let ys: Vec<usize> = (0..self.ys.len()).filter(|&j| super::within(self.rg[j], epsilon)).collect();
        let xs: Vec<usize> = (0..self.xs.len()).filter(|&i| super::within(self.rf[i], epsilon)).collect();
        let reach = epsilon + super::MEMBERSHIP_TOL;
        let a = prob.operator();
        let rows: Vec<Vec<(usize, f64)>> = xs
            .par_iter()
            .map(|&i| {
                let ax = a.apply_unchecked(self.xs.point(i));
                // ys are lexicographic, so the first coordinate is sorted
                let lo = ys.partition_point(|&j| self.ys.point(j)[0] < ax[0] - reach);
                let hi = ys.partition_point(|&j| self.ys.point(j)[0] <= ax[0] + reach);
                ys[lo..hi]
                    .iter()
                    .filter_map(|&j| {
                        let r = distance(self.ys.point(j), &ax).max(self.rf[i]).max(self.rg[j]).max(0.0);
                        super::within(r, epsilon).then_some((j, r))
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut cloud = PointCloud::new(n + m, self.h_out);
        let mut residuals = Vec::new();
        let mut buf = vec![0.0; n + m];
        for (&i, row) in xs.iter().zip(&rows) {
            buf[..n].copy_from_slice(self.xs.point(i));
            for &(j, r) in row {
                buf[n..].copy_from_slice(self.ys.point(j));
                cloud.push_unchecked(&buf);
                residuals.push(r);
            }
        }
        Ok((cloud, residuals))
    }
}

fn scan_all(
    expr: &Expression,
    name: &'static str,
    outer: &PointCloud,
    inner: &InnerGrid,
    cutoff: f64,
) -> Result<(Vec<f64>, f64), SepError> {
    let scans: Vec<Result<Scan, SepError>> = (0..outer.len())
        .into_par_iter()
        .map_init(Vec::new, |values, i| inner.scan(expr, name, outer.point(i), cutoff, values))
        .collect();
    let mut residuals = Vec::with_capacity(scans.len());
    let mut lipschitz = 0.0f64;
    for s in scans {
        let s = s?;
        debug_assert!(s.complete || s.residual > cutoff);
        residuals.push(s.residual);
        lipschitz = lipschitz.max(s.lipschitz);
    }
    Ok((residuals, lipschitz))
}
