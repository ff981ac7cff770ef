use super::{ConvexSetSpec, GeometryError, PointCloud};

/// Default cap on the number of lattice points a single sampling may visit.
pub const DEFAULT_GRID_CAP: usize = 20_000_000;

/// Membership slack for lattice points.
pub const GRID_MEMBERSHIP_TOL: f64 = 1e-12;

/// Lattice points of a set together with their axis-neighbour structure.
#[derive(Debug, Clone)]
pub struct LatticeSample {
    pub cloud: PointCloud,
    /// Pairs of cloud indices that differ by one step `h` along one axis.
    pub neighbors: Vec<(u32, u32)>,
}

/// All points `lower + k·h` of the (windowed) sampling box that lie in the
/// set, in lexicographic order. The lattice is anchored at the lower corner
/// of the sampling box; an upper endpoint within `1e-9·h` of a lattice
/// coordinate is snapped onto it.
pub fn sample_grid(set: &ConvexSetSpec, h: f64) -> Result<PointCloud, GeometryError> {
    sample_lattice(set, h, DEFAULT_GRID_CAP).map(|s| s.cloud)
}

pub fn sample_lattice(set: &ConvexSetSpec, h: f64, cap: usize) -> Result<LatticeSample, GeometryError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GeometryError::InvalidResolution(h));
    }
    let dim = set.dim();
    let Some((lo, hi)) = set.sampling_box()? else {
        return Ok(LatticeSample { cloud: PointCloud::new(dim, h), neighbors: Vec::new() });
    };
    let counts: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| axis_steps(*l, *u, h) + 1.0).collect();
    let points: f64 = counts.iter().product();
    if points > cap as f64 {
        return Err(GeometryError::BudgetExceeded { points, cap });
    }
    let total = points as usize;
    let axes: Vec<Vec<f64>> = lo.iter().zip(&hi).map(|(l, u)| axis_coordinates(*l, *u, h)).collect();

    let mut cloud = PointCloud::new(dim, h);
    // lattice linear index -> cloud index, u32::MAX when outside the set
    let mut slot = vec![u32::MAX; total];
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    for s in slot.iter_mut() {
        for k in 0..dim {
            point[k] = axes[k][idx[k]];
        }
        if set.contains(&point, GRID_MEMBERSHIP_TOL)? {
            *s = u32::try_from(cloud.len())
                .map_err(|_| GeometryError::BudgetExceeded { points: total as f64, cap: u32::MAX as usize })?;
            cloud.push_unchecked(&point);
        }
        // odometer, last axis fastest
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }

    let mut strides = vec![1usize; dim];
    for k in (0..dim.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * axes[k + 1].len();
    }
    let mut neighbors = Vec::new();
    for (lin, &s) in slot.iter().enumerate() {
        if s == u32::MAX {
            continue;
        }
        for k in 0..dim {
            let coord = (lin / strides[k]) % axes[k].len();
            if coord + 1 < axes[k].len() {
                let t = slot[lin + strides[k]];
                if t != u32::MAX {
                    neighbors.push((s, t));
                }
            }
        }
    }
    Ok(LatticeSample { cloud, neighbors })
}

fn axis_steps(lower: f64, upper: f64, h: f64) -> f64 {
    ((upper - lower) / h + 1e-9).floor()
}

fn axis_coordinates(lower: f64, upper: f64, h: f64) -> Vec<f64> {
    let steps = axis_steps(lower, upper, h) as usize;
    (0..=steps)
        .map(|k| {
            let v = lower + k as f64 * h;
            if (v - upper).abs() <= 1e-9 * h {
                upper
            } else {
                v.min(upper)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalars(c: &PointCloud) -> Vec<f64> {
        c.iter().map(|p| p[0]).collect()
    }

    #[test]
    fn unit_interval() {
        let set = ConvexSetSpec::interval(0.0, 1.0).unwrap();
        let c = sample_grid(&set, 0.5).unwrap();
        assert_eq!(scalars(&c), vec![0.0, 0.5, 1.0]);
        assert_eq!(c.resolution, 0.5);
    }

    #[test]
    fn unit_square_has_nine_points() {
        let set = ConvexSetSpec::new_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let s = sample_lattice(&set, 0.5, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(s.cloud.len(), 9);
        assert_eq!(s.cloud.point(1), &[0.0, 0.5]);
        assert_eq!(s.neighbors.len(), 12);
    }

    #[test]
    fn window_truncates_half_line() {
        let set = ConvexSetSpec::interval(0.0, f64::INFINITY).unwrap().with_window(1.0).unwrap();
        assert_eq!(scalars(&sample_grid(&set, 0.5).unwrap()), vec![0.0, 0.5, 1.0]);
        let unwindowed = ConvexSetSpec::interval(0.0, f64::INFINITY).unwrap();
        assert!(matches!(sample_grid(&unwindowed, 0.5), Err(GeometryError::Unbounded)));
    }

    #[test]
    fn endpoint_snapping() {
        let set = ConvexSetSpec::interval(0.0, 1.0).unwrap();
        let c = sample_grid(&set, 0.1).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(scalars(&c)[10], 1.0);
    }

    #[test]
    fn ball_points_are_members() {
        let set = ConvexSetSpec::new_ball(vec![0.0, 0.0], 1.0).unwrap();
        let s = sample_lattice(&set, 0.25, DEFAULT_GRID_CAP).unwrap();
        assert!(s.cloud.iter().all(|p| set.contains(p, 1e-12).unwrap()));
        assert!(s.cloud.iter().any(|p| p == [1.0, 0.0]));
        for &(a, b) in &s.neighbors {
            let (pa, pb) = (s.cloud.point(a as usize), s.cloud.point(b as usize));
            let d: f64 = pa.iter().zip(pb).map(|(u, v)| (u - v).abs()).sum();
            assert!((d - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn budget() {
        let set = ConvexSetSpec::new_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert!(matches!(sample_lattice(&set, 0.01, 1000), Err(GeometryError::BudgetExceeded { .. })));
        assert!(matches!(sample_grid(&set, 0.0), Err(GeometryError::InvalidResolution(_))));
    }

    #[test]
    fn halving_produces_superset_on_dyadic_box() {
        let set = ConvexSetSpec::new_box(vec![-1.0, 0.0], vec![1.0, 0.5]).unwrap();
        let coarse = sample_grid(&set, 0.125).unwrap();
        let fine = sample_grid(&set, 0.0625).unwrap();
        for p in coarse.iter() {
            assert!(fine.iter().any(|q| q == p));
        }
    }
}
