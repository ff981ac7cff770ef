//! Diameter and Hausdorff distances between finite point clouds.

use super::{check_dim, GeometryError, PointCloud};

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

// Relative margin for triangle-inequality pruning so rounding never prunes
// the maximising pair.
const PRUNE_MARGIN: f64 = 1.0 + 1e-12;

/// Largest pairwise Euclidean distance; exact over the cloud.
pub fn diameter(cloud: &PointCloud) -> Result<f64, GeometryError> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    diameter_of(cloud, &all)
}

/// Diameter of the sub-cloud `indices`.
///
/// Points are ranked by distance to the centroid; a pair `(i, j)` can only
/// beat the incumbent if `r_i + r_j` exceeds it, which prunes everything
/// but the outer shell for compact clouds.
pub fn diameter_of(cloud: &PointCloud, indices: &[usize]) -> Result<f64, GeometryError> {
    diameter_capped(cloud, indices, f64::INFINITY)
}

/// Like [`diameter_of`], but may return any value `>= cap` once the
/// diameter is known to reach `cap`.
pub(crate) fn diameter_capped(cloud: &PointCloud, indices: &[usize], cap: f64) -> Result<f64, GeometryError> {
    if indices.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    if indices.len() == 1 {
        return Ok(0.0);
    }
    // incumbent from two farthest-point sweeps
    let mut best = 0.0f64;
    let mut anchor = indices[0];
    for _ in 0..2 {
        let (d, far) = indices
            .iter()
            .map(|&j| (distance(cloud.point(anchor), cloud.point(j)), j))
            .fold((0.0, anchor), |acc, cur| if cur.0 > acc.0 { cur } else { acc });
        best = best.max(d);
        anchor = far;
    }
    if best >= cap {
        return Ok(best);
    }

    let dim = cloud.dim();
    let mut centroid = vec![0.0; dim];
    for &i in indices {
        for (c, v) in centroid.iter_mut().zip(cloud.point(i)) {
            *c += v;
        }
    }
    let n = indices.len() as f64;
    centroid.iter_mut().for_each(|c| *c /= n);

    let radii: Vec<f64> = indices.iter().map(|&i| distance(cloud.point(i), &centroid)).collect();
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    // a point can only be in an improving pair if r + r_max reaches `best`
    let mut ranked: Vec<(f64, usize)> = radii
        .iter()
        .zip(indices)
        .filter(|(r, _)| (**r + r_max) * PRUNE_MARGIN >= best)
        .map(|(&r, &i)| (r, i))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    for (a, &(ri, i)) in ranked.iter().enumerate() {
        if 2.0 * ri * PRUNE_MARGIN < best {
            break;
        }
        let pi = cloud.point(i);
        for &(rj, j) in &ranked[a + 1..] {
            if (ri + rj) * PRUNE_MARGIN < best {
                break;
            }
            let d = distance(pi, cloud.point(j));
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

fn check_pair(p: &PointCloud, q: &PointCloud) -> Result<(), GeometryError> {
    if p.is_empty() || q.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    check_dim(p.dim(), q.dim())
}

/// Distance from `point` to the nearest point of `cloud`.
pub fn point_to_cloud(point: &[f64], cloud: &PointCloud) -> Result<f64, GeometryError> {
    if cloud.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    check_dim(cloud.dim(), point.len())?;
    Ok(cloud.iter().map(|q| squared_distance(point, q)).fold(f64::INFINITY, f64::min).sqrt())
}

/// `sup_{a ∈ P} min_{b ∈ Q} ‖a − b‖`.
///
/// Exact; the inner scan stops as soon as a point of `Q` is closer than the
/// running maximum, since such an `a` cannot raise it.
pub fn directed_distance(p: &PointCloud, q: &PointCloud) -> Result<f64, GeometryError> {
    check_pair(p, q)?;
    let order = scan_order(q.len());
    let mut best_sq = 0.0f64;
    for a in p.iter() {
        let mut nearest = f64::INFINITY;
        for &j in &order {
            let d = squared_distance(a, q.point(j));
            if d < nearest {
                nearest = d;
                if nearest <= best_sq {
                    break;
                }
            }
        }
        if nearest > best_sq {
            best_sq = nearest;
        }
    }
    Ok(best_sq.sqrt())
}

/// `max{D(P, Q), D(Q, P)}`.
pub fn hausdorff(p: &PointCloud, q: &PointCloud) -> Result<f64, GeometryError> {
    Ok(directed_distance(p, q)?.max(directed_distance(q, p)?))
}

/// Fixed pseudo-random permutation of `0..n` (multiplicative stride), so the
/// early exit in [`directed_distance`] does not depend on spatial order.
fn scan_order(n: usize) -> Vec<usize> {
    if n < 3 {
        return (0..n).collect();
    }
    let mut stride = (n as f64 * 0.618_033_988_749_895) as usize;
    while gcd(stride.max(1), n) != 1 {
        stride += 1;
    }
    (0..n).map(|k| (k * stride) % n).collect()
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud2(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_points(2, points).unwrap()
    }

    #[test]
    fn diameter_cases() {
        assert_eq!(diameter(&cloud2(&[[0.0, 0.0]])).unwrap(), 0.0);
        assert_eq!(diameter(&cloud2(&[[0.0, 0.0], [1.0, 1.0]])).unwrap(), 2f64.sqrt());
        assert!(matches!(diameter(&PointCloud::new(2, 0.0)), Err(GeometryError::EmptyCloud)));
    }

    #[test]
    fn diameter_matches_brute_force() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in [2, 3, 10, 57, 200] {
            let pts: Vec<[f64; 3]> = (0..n).map(|_| [next(), next() * 3.0, next() - 0.5]).collect();
            let c = PointCloud::from_points(3, &pts).unwrap();
            let mut brute = 0.0f64;
            for a in &pts {
                for b in &pts {
                    brute = brute.max(distance(a, b));
                }
            }
            assert_eq!(diameter(&c).unwrap(), brute);
        }
    }

    #[test]
    fn directed_and_symmetric() {
        let p = cloud2(&[[0.0, 0.0]]);
        let q = cloud2(&[[1.0, 0.0]]);
        assert_eq!(directed_distance(&p, &q).unwrap(), 1.0);
        let two = PointCloud::from_scalars(&[0.0, 1.0]).unwrap();
        let mid = PointCloud::from_scalars(&[0.5]).unwrap();
        assert_eq!(directed_distance(&two, &mid).unwrap(), 0.5);
        assert_eq!(hausdorff(&two, &mid).unwrap(), 0.5);
        assert_eq!(hausdorff(&two, &two).unwrap(), 0.0);
        let sub = PointCloud::from_scalars(&[1.0]).unwrap();
        assert_eq!(directed_distance(&sub, &two).unwrap(), 0.0);
        assert!(matches!(directed_distance(&two, &p), Err(GeometryError::DimensionMismatch { .. })));
        assert!(matches!(hausdorff(&PointCloud::new(1, 0.0), &two), Err(GeometryError::EmptyCloud)));
    }

    #[test]
    fn scan_order_is_a_permutation() {
        for n in [1, 2, 3, 10, 97, 1000] {
            let mut o = scan_order(n);
            o.sort_unstable();
            assert_eq!(o, (0..n).collect::<Vec<_>>());
        }
    }
}
