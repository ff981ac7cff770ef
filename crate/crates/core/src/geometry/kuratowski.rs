use super::metric::{diameter_capped, distance, squared_distance};
use super::{GeometryError, PointCloud};

/// Greedy farthest-point (Gonzalez) clustering of a cloud.
#[derive(Debug, Clone)]
pub struct FarthestPointCover {
    /// Cloud indices of the chosen centres, in selection order.
    pub centers: Vec<usize>,
    /// Covering radius after each centre was added.
    pub radii: Vec<f64>,
}

/// Runs up to `max_centers` rounds of farthest-point selection, starting at
/// the lexicographically smallest point. Ties go to the lowest index.
/// Calls `visit(k, assignment, radius)` after each round with the current
/// nearest-centre assignment.
pub fn farthest_point_cover<F>(cloud: &PointCloud, max_centers: usize, mut visit: F) -> FarthestPointCover
where
    F: FnMut(usize, &[u32], f64) -> bool,
{
    let n = cloud.len();
    let first = (1..n).fold(0, |best, i| if lex_less(cloud.point(i), cloud.point(best)) { i } else { best });
    let mut centers = vec![first];
    let mut radii = Vec::new();
    let mut nearest: Vec<f64> = cloud.iter().map(|p| distance(p, cloud.point(first))).collect();
    let mut assign = vec![0u32; n];
    loop {
        let (far, radius) = argmax(&nearest);
        radii.push(radius);
        let k = centers.len();
        if !visit(k, &assign, radius) || k >= max_centers || radius == 0.0 {
            break;
        }
        centers.push(far);
        let c = cloud.point(far);
        for (i, p) in cloud.iter().enumerate() {
            let d = distance(p, c);
            if d < nearest[i] {
                nearest[i] = d;
                assign[i] = k as u32;
            }
        }
    }
    FarthestPointCover { centers, radii }
}

// Centroid refinement rounds applied to each farthest-point prefix.
const LLOYD_ROUNDS: usize = 3;

/// Upper estimate of the Kuratowski measure of a cloud using at most
/// `max_cover_sets` cover sets.
///
/// For each cover size `k` two candidate families are tried: `k`
/// equal-width slabs along each axis, and the nearest-centre cells of the
/// first `k` farthest-point centres followed by a few centroid (Lloyd)
/// rounds. The estimate is the smallest largest-cell diameter seen over
/// all prefixes and rounds, nudged up one ulp because cover sets need
/// diameter strictly below it. A cover by singletons gives 0. The estimate
/// is nonincreasing in the budget because a larger budget only adds
/// candidate covers.
pub fn kuratowski_estimate(cloud: &PointCloud, max_cover_sets: usize) -> Result<f64, GeometryError> {
    if cloud.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    if max_cover_sets == 0 {
        return Err(GeometryError::InvalidBudget);
    }
    let cover = farthest_point_cover(cloud, max_cover_sets, |_, _, _| true);
    let dim = cloud.dim();
    let mut best = f64::INFINITY;
    for k in 1..=cover.centers.len() {
        // k + 1 farthest-point centres are pairwise at least radii[k - 1]
        // apart, so any k sets put two of them together
        let separation = cover.radii[k - 1];
        if separation == 0.0 {
            best = 0.0;
            break;
        }
        if separation >= best {
            continue;
        }
        for axis in 0..dim {
            let cells = slab_cells(cloud, axis, k);
            best = best.min(max_cell_diameter(cloud, &cells, best)?);
        }
        let mut centers: Vec<f64> = cover.centers[..k].iter().flat_map(|&c| cloud.point(c).to_vec()).collect();
        let mut previous: Option<Vec<u32>> = None;
        for _ in 0..=LLOYD_ROUNDS {
            let assign = nearest_center(cloud, &centers, dim);
            if previous.as_ref() == Some(&assign) {
                break;
            }
            let cells = cells_of(&assign, k);
            best = best.min(max_cell_diameter(cloud, &cells, best)?);
            for (j, cell) in cells.iter().enumerate() {
                if cell.is_empty() {
                    continue;
                }
                let c = &mut centers[j * dim..(j + 1) * dim];
                c.iter_mut().for_each(|v| *v = 0.0);
                for &i in cell {
                    c.iter_mut().zip(cloud.point(i)).for_each(|(v, p)| *v += p);
                }
                c.iter_mut().for_each(|v| *v /= cell.len() as f64);
            }
            previous = Some(assign);
        }
    }
    Ok(if best == 0.0 { 0.0 } else { best.next_up() })
}

/// Largest cell diameter, or a value `>= bound` once it is known to reach it.
fn max_cell_diameter(cloud: &PointCloud, cells: &[Vec<usize>], bound: f64) -> Result<f64, GeometryError> {
    let mut worst = 0.0f64;
    for cell in cells.iter().filter(|c| !c.is_empty()) {
        worst = worst.max(diameter_capped(cloud, cell, bound)?);
        if worst >= bound {
            break;
        }
    }
    Ok(worst)
}

/// `k` equal-width slabs across the cloud's extent along `axis`.
fn slab_cells(cloud: &PointCloud, axis: usize, k: usize) -> Vec<Vec<usize>> {
    let (lo, hi) = cloud.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[axis]), h.max(p[axis])));
    let width = (hi - lo) / k as f64;
    let mut cells = vec![Vec::new(); k];
    for (i, p) in cloud.iter().enumerate() {
        let slot = if width > 0.0 { (((p[axis] - lo) / width) as usize).min(k - 1) } else { 0 };
        cells[slot].push(i);
    }
    cells
}

fn nearest_center(cloud: &PointCloud, centers: &[f64], dim: usize) -> Vec<u32> {
    cloud
        .iter()
        .map(|p| {
            let mut arg = 0;
            let mut min = f64::INFINITY;
            for (j, c) in centers.chunks_exact(dim).enumerate() {
                let d = squared_distance(p, c);
                if d < min {
                    min = d;
                    arg = j;
                }
            }
            arg as u32
        })
        .collect()
}

fn cells_of(assign: &[u32], k: usize) -> Vec<Vec<usize>> {
    let mut cells = vec![Vec::new(); k];
    for (i, &c) in assign.iter().enumerate() {
        cells[c as usize].push(i);
    }
    cells
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}
