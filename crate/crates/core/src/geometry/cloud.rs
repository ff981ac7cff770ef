use std::io::{self, Write};

use super::GeometryError;

/// Finite point set in `R^dim`, stored row-major in one buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    /// Grid spacing that generated the cloud; 0 when the points came from
    /// elsewhere.
    pub resolution: f64,
}

impl PointCloud {
    pub fn new(dim: usize, resolution: f64) -> Self {
        assert!(dim > 0, "point clouds need a positive dimension");
        PointCloud { dim, coords: Vec::new(), resolution }
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self, GeometryError> {
        let mut cloud = PointCloud::new(dim, 0.0);
        for p in points {
            cloud.push(p.as_ref())?;
        }
        Ok(cloud)
    }

    /// One-dimensional cloud from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self, GeometryError> {
        let pts: Vec<[f64; 1]> = values.iter().map(|v| [*v]).collect();
        Self::from_points(1, &pts)
    }

    pub fn push(&mut self, point: &[f64]) -> Result<(), GeometryError> {
        super::check_dim(self.dim, point.len())?;
        if point.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        self.coords.extend_from_slice(point);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, point: &[f64]) {
        debug_assert_eq!(point.len(), self.dim);
        self.coords.extend_from_slice(point);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Sub-cloud with the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut out = PointCloud::new(self.dim, self.resolution);
        out.coords.reserve(indices.len() * self.dim);
        for &i in indices {
            out.coords.extend_from_slice(self.point(i));
        }
        out
    }

    /// Union in the order `self` then `other`.
    pub fn union(&self, other: &PointCloud) -> Result<PointCloud, GeometryError> {
        super::check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        out.coords.extend_from_slice(&other.coords);
        out.resolution = self.resolution.max(other.resolution);
        Ok(out)
    }

    /// CSV with a header row and one point per row; coordinates carry 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W, column_prefix: &str) -> io::Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|k| format!("{column_prefix}{k}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for p in self.iter() {
            write_row(&mut out, p)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Writes comma-separated values at 17 significant digits without a newline.
pub fn write_row<W: Write>(out: &mut W, values: &[f64]) -> io::Result<()> {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.write_all(b",")?;
        }
        write!(out, "{}", format_sig17(*v))?;
    }
    Ok(())
}

pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_points() {
        let mut c = PointCloud::new(2, 0.0);
        assert!(matches!(c.push(&[1.0]), Err(GeometryError::DimensionMismatch { .. })));
        assert!(matches!(c.push(&[f64::NAN, 0.0]), Err(GeometryError::NonFinite)));
        c.push(&[1.0, 2.0]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.point(0), &[1.0, 2.0]);
    }

    #[test]
    fn csv_round_trips_values() {
        let c = PointCloud::from_points(2, &[[0.1, -2.5e-7], [1.0 / 3.0, 7.0]]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf, "z").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("z1,z2"));
        let parsed: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(parsed, vec![vec![0.1, -2.5e-7], vec![1.0 / 3.0, 7.0]]);
    }
}
