use std::io::{self, Write};

use serde::Serialize;

use super::{checked_epsilon, ResidualTable, SepError, SplitProblem};
use crate::geometry::{format_sig17, write_row, PointCloud};

/// Grid metadata under which a cloud was certified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certification {
    pub h_out: f64,
    pub h_in: f64,
    /// Sampling window radius of `C`, if it has one.
    pub window_c: Option<f64>,
    pub window_q: Option<f64>,
    /// Bound on the overestimate of each sampled infimum.
    pub slack: f64,
}

/// Grid points `(x, y)` whose residual is at most `epsilon`.
#[derive(Debug, Clone)]
pub struct ApproxSolutionSet {
    pub epsilon: f64,
    /// Points of dimension `n + m`, `x` first.
    pub cloud: PointCloud,
    pub residuals: Vec<f64>,
    pub certification: Certification,
    /// Set when the cloud stands in for the exact solution set; it is then
    /// an outer approximation.
    pub outer_approximation: bool,
    pub notes: Vec<String>,
}

impl ApproxSolutionSet {
    pub(crate) fn from_table(
        prob: &SplitProblem,
        table: &ResidualTable,
        epsilon: f64,
        notes: Vec<String>,
    ) -> Result<Self, SepError> {
        let (cloud, residuals) = table.members(prob, epsilon)?;
        Ok(ApproxSolutionSet {
            epsilon,
            cloud,
            residuals,
            certification: Certification {
                h_out: table.h_out(),
                h_in: table.h_in(),
                window_c: prob.c().window(),
                window_q: prob.q().window(),
                slack: table.slack(),
            },
            outer_approximation: false,
            notes,
        })
    }

    /// Comment lines with the metadata, then `x1..xn,y1..ym,residual` rows.
    /// At most `limit` rows are written when given.
    pub fn write_csv<W: Write>(&self, mut out: W, n: usize, limit: Option<usize>) -> io::Result<()> {
        let c = &self.certification;
        writeln!(out, "# epsilon={}", format_sig17(self.epsilon))?;
        writeln!(out, "# h_out={} h_in={}", format_sig17(c.h_out), format_sig17(c.h_in))?;
        writeln!(out, "# window_c={} window_q={}", window_text(c.window_c), window_text(c.window_q))?;
        writeln!(out, "# slack={}", format_sig17(c.slack))?;
        let shown = limit.unwrap_or(usize::MAX).min(self.cloud.len());
        writeln!(out, "# points={} rows={}", self.cloud.len(), shown)?;
        let m = self.cloud.dim() - n;
        let mut header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        header.extend((1..=m).map(|k| format!("y{k}")));
        header.push("residual".into());
        writeln!(out, "{}", header.join(","))?;
        for (p, r) in self.cloud.iter().zip(&self.residuals).take(shown) {
            write_row(&mut out, p)?;
            writeln!(out, ",{}", format_sig17(*r))?;
        }
        Ok(())
    }

    pub fn to_json(&self, n: usize) -> serde_json::Value {
        #[derive(Serialize)]
        struct View<'a> {
            epsilon: f64,
            certification: &'a Certification,
            outer_approximation: bool,
            notes: &'a [String],
            x_dim: usize,
            points: Vec<&'a [f64]>,
            residuals: &'a [f64],
        }
        serde_json::to_value(View {
            epsilon: self.epsilon,
            certification: &self.certification,
            outer_approximation: self.outer_approximation,
            notes: &self.notes,
            x_dim: n,
            points: self.cloud.iter().collect(),
            residuals: &self.residuals,
        })
        .expect("finite values serialize")
    }
}

fn window_text(w: Option<f64>) -> String {
    w.map_or_else(|| "none".into(), format_sig17)
}

/// Grid approximation of `S(ε)` on the `h_out` product grid of `C × Q`, with
/// inner infima taken on the `h_in` grids. `ε = 0` is raised to
/// [`super::EPS_FLOOR`] and noted.
pub fn approx_solution_set(
    prob: &SplitProblem,
    epsilon: f64,
    h_out: f64,
    h_in: f64,
) -> Result<ApproxSolutionSet, SepError> {
    let (epsilon, note) = checked_epsilon(epsilon)?;
    let table = ResidualTable::build(prob, h_out, h_in, epsilon)?;
    ApproxSolutionSet::from_table(prob, &table, epsilon, note.into_iter().collect())
}

/// Outer approximation of the solution set by `S(tol)`, which contains it.
pub fn solution_set(prob: &SplitProblem, tol: f64, h_out: f64, h_in: f64) -> Result<ApproxSolutionSet, SepError> {
    let mut set = approx_solution_set(prob, tol, h_out, h_in)?;
    set.outer_approximation = true;
    set.notes.push(format!("outer approximation of the solution set by S({})", set.epsilon));
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::geometry::{diameter, sample_grid};

    #[test]
    fn example1_cloud_is_inside_the_box() {
        let prob = example1(0.005);
        let s = approx_solution_set(&prob, 0.01, 0.005, 0.005).unwrap();
        assert!(!s.cloud.is_empty());
        assert!(s.cloud.iter().all(|p| p.iter().all(|v| v.abs() <= 0.1 + 1e-12)));
        assert!(diameter(&s.cloud).unwrap() <= 0.28284 + 2.0 * 0.005 * 2f64.sqrt());
        assert!(!s.outer_approximation);
    }

    #[test]
    fn large_epsilon_keeps_the_whole_product() {
        let prob = example2(0.25);
        let s = approx_solution_set(&prob, 10.0, 0.25, 0.25).unwrap();
        assert_eq!(s.cloud.len(), 25);
    }

    #[test]
    fn example2_strip() {
        let prob = example2(0.05);
        let s = approx_solution_set(&prob, 0.1, 0.05, 0.05).unwrap();
        let grid = sample_grid(prob.c(), 0.05).unwrap();
        let mut expected = Vec::new();
        for x in grid.iter() {
            for y in grid.iter() {
                if (y[0] - x[0]).abs() <= 0.1 + 1e-12 {
                    expected.push([x[0], y[0]]);
                }
            }
        }
        let got: Vec<[f64; 2]> = s.cloud.iter().map(|p| [p[0], p[1]]).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn zero_epsilon_is_floored() {
        let prob = example3(0.5, 0.5);
        let s = approx_solution_set(&prob, 0.0, 0.5, 0.5).unwrap();
        assert_eq!(s.epsilon, super::super::EPS_FLOOR);
        assert_eq!(s.notes.len(), 1);
        assert_eq!(s.cloud.len(), 1);
        assert!(approx_solution_set(&prob, -1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn csv_and_json_exports() {
        let prob = example3(0.5, 0.5);
        let s = solution_set(&prob, 1e-3, 0.5, 0.5).unwrap();
        assert!(s.outer_approximation);
        let mut buf = Vec::new();
        s.write_csv(&mut buf, 1, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("x1,y1,residual"));
        assert!(text.lines().last().unwrap().starts_with("0.0000000000000000e0,0.0000000000000000e0,"));
        let json = s.to_json(1);
        assert_eq!(json["points"].as_array().unwrap().len(), 1);
        assert_eq!(json["certification"]["window_c"], 10.0);
    }
}
