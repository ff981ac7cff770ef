//! Sampled refutation tests for bifunction hypotheses. A checker can refute
//! a property with a replayable counterexample; it never proves one.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::AnalysisError;
use crate::expr::Expression;
use crate::geometry::{ConvexSetSpec, GeometryError, GRID_MEMBERSHIP_TOL};

/// Absolute part of the refutation threshold; the threshold used is
/// `TOL_CHECK · (1 + scale)` with `scale` the magnitude of the terms compared.
pub const TOL_CHECK: f64 = 1e-9;

// Tuples of base points are enumerated exhaustively up to this count.
const TUPLE_CAP: usize = 40_000;

// Base-point lattices larger than this are replaced by random points only.
const BASE_GRID_CAP: usize = 4_096;

// Sequential probes judge the last TAIL entries of their schedule.
const TAIL: usize = 3;

// A gap that shrinks below this fraction across the tail is read as decaying
// (continuous behaviour seen at finite resolution).
const PERSIST_RATIO: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Monotone,
    Hemicontinuous,
    ConvexSecond,
    LscSecond,
    UscFirst,
    DiagonalNonneg,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Monotone,
        Property::Hemicontinuous,
        Property::ConvexSecond,
        Property::LscSecond,
        Property::UscFirst,
        Property::DiagonalNonneg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Monotone => "monotone",
            Property::Hemicontinuous => "hemicontinuous",
            Property::ConvexSecond => "convex-second",
            Property::LscSecond => "lsc-second",
            Property::UscFirst => "usc-first",
            Property::DiagonalNonneg => "diagonal-nonneg",
        }
    }

    pub fn from_name(name: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnSamples,
    Refuted,
}

/// Inputs and evaluated terms of the worst violation found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub inputs: BTreeMap<String, Vec<f64>>,
    pub values: BTreeMap<String, f64>,
    /// Amount by which the defining inequality fails.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckerReport {
    pub property: String,
    /// Which bifunction was checked, e.g. `f`.
    pub subject: String,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub samples: usize,
    pub sampling: String,
}

impl CheckerReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsOnSamples
    }
}

/// Sampling parameters shared by all checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    /// Random tuples drawn in addition to the base-grid tuples.
    pub random_samples: usize,
    /// Base grid: each side of the sampling box split into this many parts.
    pub grid_divisions: usize,
    /// Step sizes for the hemicontinuity probe, decreasing.
    pub t_schedule: Vec<f64>,
    /// Mixing weights for the convexity test.
    pub lambdas: Vec<f64>,
    /// Probe radii are `r0 · 2^-k` for `k = 1..=radii`.
    pub radii: usize,
    pub directions: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            random_samples: 256,
            grid_divisions: 16,
            t_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            lambdas: vec![0.25, 0.5, 0.75],
            radii: 8,
            directions: 16,
        }
    }
}

impl CheckConfig {
    pub fn with_seed(seed: u64) -> Self {
        CheckConfig { seed, ..Default::default() }
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        let t = &self.t_schedule;
        if t.len() < TAIL || t.windows(2).any(|w| w[1] >= w[0]) || t.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
            return Err(AnalysisError::InvalidArgument(format!(
                "t schedule must hold at least {TAIL} decreasing values in (0, 1]"
            )));
        }
        if t[t.len() - 1] >= 1e-5 {
            return Err(AnalysisError::InvalidArgument("t schedule must reach below 1e-5".into()));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(AnalysisError::InvalidArgument("lambdas must lie in (0, 1)".into()));
        }
        if self.radii < TAIL || self.directions == 0 || self.grid_divisions == 0 {
            return Err(AnalysisError::InvalidArgument("radii, directions and grid divisions must be positive".into()));
        }
        Ok(())
    }
}

/// Runs one checker on `expr` (declared over two variables) over `set`.
pub fn run_checker(
    property: Property,
    subject: &str,
    expr: &Expression,
    set: &ConvexSetSpec,
    config: &CheckConfig,
) -> Result<CheckerReport, AnalysisError> {
    config.validate()?;
    let mut ctx = Context::new(property, subject, expr, set, config)?;
    match property {
        Property::Monotone => ctx.monotone()?,
        Property::Hemicontinuous => ctx.hemicontinuous()?,
        Property::ConvexSecond => ctx.convex_second()?,
        Property::LscSecond => ctx.lsc_second()?,
        Property::UscFirst => ctx.usc_first()?,
        Property::DiagonalNonneg => ctx.diagonal()?,
    }
    Ok(ctx.finish())
}

pub fn check_monotone(
    expr: &Expression,
    set: &ConvexSetSpec,
    config: &CheckConfig,
) -> Result<CheckerReport, AnalysisError> {
    run_checker(Property::Monotone, "bifunction", expr, set, config)
}

pub fn check_hemicontinuous(
    expr: &Expression,
    set: &ConvexSetSpec,
    config: &CheckConfig,
) -> Result<CheckerReport, AnalysisError> {
    run_checker(Property::Hemicontinuous, "bifunction", expr, set, config)
}

pub fn check_convex_second(
    expr: &Expression,
    set: &ConvexSetSpec,
    config: &CheckConfig,
) -> Result<CheckerReport, AnalysisError> {
    run_checker(Property::ConvexSecond, "bifunction", expr, set, config)
}

pub fn check_lsc_second(
    expr: &Expression,
    set: &ConvexSetSpec,
    config: &CheckConfig,
) -> Result<CheckerReport, AnalysisError> {
    run_checker(Property::LscSecond, "bifunction", expr, set, config)
}

pub fn check_usc_first(
    expr: &Expression,
    set: &ConvexSetSpec,
    config: &CheckConfig,
) -> Result<CheckerReport, AnalysisError> {
    run_checker(Property::UscFirst, "bifunction", expr, set, config)
}

pub fn check_diagonal_nonneg(
    expr: &Expression,
    set: &ConvexSetSpec,
    config: &CheckConfig,
) -> Result<CheckerReport, AnalysisError> {
    run_checker(Property::DiagonalNonneg, "bifunction", expr, set, config)
}

#[inline]
fn threshold(scale: f64) -> f64 {
    TOL_CHECK * (1.0 + scale)
}

/// Extreme probe value and where it was attained.
type Extreme = (f64, Vec<f64>);

struct Candidate {
    key: Vec<f64>,
    cex: Counterexample,
}

struct Context<'a> {
    property: Property,
    subject: String,
    expr: &'a Expression,
    set: &'a ConvexSetSpec,
    config: &'a CheckConfig,
    first: String,
    second: String,
    base: Vec<Vec<f64>>,
    random: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rng: ChaCha8Rng,
    samples: usize,
    worst: Option<Candidate>,
}

impl<'a> Context<'a> {
    fn new(
        property: Property,
        subject: &str,
        expr: &'a Expression,
        set: &'a ConvexSetSpec,
        config: &'a CheckConfig,
    ) -> Result<Self, AnalysisError> {
        let vars = expr.variables();
        if vars.len() != 2 || vars[0].dim != set.dim() || vars[1].dim != set.dim() {
            return Err(AnalysisError::InvalidArgument(format!(
                "expression must be declared over two variables of dimension {}",
                set.dim()
            )));
        }
        let (lo, hi) = set.sampling_box()?.ok_or(GeometryError::EmptyCloud)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let base = base_points(set, &lo, &hi, config.grid_divisions)?;
        let random =
            (0..config.random_samples).map(|_| random_point(set, &lo, &hi, &mut rng)).collect::<Result<Vec<_>, _>>()?;
        Ok(Context {
            property,
            subject: subject.to_string(),
            expr,
            set,
            config,
            first: vars[0].name.clone(),
            second: vars[1].name.clone(),
            base,
            random,
            lo,
            hi,
            rng,
            samples: 0,
            worst: None,
        })
    }

    fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
        self.expr.eval(&[a, b]).map_err(AnalysisError::from)
    }

    /// Keeps the largest excess; ties go to the lexicographically smallest key.
    fn offer(&mut self, excess: f64, key: Vec<f64>, cex: impl FnOnce() -> Counterexample) {
        let better = match &self.worst {
            None => true,
            Some(w) => excess > w.cex.excess || (excess == w.cex.excess && lex_cmp(&key, &w.key).is_lt()),
        };
        if better {
            let mut cex = cex();
            cex.excess = excess;
            self.worst = Some(Candidate { key, cex });
        }
    }

    /// Base-grid tuples when there are few enough, then random tuples.
    fn tuples(&mut self, arity: usize) -> Vec<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        let n = self.base.len();
        if n.checked_pow(arity as u32).is_some_and(|t| t <= TUPLE_CAP) {
            let mut idx = vec![0usize; arity];
            'outer: loop {
                out.push(idx.iter().map(|&i| self.base[i].clone()).collect());
                for k in (0..arity).rev() {
                    idx[k] += 1;
                    if idx[k] < n {
                        continue 'outer;
                    }
                    idx[k] = 0;
                }
                break;
            }
        }
        let pool = self.random.len();
        for r in 0..pool {
            let mut t = vec![self.random[r].clone()];
            for _ in 1..arity {
                let j = self.rng.gen_range(0..pool);
                t.push(self.random[j].clone());
            }
            out.push(t);
        }
        out
    }

    fn named(&self, entries: &[(&str, &[f64])]) -> BTreeMap<String, Vec<f64>> {
        entries.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect()
    }

    fn monotone(&mut self) -> Result<(), AnalysisError> {
        for t in self.tuples(2) {
            let (a, b) = (&t[0], &t[1]);
            let forward = self.eval(a, b)?;
            let backward = self.eval(b, a)?;
            let sum = forward + backward;
            self.samples += 1;
            let excess = sum - threshold(forward.abs().max(backward.abs()));
            if excess > 0.0 {
                let inputs = self.named(&[(&self.first, a), (&self.second, b)]);
                self.offer(sum, [a.as_slice(), b].concat(), || Counterexample {
                    inputs,
                    values: values(&[("forward", forward), ("backward", backward), ("sum", sum)]),
                    excess: 0.0,
                });
            }
        }
        Ok(())
    }

    fn hemicontinuous(&mut self) -> Result<(), AnalysisError> {
        let ts = self.config.t_schedule.clone();
        for t in self.tuples(2) {
            let (x, y) = (&t[0], &t[1]);
            let base = self.eval(x, y)?;
            let mut gaps = Vec::with_capacity(ts.len());
            for &s in &ts {
                let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + s * (b - a)).collect();
                gaps.push(self.eval(&z, y)? - base);
            }
            self.samples += 1;
            let scale = base.abs();
            if let Some(gap) = persisting_gap(&gaps, threshold(scale)) {
                let s = ts[ts.len() - 1];
                let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + s * (b - a)).collect();
                let along = base + gaps[gaps.len() - 1];
                let inputs = self.named(&[(&self.first, x), (&self.second, y), ("t", &[s]), ("probe", &z)]);
                self.offer(gap, [x.as_slice(), y].concat(), || Counterexample {
                    inputs,
                    values: values(&[("at_point", base), ("along_segment", along)]),
                    excess: 0.0,
                });
            }
        }
        Ok(())
    }

    fn convex_second(&mut self) -> Result<(), AnalysisError> {
        let lambdas = self.config.lambdas.clone();
        for t in self.tuples(3) {
            let (x, p, q) = (&t[0], &t[1], &t[2]);
            let fp = self.eval(x, p)?;
            let fq = self.eval(x, q)?;
            for &l in &lambdas {
                let mix: Vec<f64> = p.iter().zip(q).map(|(a, b)| l * a + (1.0 - l) * b).collect();
                let fm = self.eval(x, &mix)?;
                let chord = l * fp + (1.0 - l) * fq;
                self.samples += 1;
                let gap = fm - chord;
                if gap > threshold(fp.abs().max(fq.abs()).max(fm.abs())) {
                    let alt = format!("{}'", self.second);
                    let inputs =
                        self.named(&[(&self.first, x), (&self.second, p), (&alt, q), ("lambda", &[l]), ("mix", &mix)]);
                    self.offer(gap, [x.as_slice(), p, q, &[l]].concat(), || Counterexample {
                        inputs,
                        values: values(&[("at_mix", fm), ("chord", chord)]),
                        excess: 0.0,
                    });
                }
            }
        }
        Ok(())
    }

    /// Radii and directions for sequential probes around a point.
    fn probes(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let r0 = 0.25 * self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min);
        let radii = (1..=self.config.radii).map(|k| r0 * 0.5f64.powi(k as i32)).collect();
        (radii, directions(self.set.dim(), self.config.directions, self.config.seed))
    }

    /// Per radius, the most extreme value of `probe(z)` over in-set points
    /// `z = centre + r·d`; `lower` picks the minimum, else the maximum.
    fn sweep<F>(
        &self,
        centre: &[f64],
        radii: &[f64],
        dirs: &[Vec<f64>],
        lower: bool,
        mut probe: F,
    ) -> Result<Vec<Option<Extreme>>, AnalysisError>
    where
        F: FnMut(&[f64]) -> Result<f64, AnalysisError>,
    {
        let mut out = Vec::with_capacity(radii.len());
        for &r in radii {
            let mut best: Option<(f64, Vec<f64>)> = None;
            for d in dirs {
                let z: Vec<f64> = centre.iter().zip(d).map(|(c, u)| c + r * u).collect();
                if !self.set.contains(&z, GRID_MEMBERSHIP_TOL)? {
                    continue;
                }
                let v = probe(&z)?;
                let improves = best.as_ref().is_none_or(|(b, _)| if lower { v < *b } else { v > *b });
                if improves {
                    best = Some((v, z));
                }
            }
            out.push(best);
        }
        Ok(out)
    }

    fn lsc_second(&mut self) -> Result<(), AnalysisError> {
        let (radii, dirs) = self.probes();
        for t in self.tuples(2) {
            let (x, p) = (&t[0], &t[1]);
            let at = self.eval(x, p)?;
            let sweep = self.sweep(p, &radii, &dirs, true, |z| self.eval(x, z))?;
            self.samples += 1;
            let Some(gaps) = sweep.iter().map(|s| s.as_ref().map(|(v, _)| at - v)).collect::<Option<Vec<_>>>() else {
                continue;
            };
            if let Some(gap) = persisting_gap(&gaps, threshold(at.abs())) {
                let (value, probe) = sweep[sweep.len() - 1].clone().expect("checked above");
                let inputs = self.named(&[(&self.first, x), (&self.second, p), ("probe", &probe)]);
                self.offer(gap, [x.as_slice(), p].concat(), || Counterexample {
                    inputs,
                    values: values(&[("at_point", at), ("at_probe", value)]),
                    excess: 0.0,
                });
            }
        }
        Ok(())
    }

    fn usc_first(&mut self) -> Result<(), AnalysisError> {
        let (radii, dirs) = self.probes();
        for t in self.tuples(2) {
            let (x, p) = (&t[0], &t[1]);
            let at = self.eval(x, p)?;
            let sweep = self.sweep(x, &radii, &dirs, false, |z| self.eval(z, p))?;
            self.samples += 1;
            let Some(gaps) = sweep.iter().map(|s| s.as_ref().map(|(v, _)| v - at)).collect::<Option<Vec<_>>>() else {
                continue;
            };
            if let Some(gap) = persisting_gap(&gaps, threshold(at.abs())) {
                let (value, probe) = sweep[sweep.len() - 1].clone().expect("checked above");
                let inputs = self.named(&[(&self.first, x), (&self.second, p), ("probe", &probe)]);
                self.offer(gap, [x.as_slice(), p].concat(), || Counterexample {
                    inputs,
                    values: values(&[("at_point", at), ("at_probe", value)]),
                    excess: 0.0,
                });
            }
        }
        Ok(())
    }

    fn diagonal(&mut self) -> Result<(), AnalysisError> {
        let points: Vec<Vec<f64>> = self.base.iter().chain(&self.random).cloned().collect();
        for p in &points {
            let v = self.eval(p, p)?;
            self.samples += 1;
            if v < -TOL_CHECK {
                let inputs = self.named(&[(&self.second, p)]);
                self.offer(-v, p.clone(), || Counterexample {
                    inputs,
                    values: values(&[("diagonal", v)]),
                    excess: 0.0,
                });
            }
        }
        Ok(())
    }

    fn finish(self) -> CheckerReport {
        let grid = self.base.len();
        let sampling = match self.property {
            Property::DiagonalNonneg => {
                format!("{grid} base-grid points and {} random points", self.random.len())
            }
            Property::LscSecond | Property::UscFirst => format!(
                "{grid} base-grid points and {} random points as tuples; {} radii x {} directions per tuple",
                self.random.len(),
                self.config.radii,
                self.config.directions
            ),
            Property::Hemicontinuous => format!(
                "{grid} base-grid points and {} random points as pairs; t down to {:e}",
                self.random.len(),
                self.config.t_schedule[self.config.t_schedule.len() - 1]
            ),
            _ => format!("{grid} base-grid points and {} random points as tuples", self.random.len()),
        } + &format!(", seed {}", self.config.seed);
        let verdict = if self.worst.is_some() { Verdict::Refuted } else { Verdict::HoldsOnSamples };
        CheckerReport {
            property: self.property.name().to_string(),
            subject: self.subject,
            verdict,
            counterexample: self.worst.map(|w| w.cex),
            samples: self.samples,
            sampling,
        }
    }
}

/// The last gap if every tail gap exceeds `tol` and the tail does not decay.
fn persisting_gap(gaps: &[f64], tol: f64) -> Option<f64> {
    let tail = &gaps[gaps.len() - TAIL..];
    let (first, last) = (tail[0], tail[TAIL - 1]);
    (tail.iter().all(|g| *g > tol) && last >= PERSIST_RATIO * first).then_some(last)
}

fn values(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len()))
}

/// Dyadic lattice of the sampling box, restricted to the set.
fn base_points(set: &ConvexSetSpec, lo: &[f64], hi: &[f64], divisions: usize) -> Result<Vec<Vec<f64>>, AnalysisError> {
    let dim = lo.len();
    let per_axis = divisions + 1;
    if per_axis.checked_pow(dim as u32).is_none_or(|t| t > BASE_GRID_CAP) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let p: Vec<f64> =
            (0..dim)
                .map(|k| {
                    if idx[k] == divisions {
                        hi[k]
                    } else {
                        lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / divisions as f64
                    }
                })
                .collect();
        if set.contains(&p, GRID_MEMBERSHIP_TOL)? {
            out.push(p);
        }
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < per_axis {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    Ok(out)
}

fn random_point(set: &ConvexSetSpec, lo: &[f64], hi: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<f64>, AnalysisError> {
    let p: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| if h > l { rng.gen_range(*l..=*h) } else { *l }).collect();
    if set.contains(&p, GRID_MEMBERSHIP_TOL)? {
        Ok(p)
    } else {
        Ok(set.project(&p)?)
    }
}

/// Unit probe directions: `±1` on the line, evenly spaced angles in the
/// plane, signed axes then seeded random directions above that.
fn directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(count.max(2 * dim));
            for k in 0..dim {
                for s in [1.0, -1.0] {
                    let mut d = vec![0.0; dim];
                    d[k] = s;
                    out.push(d);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            while out.len() < count {
                let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n > 1e-3 {
                    out.push(d.into_iter().map(|v| v / n).collect());
                }
            }
            out
        }
    }
}
