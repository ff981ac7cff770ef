//! Re-runs the built-in examples and checks their closed-form claims.

use std::io::{self, Write};
use std::time::{Duration, Instant};

use super::{diagnose_config, CliError};
use crate::analysis::{Classification, CrosscheckVerdict, DiagnosisReport, Property};
use crate::config::ProblemConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Claim {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Claim { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct ExampleOutcome {
    pub example: u8,
    pub claims: Vec<Claim>,
    pub report: DiagnosisReport,
    pub elapsed: Duration,
}

impl ExampleOutcome {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    pub fn print<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "example {} ({:.1} s)", self.example, self.elapsed.as_secs_f64())?;
        for c in &self.claims {
            writeln!(out, "  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// The hypotheses under which a unique solution implies well-posedness.
pub const UNIQUENESS_CHECKS: [Property; 4] =
    [Property::Monotone, Property::ConvexSecond, Property::LscSecond, Property::DiagonalNonneg];

pub fn reproduce_example(k: u8) -> Result<ExampleOutcome, CliError> {
    let config = ProblemConfig::builtin(&format!("builtin:example{k}"))?;
    let start = Instant::now();
    let report = diagnose_config(&config)?;
    let elapsed = start.elapsed();
    let claims = match k {
        1 => example1_claims(&config, &report),
        2 => example2_claims(&config, &report),
        3 => example3_claims(&report),
        _ => return Err(CliError::Usage(format!("no example {k}"))),
    };
    Ok(ExampleOutcome { example: k, claims, report, elapsed })
}

fn classification_claim(report: &DiagnosisReport, expected: Classification) -> Claim {
    Claim::new(
        "classification",
        report.classification == expected,
        format!("{:?} (expected {expected:?})", report.classification),
    )
}

/// `diam S(ε) <= 2√(2ε)` up to one grid diagonal at each end.
fn example1_claims(config: &ProblemConfig, report: &DiagnosisReport) -> Vec<Claim> {
    let h = config.grids.h_out;
    let mut claims = Vec::new();
    let finest = report.schedule.iter().copied().fold(f64::INFINITY, f64::min);
    claims.push(Claim::new(
        "grid",
        config.grids.h_in == h && h <= finest / 4.0,
        format!("h_out = h_in = {h:e}, smallest epsilon / 4 = {:e}", finest / 4.0),
    ));
    let mut previous = f64::INFINITY;
    let mut monotone = true;
    for l in &report.levels {
        let bound = 2.0 * (2.0 * l.epsilon).sqrt() + 2.0 * 2f64.sqrt() * h;
        let diam = l.diameter.unwrap_or(f64::NAN);
        monotone &= diam <= previous;
        previous = diam;
        claims.push(Claim::new(format!("diam S({})", l.epsilon), diam <= bound, format!("{diam:.6} <= {bound:.6}")));
    }
    claims.push(Claim::new("diameter curve nonincreasing", monotone, ""));
    claims.push(classification_claim(report, Classification::WellPosed));
    claims
}

/// `H(S(ε), S) <= ε/√2` up to grid terms while the diameter stays near √2.
fn example2_claims(config: &ProblemConfig, report: &DiagnosisReport) -> Vec<Claim> {
    let h = config.grids.h_out;
    let mut claims = Vec::new();
    for l in &report.levels {
        let bound = l.epsilon / 2f64.sqrt() + 2.0 * 2f64.sqrt() * h + 1e-9;
        let hd = l.hausdorff_to_solution.unwrap_or(f64::NAN);
        claims.push(Claim::new(format!("H(S({}), S)", l.epsilon), hd <= bound, format!("{hd:.6} <= {bound:.6}")));
    }
    let last = report.levels.last().and_then(|l| l.hausdorff_to_solution).unwrap_or(f64::NAN);
    let tau = report.thresholds.tau_h;
    claims.push(Claim::new("H at smallest epsilon", last <= tau, format!("{last:.6} <= {tau}")));
    let floor = 2f64.sqrt() - 0.1;
    let smallest = report.levels.iter().filter_map(|l| l.diameter).fold(f64::INFINITY, f64::min);
    let all_present = report.levels.iter().all(|l| l.diameter.is_some());
    claims.push(Claim::new(
        "diameter stays large",
        all_present && smallest >= floor,
        format!("min diam {smallest:.6} >= {floor:.6}"),
    ));
    claims.push(classification_claim(report, Classification::GeneralizedWellPosed));
    claims
}

/// Hypotheses hold, `S(10⁻³)` collapses onto the origin, and the
/// cross-check agrees with the diagnosis.
fn example3_claims(report: &DiagnosisReport) -> Vec<Claim> {
    let mut claims = Vec::new();
    for subject in ["f", "g"] {
        for p in UNIQUENESS_CHECKS {
            let found = report.checkers.iter().find(|c| c.subject == subject && c.property == p.name());
            let holds = found.is_some_and(|c| c.holds());
            let detail = if found.is_none() {
                "not run"
            } else if holds {
                "holds-on-samples"
            } else {
                "refuted"
            };
            claims.push(Claim::new(format!("{subject} {p}"), holds, detail));
        }
    }
    let level = report.clouds.iter().find(|c| (c.epsilon - 1e-3).abs() < 1e-15);
    let radius = level.map(|c| c.cloud.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max));
    claims.push(match (level, radius) {
        (Some(c), Some(r)) if !c.cloud.is_empty() => Claim::new(
            "S(0.001) near origin",
            r <= 0.05,
            format!("{} points, max |(x, y)| = {r:.6} <= 0.05", c.cloud.len()),
        ),
        _ => Claim::new("S(0.001) near origin", false, "level missing or empty"),
    });
    claims.push(Claim::new(
        "uniqueness cross-check",
        report.crosscheck.verdict == CrosscheckVerdict::Consistent,
        format!("{:?} {}", report.crosscheck.verdict, report.crosscheck.reasons.join("; ")),
    ));
    claims.push(classification_claim(report, Classification::WellPosed));
    claims
}
