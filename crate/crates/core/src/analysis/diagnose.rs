use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;

use super::checkers::{run_checker, CheckConfig, CheckerReport, Property};
use super::AnalysisError;
use crate::geometry::{diameter, directed_distance, format_sig17, kuratowski_estimate};
use crate::sep::{ApproxSolutionSet, Grids, ResidualTable, SplitProblem};

pub const REPORT_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub tau_diam: f64,
    pub tau_h: f64,
    /// Upper bound on the mean ratio of successive diameters.
    pub ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { tau_diam: 0.05, tau_h: 0.05, ratio: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseOptions {
    pub schedule: Vec<f64>,
    pub grids: Grids,
    pub thresholds: Thresholds,
    pub kuratowski_budget: usize,
    /// Hypothesis checkers to run alongside; `None` skips them.
    pub checks: Option<CheckConfig>,
}

impl DiagnoseOptions {
    pub fn new(schedule: Vec<f64>, grids: Grids) -> Self {
        DiagnoseOptions {
            schedule,
            grids,
            thresholds: Thresholds::default(),
            kuratowski_budget: 8,
            checks: Some(CheckConfig::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    WellPosed,
    GeneralizedWellPosed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrosscheckVerdict {
    #[serde(rename = "CONSISTENT")]
    Consistent,
    #[serde(rename = "TENSION")]
    Tension,
    #[serde(rename = "N/A")]
    NotApplicable,
}

/// Advisory comparison between the uniqueness criterion and the diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crosscheck {
    pub verdict: CrosscheckVerdict,
    pub reasons: Vec<String>,
}

/// Metrics of one sampled approximate solution set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub epsilon: f64,
    pub size: usize,
    pub diameter: Option<f64>,
    /// `H(S(ε), S)`; `None` when either cloud is empty.
    pub hausdorff_to_solution: Option<f64>,
    /// Window-relative covering estimate.
    pub kuratowski: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub h_out: f64,
    pub h_in: f64,
    pub window_c: Option<f64>,
    pub window_q: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosisReport {
    pub schema_version: &'static str,
    pub schedule: Vec<f64>,
    pub grids: GridInfo,
    pub slack: f64,
    pub lipschitz_f: f64,
    pub lipschitz_g: f64,
    pub thresholds: Thresholds,
    pub kuratowski_budget: usize,
    pub kuratowski_scope: &'static str,
    pub levels: Vec<LevelSummary>,
    /// The level standing in for the solution set, `S(min ε / 10)`.
    pub solution: LevelSummary,
    pub mean_diameter_ratio: Option<f64>,
    pub classification: Classification,
    pub evidence: Vec<String>,
    pub warnings: Vec<String>,
    pub checkers: Vec<CheckerReport>,
    pub crosscheck: Crosscheck,
    #[serde(skip)]
    pub clouds: Vec<ApproxSolutionSet>,
    #[serde(skip)]
    pub solution_cloud: Option<ApproxSolutionSet>,
}

/// Diagnosis with default budget and checker settings.
pub fn diagnose(
    prob: &SplitProblem,
    schedule: &[f64],
    grids: Grids,
    thresholds: Thresholds,
) -> Result<DiagnosisReport, AnalysisError> {
    let mut options = DiagnoseOptions::new(schedule.to_vec(), grids);
    options.thresholds = thresholds;
    diagnose_with(prob, &options)
}

/// Runs every checker on `f` over `C` and on `g` over `Q`.
pub fn run_all_checkers(prob: &SplitProblem, config: &CheckConfig) -> Result<Vec<CheckerReport>, AnalysisError> {
    let mut out = Vec::new();
    for (subject, expr, set) in [("f", prob.f(), prob.c()), ("g", prob.g(), prob.q())] {
        for p in Property::ALL {
            out.push(run_checker(p, subject, expr, set, config)?);
        }
    }
    Ok(out)
}

pub fn diagnose_with(prob: &SplitProblem, options: &DiagnoseOptions) -> Result<DiagnosisReport, AnalysisError> {
    let schedule = &options.schedule;
    if schedule.len() < 4 {
        return Err(AnalysisError::InvalidSchedule("at least four values are required".into()));
    }
    if schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(AnalysisError::InvalidSchedule("values must be positive and strictly decreasing".into()));
    }
    if options.kuratowski_budget == 0 {
        return Err(AnalysisError::InvalidArgument("kuratowski budget must be at least 1".into()));
    }
    let t = options.thresholds;
    let Grids { h_out, h_in } = options.grids;
    let eps_min = schedule[schedule.len() - 1];
    let table = ResidualTable::build(prob, h_out, h_in, schedule[0])?;
    let slack = table.slack();
    let (lipschitz_f, lipschitz_g) = table.lipschitz();
    let mut evidence = Vec::new();
    let mut warnings = Vec::new();

    let solution_set = ApproxSolutionSet::from_table(prob, &table, eps_min / 10.0, Vec::new())?;
    let solution = summarize(&solution_set, None, options.kuratowski_budget)?;
    let mut clouds = Vec::with_capacity(schedule.len());
    let mut levels = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let set = ApproxSolutionSet::from_table(prob, &table, eps, Vec::new())?;
        if set.cloud.is_empty() {
            evidence.push(format!("no grid point is an {eps}-solution"));
        }
        levels.push(summarize(&set, Some(&solution_set), options.kuratowski_budget)?);
        clouds.push(set);
    }

    // diameters over the schedule followed by the solution level
    let diams: Vec<Option<f64>> = levels.iter().chain([&solution]).map(|l| l.diameter).collect();
    let mean_ratio = mean_ratio(&diams);
    let any_empty = levels.iter().any(|l| l.size == 0);

    let mut classification = Classification::Inconclusive;
    if solution.size == 0 {
        evidence.push(format!("solution level S({}) is empty on the grid", solution.epsilon));
    } else if !any_empty {
        let d: Vec<f64> = diams.iter().map(|v| v.expect("nonempty")).collect();
        let d_final = d[d.len() - 1];
        let diam_monotone = nonincreasing(&d);
        let diam_small = d_final <= t.tau_diam + 2.0 * slack;
        let ratio_ok = mean_ratio.is_some_and(|r| r <= t.ratio);
        evidence.push(format!(
            "diameter curve {} ; final diameter {} vs bound {} ; mean successive ratio {} vs {}",
            if diam_monotone { "nonincreasing" } else { "not monotone" },
            d_final,
            t.tau_diam + 2.0 * slack,
            mean_ratio.map_or("undefined".to_string(), |r| r.to_string()),
            t.ratio
        ));
        let h: Vec<f64> = levels.iter().map(|l| l.hausdorff_to_solution.expect("nonempty")).collect();
        let h_final = h[h.len() - 1];
        let h_monotone = nonincreasing(&h);
        let h_small = h_final <= t.tau_h + 2.0 * slack;
        evidence.push(format!(
            "Hausdorff curve {} ; value at smallest epsilon {} vs bound {}",
            if h_monotone { "nonincreasing" } else { "not monotone" },
            h_final,
            t.tau_h + 2.0 * slack
        ));
        classification = if diam_monotone && diam_small && ratio_ok {
            Classification::WellPosed
        } else if h_monotone && h_small {
            Classification::GeneralizedWellPosed
        } else {
            Classification::Inconclusive
        };
    }
    if slack >= eps_min {
        warnings.push(format!("certification slack {slack} is not below the smallest epsilon {eps_min}; refine h_in"));
        if classification != Classification::Inconclusive {
            evidence.push("classification withheld because the slack does not resolve the schedule".into());
            classification = Classification::Inconclusive;
        }
    }

    let checkers = match &options.checks {
        Some(config) => run_all_checkers(prob, config)?,
        None => Vec::new(),
    };
    for c in checkers.iter().filter(|c| c.property == Property::UscFirst.name() && !c.holds()) {
        warnings.push(format!(
            "{} is not upper semicontinuous in its first variable on samples; \
             the metric characterizations are only known to be sufficient under that hypothesis",
            c.subject
        ));
    }

    let mut report = DiagnosisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        schedule: schedule.clone(),
        grids: GridInfo { h_out, h_in, window_c: prob.c().window(), window_q: prob.q().window() },
        slack,
        lipschitz_f,
        lipschitz_g,
        thresholds: t,
        kuratowski_budget: options.kuratowski_budget,
        kuratowski_scope: "window-relative",
        levels,
        solution,
        mean_diameter_ratio: mean_ratio,
        classification,
        evidence,
        warnings,
        checkers,
        crosscheck: Crosscheck { verdict: CrosscheckVerdict::NotApplicable, reasons: Vec::new() },
        clouds,
        solution_cloud: Some(solution_set),
    };
    if options.checks.is_some() {
        report.crosscheck = uniqueness_crosscheck(&report.checkers, &report);
    } else {
        report.crosscheck.reasons.push("checkers were not run".into());
    }
    Ok(report)
}

fn summarize(
    set: &ApproxSolutionSet,
    solution: Option<&ApproxSolutionSet>,
    budget: usize,
) -> Result<LevelSummary, AnalysisError> {
    let cloud = &set.cloud;
    if cloud.is_empty() {
        return Ok(LevelSummary {
            epsilon: set.epsilon,
            size: 0,
            diameter: None,
            hausdorff_to_solution: None,
            kuratowski: None,
        });
    }
    let hausdorff = match solution {
        None => Some(0.0),
        Some(s) if s.cloud.is_empty() => None,
        // S ⊆ S(ε) on the same grid, so the reverse directed distance is 0
        Some(s) => Some(directed_distance(cloud, &s.cloud)?),
    };
    Ok(LevelSummary {
        epsilon: set.epsilon,
        size: cloud.len(),
        diameter: Some(diameter(cloud)?),
        hausdorff_to_solution: hausdorff,
        kuratowski: Some(kuratowski_estimate(cloud, budget)?),
    })
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

/// Mean of `d[i+1] / d[i]`, counting `0 / 0` as 0.
fn mean_ratio(diams: &[Option<f64>]) -> Option<f64> {
    let d: Vec<f64> = diams.iter().copied().collect::<Option<Vec<_>>>()?;
    if d.len() < 2 {
        return None;
    }
    let sum: f64 = d
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                if w[1] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w[1] / w[0]
            }
        })
        .sum();
    Some(sum / (d.len() - 1) as f64)
}

const UNIQUENESS_HYPOTHESES: [Property; 5] = [
    Property::Monotone,
    Property::Hemicontinuous,
    Property::ConvexSecond,
    Property::LscSecond,
    Property::DiagonalNonneg,
];

/// When `f` and `g` pass the uniqueness hypotheses on samples and the
/// solution cloud is a single point up to twice the slack, the diagnosis
/// is expected to be `WellPosed`. Never changes the diagnosis.
pub fn uniqueness_crosscheck(checkers: &[CheckerReport], diagnosis: &DiagnosisReport) -> Crosscheck {
    let mut reasons = Vec::new();
    for subject in ["f", "g"] {
        for p in UNIQUENESS_HYPOTHESES {
            match checkers.iter().find(|c| c.subject == subject && c.property == p.name()) {
                Some(c) if c.holds() => {}
                Some(_) => reasons.push(format!("{subject}: {p} refuted")),
                None => reasons.push(format!("{subject}: {p} not checked")),
            }
        }
    }
    let bound = 2.0 * diagnosis.slack;
    match diagnosis.solution.diameter {
        Some(d) if d <= bound => {}
        Some(d) => reasons.push(format!("solution cloud diameter {d} exceeds {bound}")),
        None => reasons.push("solution cloud is empty".into()),
    }
    if !reasons.is_empty() {
        return Crosscheck { verdict: CrosscheckVerdict::NotApplicable, reasons };
    }
    if diagnosis.classification == Classification::WellPosed {
        Crosscheck {
            verdict: CrosscheckVerdict::Consistent,
            reasons: vec!["hypotheses hold on samples, solution is unique on the grid, diagnosis is WellPosed".into()],
        }
    } else {
        Crosscheck {
            verdict: CrosscheckVerdict::Tension,
            reasons: vec![format!(
                "hypotheses hold on samples and the solution is unique on the grid, but the diagnosis is {:?}",
                diagnosis.classification
            )],
        }
    }
}

impl DiagnosisReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// One row per level plus the solution level; empty cells for missing
    /// values.
    pub fn write_curves_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "level,epsilon,size,diameter,hausdorff_to_solution,kuratowski,slack")?;
        let opt = |v: Option<f64>| v.map(format_sig17).unwrap_or_default();
        let rows = self.levels.iter().map(|l| ("schedule", l)).chain([("solution", &self.solution)]);
        for (kind, l) in rows {
            writeln!(
                out,
                "{kind},{},{},{},{},{},{}",
                format_sig17(l.epsilon),
                l.size,
                opt(l.diameter),
                opt(l.hausdorff_to_solution),
                opt(l.kuratowski),
                format_sig17(self.slack)
            )?;
        }
        Ok(())
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
        let _ = writeln!(s, "{:>12} {:>10} {:>10} {:>10} {:>10}", "epsilon", "points", "diam", "H(S_e,S)", "alpha*");
        for l in self.levels.iter().chain([&self.solution]) {
            let _ = writeln!(
                s,
                "{:>12.3e} {:>10} {:>10} {:>10} {:>10}",
                l.epsilon,
                l.size,
                cell(l.diameter),
                cell(l.hausdorff_to_solution),
                cell(l.kuratowski)
            );
        }
        let _ = writeln!(s, "* window-relative, budget {}", self.kuratowski_budget);
        let _ = writeln!(s, "slack {:.3e} (h_out {:e}, h_in {:e})", self.slack, self.grids.h_out, self.grids.h_in);
        let _ = writeln!(s, "classification: {:?}", self.classification);
        for c in &self.checkers {
            let _ = writeln!(
                s,
                "  {}/{}: {}",
                c.subject,
                c.property,
                if c.holds() { "holds-on-samples" } else { "refuted" }
            );
        }
        let verdict = match self.crosscheck.verdict {
            CrosscheckVerdict::Consistent => "CONSISTENT",
            CrosscheckVerdict::Tension => "TENSION",
            CrosscheckVerdict::NotApplicable => "N/A",
        };
        let _ = writeln!(s, "uniqueness cross-check: {verdict}");
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sep::fixtures::*;

    const SCHEDULE: [f64; 5] = [0.1, 0.05, 0.01, 0.005, 0.001];

    #[test]
    fn example2_is_generalized() {
        let h = 1.0 / 128.0;
        let prob = example2(h);
        let r = diagnose(&prob, &SCHEDULE, Grids::new(h, h).unwrap(), Thresholds::default()).unwrap();
        assert_eq!(r.classification, Classification::GeneralizedWellPosed);
        assert_eq!(r.slack, 0.0);
        for l in &r.levels {
            assert!(l.diameter.unwrap() >= 2f64.sqrt() - 0.1);
        }
        assert_eq!(r.crosscheck.verdict, CrosscheckVerdict::NotApplicable);
        assert!(r.warnings.iter().any(|w| w.starts_with("g is not upper")));
    }

    #[test]
    fn example3_is_well_posed_and_consistent() {
        let prob = example3(1.0 / 256.0, 1.0 / 16384.0);
        let grids = prob.grids();
        let r = diagnose(&prob, &SCHEDULE, grids, Thresholds::default()).unwrap();
        assert_eq!(r.classification, Classification::WellPosed, "{:#?}", r.evidence);
        assert_eq!(r.crosscheck.verdict, CrosscheckVerdict::Consistent, "{:?}", r.crosscheck.reasons);
    }

    #[test]
    fn coarse_inner_grid_withholds_classification() {
        let prob = example3(1.0 / 64.0, 1.0 / 64.0);
        let r = diagnose(&prob, &SCHEDULE, prob.grids(), Thresholds::default()).unwrap();
        assert_eq!(r.classification, Classification::Inconclusive);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn schedule_preconditions() {
        let prob = example2(0.25);
        let g = prob.grids();
        assert!(diagnose(&prob, &[0.1, 0.05, 0.01], g, Thresholds::default()).is_err());
        assert!(diagnose(&prob, &[0.1, 0.05, 0.05, 0.01], g, Thresholds::default()).is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(mean_ratio(&[Some(1.0), Some(0.5), Some(0.0), Some(0.0)]), Some(0.5 / 3.0));
        assert_eq!(mean_ratio(&[Some(1.0), None]), None);
    }

    #[test]
    fn curves_csv_has_one_row_per_level() {
        let prob = example2(0.125);
        let mut options = DiagnoseOptions::new(SCHEDULE.to_vec(), prob.grids());
        options.checks = None;
        let r = diagnose_with(&prob, &options).unwrap();
        let mut buf = Vec::new();
        r.write_curves_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
        assert_eq!(r.to_json()["schema_version"], "1");
        assert!(r.to_table().contains("classification"));
    }
}
