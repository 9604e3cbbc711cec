use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Value};

use super::{json_of, match_report_json, Outcome};
use crate::analytic;
use crate::error::Result;
use crate::graph::{CaseTag, Graph, MarkedConfiguration};
use crate::schedule::{auto_schedule, run_case, run_schedule, ReducedSystem, Schedule, Stage};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceTarget {
    /// Complete graph, N = 1024, k = 4, at gamma = 1/N and 2/N.
    Fig1b,
    /// Two-a with its own schedule and with two-b's.
    Fig6a,
    /// Two-b with its own schedule and with two-a's.
    Fig6b,
    /// Predictions, measured gaps and closed-form matches for the two-marked cases.
    Table1,
    /// The same for the larger configurations.
    Table2,
    /// Classes of two-vertex marked sets at M = 5.
    Classify5,
}

const FIG1B_N: usize = 1024;
const FIG1B_K: usize = 4;
const FIG1B_T_MAX: f64 = 50.0;
const FIG1B_SAMPLES: usize = 5001;

const TABLE1: [CaseTag; 5] = [CaseTag::TwoA, CaseTag::TwoB, CaseTag::TwoC, CaseTag::TwoD, CaseTag::TwoE];
const TABLE2: [CaseTag; 4] = [CaseTag::Ring1, CaseTag::CliquePlus1, CaseTag::Ring2, CaseTag::Ring2Shift];

pub(super) fn reproduce(target: ReproduceTarget, out_dir: &Path, m: usize) -> Result<Outcome> {
    std::fs::create_dir_all(out_dir)?;
    match target {
        ReproduceTarget::Fig1b => fig1b(out_dir),
        ReproduceTarget::Fig6a => fig6(out_dir, "fig6a", CaseTag::TwoA, CaseTag::TwoB, m),
        ReproduceTarget::Fig6b => fig6(out_dir, "fig6b", CaseTag::TwoB, CaseTag::TwoA, m),
        ReproduceTarget::Table1 => table(out_dir, "table1", &TABLE1, m),
        ReproduceTarget::Table2 => table(out_dir, "table2", &TABLE2, m),
        ReproduceTarget::Classify5 => {
            let mut outcome = super::classify(5)?;
            let path = out_dir.join("classify5.json");
            std::fs::write(&path, serde_json::to_string_pretty(&outcome.json)?)?;
            outcome.json["file"] = json!(path);
            Ok(outcome)
        }
    }
}

fn fig1b(out_dir: &Path) -> Result<Outcome> {
    let graph = Graph::complete(FIG1B_N)?;
    let marked = MarkedConfiguration::new(&graph, (0..FIG1B_K).collect(), CaseTag::Custom)?;
    let system = ReducedSystem::from_configuration(&graph, &marked)?;
    let mut text = String::new();
    let mut curves = Vec::new();
    let mut outputs = Vec::new();
    for (name, multiple) in [("fig1b_gamma_1_over_N.csv", 1.0), ("fig1b_gamma_2_over_N.csv", 2.0)] {
        let gamma = multiple / FIG1B_N as f64;
        let schedule = Schedule::new(vec![Stage {
            gamma,
            duration: FIG1B_T_MAX,
            samples: FIG1B_SAMPLES,
        }])?;
        let run = run_schedule(&system, &schedule)?;
        let path = out_dir.join(name);
        run.series.save_csv(&path)?;
        let summary = run.summary();
        let _ = writeln!(text, "gamma = {multiple}/N: peak {:.6} at t = {:.4} -> {}", summary.peak, summary.t_peak, path.display());
        curves.push(json!({"gamma": gamma, "file": path, "summary": json_of(&summary)?}));
        outputs.push(path);
    }
    finish(text, json!({"N": FIG1B_N, "k": FIG1B_K, "curves": curves}), outputs, json!({"target": "fig1b"}))
}

fn fig6(out_dir: &Path, stem: &str, case: CaseTag, other: CaseTag, m: usize) -> Result<Outcome> {
    let mut text = String::new();
    let mut runs = Vec::new();
    let mut outputs = Vec::new();
    for (suffix, schedule_of) in [("correct", case), ("wrong", other)] {
        let schedule = auto_schedule(schedule_of, m, None)?;
        let run = run_case(case, m, None, &schedule)?;
        let path = out_dir.join(format!("{stem}_{suffix}.csv"));
        run.series.save_csv(&path)?;
        let summary = run.summary();
        let _ = writeln!(
            text,
            "{case} with {schedule_of}'s schedule: peak {:.6} at t = {:.3}, final {:.6} -> {}",
            summary.peak,
            summary.t_peak,
            summary.final_probability,
            path.display()
        );
        runs.push(json!({
            "case": case.to_string(),
            "schedule_of": schedule_of.to_string(),
            "schedule": schedule,
            "file": path,
            "summary": json_of(&summary)?,
        }));
        outputs.push(path);
    }
    finish(text, json!({"M": m, "runs": runs}), outputs, json!({"target": stem, "M": m}))
}

fn table(out_dir: &Path, stem: &str, cases: &[CaseTag], m: usize) -> Result<Outcome> {
    let mut text = format!("{:>14} {:>4} {:>6} {:>14} {:>14} {:>14} {:>10} {:>6}\n", "case", "dim", "stage", "gamma_c", "runtime", "gap", "measured", "match");
    let mut rows = Vec::new();
    let mut all_matched = true;
    for &case in cases {
        let prediction = analytic::predict(case, m, None)?;
        let (matched, report) = match_report_json(case, m)?;
        all_matched &= matched;
        let dimension = report["dimension"].as_u64().unwrap_or(0);
        let mut gaps = Vec::new();
        for (i, s) in prediction.stages.iter().enumerate() {
            let g = spectral::gap_at_critical(case, m, None, i + 1)?;
            let _ = writeln!(
                text,
                "{:>14} {:>4} {:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.3e} {:>6}",
                case.to_string(),
                dimension,
                i + 1,
                s.gamma_c,
                s.runtime,
                s.gap,
                g.gap,
                if matched { "yes" } else { "no" }
            );
            gaps.push(json_of(&g)?);
        }
        rows.push(json!({
            "case": case.to_string(),
            "dimension": dimension,
            "prediction": json_of(&prediction)?,
            "measured_gaps": gaps,
            "match": report,
        }));
    }
    let json = json!({"M": m, "rows": rows, "all_matched": all_matched});
    let path: PathBuf = out_dir.join(format!("{stem}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&json)?)?;
    let _ = writeln!(text, "-> {}", path.display());
    let mut outcome = Outcome::new(text, json);
    outcome.verified = all_matched;
    Ok(outcome)
}

fn finish(text: String, json: Value, outputs: Vec<PathBuf>, parameters: Value) -> Result<Outcome> {
    let mut outcome = Outcome::new(text, json);
    outcome.outputs = outputs;
    outcome.parameters = parameters;
    Ok(outcome)
}
