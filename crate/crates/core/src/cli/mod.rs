//! The `ctqw-search` command-line front end.
//!
//! Every subcommand prints a human-readable report, or a JSON document with
//! `--format json`. Commands that write CSV files also write a
//! `<name>.manifest.json` next to each one; `replay` re-runs a manifest.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a numerical
//! verification fails.

mod manifest;
mod reproduce;

pub use manifest::RunManifest;
pub use reproduce::ReproduceTarget;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic;
use crate::error::{Error, Result};
use crate::graph::{classify_pairs, CaseTag, Graph, MarkedConfiguration};
use crate::hamiltonian::DEFAULT_DENSE_CAP;
use crate::reduction::{coarsest_equitable_partition, reduced_hamiltonian, validate_against_appendix, LabeledReduction};
use crate::schedule::{auto_schedule, auto_schedule_complete, run_schedule, FullSystem, ReducedSystem, Schedule, SearchSystem};
use crate::spectral;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "ctqw-search",
    version,
    about = "Quantum-walk spatial search on the complete graph and the simplex of complete graphs"
)]
pub struct Cli {
    /// Output format for the report on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Worker threads for sweeps and classification.
    #[arg(long, global = true, env = "RAYON_NUM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Complete,
    Simplex,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Graph family.
    #[arg(long, value_enum, default_value_t = Family::Simplex)]
    pub graph: Family,

    /// Number of vertices of the complete graph.
    #[arg(long = "N", visible_alias = "n")]
    pub n: Option<usize>,

    /// Simplex parameter: M+1 cliques of M vertices each.
    #[arg(long = "M", visible_alias = "m")]
    pub m: Option<usize>,

    /// Named configuration (two-a ... ring-2-shift, k-in-clique) or a
    /// custom list: `i:j,i:j` on the simplex, vertex ids on the complete graph.
    #[arg(long)]
    pub config: Option<String>,

    /// Marked count for k-in-clique, or the number of marked vertices
    /// `0..k` on the complete graph when no custom list is given.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Space {
    /// Full space when it fits under the dense cap, reduced otherwise.
    Auto,
    Full,
    Reduced,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a search schedule and report peak and final success probability.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        /// `auto` or explicit stages `gamma:duration,gamma:duration`.
        #[arg(long, default_value = "auto")]
        schedule: String,
        /// Samples per stage.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Space::Auto)]
        space: Space,
        /// Dense eigensolver cap for full-space runs.
        #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
        cap: usize,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the coarsest equitable partition and the reduced Hamiltonian.
    Reduce {
        #[command(flatten)]
        graph: GraphArgs,
        /// Jumping rate used for the printed matrix.
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Check a named case against its closed-form matrix.
        #[arg(long)]
        validate: bool,
        /// CSV output path for the matrix.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Closed-form critical rates, runtimes and gaps.
    Predict {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Peak target probability against detuning from the critical rate.
    SweepGamma {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1)]
        stage: usize,
        /// Explicit detunings.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps: Vec<f64>,
        /// Detuning coefficients `c`, used as `c / M^power`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Vec<f64>,
        #[arg(long, default_value_t = 2.5)]
        power: f64,
        /// Absolute jumping rates (complete graph).
        #[arg(long, value_delimiter = ',')]
        gammas: Vec<f64>,
        /// Time horizon for complete-graph sweeps.
        #[arg(long, default_value_t = 50.0)]
        t_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical gap at the critical rate, or a power-law fit over several M.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1)]
        stage: usize,
        /// Jumping rate (defaults to the predicted critical value).
        #[arg(long)]
        gamma: Option<f64>,
        /// Values of M (or N) for a scaling fit.
        #[arg(long = "Ms", visible_alias = "ms", value_delimiter = ',')]
        ms: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group all two-vertex marked sets of the simplex by reduced structure.
    Classify {
        #[arg(long = "M", visible_alias = "m", default_value_t = 5)]
        m: usize,
    },
    /// Regenerate a figure's or table's data.
    Reproduce {
        #[arg(value_enum)]
        target: ReproduceTarget,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Simplex parameter for the table targets.
        #[arg(long = "M", visible_alias = "m", default_value_t = 100)]
        m: usize,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Fail unless the regenerated CSVs are byte-identical to the existing ones.
        #[arg(long)]
        verify: bool,
    },
}

/// Result of a subcommand before formatting.
#[derive(Debug, Default)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub verified: bool,
    pub outputs: Vec<PathBuf>,
    pub parameters: Value,
}

impl Outcome {
    fn new(text: String, json: Value) -> Self {
        Self {
            text,
            json,
            verified: true,
            ..Self::default()
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::AppendixMismatch { .. } | Error::NotEquitable(_) => EXIT_VERIFY,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (without the program name), runs the command and writes
/// its report to `out`. Returns the process exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv = std::iter::once("ctqw-search".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let started = Instant::now();
    let result = dispatch(&cli.command).and_then(|mut outcome| {
        if !outcome.outputs.is_empty() {
            let manifest = RunManifest {
                command: command_name(&cli.command).into(),
                args: args.to_vec(),
                parameters: std::mem::take(&mut outcome.parameters),
                version: env!("CARGO_PKG_VERSION").into(),
                outputs: outcome.outputs.clone(),
                wall_clock_seconds: started.elapsed().as_secs_f64(),
            };
            manifest.write_next_to_outputs()?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            let printed = match cli.format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&outcome.json).unwrap_or_default()),
                Format::Text => write!(out, "{}", outcome.text),
            };
            if printed.is_err() {
                return EXIT_USAGE;
            }
            if outcome.verified {
                EXIT_OK
            } else {
                let _ = writeln!(err, "verification failed");
                EXIT_VERIFY
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate { .. } => "simulate",
        Command::Reduce { .. } => "reduce",
        Command::Predict { .. } => "predict",
        Command::SweepGamma { .. } => "sweep-gamma",
        Command::Spectrum { .. } => "spectrum",
        Command::Classify { .. } => "classify",
        Command::Reproduce { .. } => "reproduce",
        Command::Replay { .. } => "replay",
    }
}

fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Simulate {
            graph,
            schedule,
            samples,
            space,
            cap,
            out,
        } => simulate(graph, schedule, *samples, *space, *cap, out.as_deref()),
        Command::Reduce {
            graph,
            gamma,
            validate,
            csv,
        } => reduce(graph, *gamma, *validate, csv.as_deref()),
        Command::Predict { graph } => predict(graph),
        Command::SweepGamma {
            graph,
            stage,
            eps,
            coeffs,
            power,
            gammas,
            t_max,
            out,
        } => sweep_gamma(graph, *stage, eps, coeffs, *power, gammas, *t_max, out.as_deref()),
        Command::Spectrum {
            graph,
            stage,
            gamma,
            ms,
            out,
        } => spectrum(graph, *stage, *gamma, ms, out.as_deref()),
        Command::Classify { m } => classify(*m),
        Command::Reproduce { target, out_dir, m } => reproduce::reproduce(*target, out_dir, *m),
        Command::Replay { manifest, verify } => replay(manifest, *verify),
    }
}

/// A resolved `--graph/--N/--M/--config/--k` selection.
struct Selection {
    graph: Graph,
    marked: MarkedConfiguration,
    case: Option<CaseTag>,
    m: Option<usize>,
    k: Option<usize>,
}

impl GraphArgs {
    fn resolve(&self) -> Result<Selection> {
        match self.graph {
            Family::Simplex => {
                let m = self.m.ok_or_else(|| Error::InvalidParameter("--M is required for the simplex".into()))?;
                let graph = Graph::simplex(m)?;
                let marked = graph.configuration(self.config_name()?, self.k)?;
                let case = Some(marked.case_tag()).filter(|&c| c != CaseTag::Custom);
                Ok(Selection {
                    graph,
                    marked,
                    case,
                    m: Some(m),
                    k: self.k,
                })
            }
            Family::Complete => {
                let n = self.n.ok_or_else(|| Error::InvalidParameter("--N is required for the complete graph".into()))?;
                let graph = Graph::complete(n)?;
                let marked = match &self.config {
                    Some(spec) => graph.configuration(spec, None)?,
                    None => MarkedConfiguration::new(&graph, (0..self.k.unwrap_or(1)).collect(), CaseTag::Custom)?,
                };
                Ok(Selection {
                    graph,
                    marked,
                    case: None,
                    m: None,
                    k: self.k,
                })
            }
        }
    }

    fn config_name(&self) -> Result<&str> {
        self.config
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("--config is required for the simplex".into()))
    }

    fn named(&self) -> Result<(CaseTag, usize, Option<usize>)> {
        let case: CaseTag = self.config_name()?.parse()?;
        if case == CaseTag::Custom {
            return Err(Error::InvalidParameter("a named configuration is required".into()));
        }
        let m = self.m.ok_or_else(|| Error::InvalidParameter("--M is required".into()))?;
        Ok((case, m, self.k))
    }

    fn complete(&self) -> Result<(usize, usize)> {
        let n = self.n.ok_or_else(|| Error::InvalidParameter("--N is required for the complete graph".into()))?;
        Ok((n, self.k.unwrap_or(1)))
    }
}

fn json_of<T: Serialize>(value: &T) -> Result<Value> {
    Ok(serde_json::to_value(value)?)
}

fn simulate(args: &GraphArgs, schedule: &str, samples: usize, space: Space, cap: usize, out: Option<&Path>) -> Result<Outcome> {
    let sel = args.resolve()?;
    let schedule = if schedule == "auto" {
        match (sel.case, sel.m) {
            (Some(case), Some(m)) => auto_schedule(case, m, sel.k)?,
            (None, None) => auto_schedule_complete(sel.graph.n_vertices(), sel.marked.k())?,
            _ => return Err(Error::InvalidParameter("--schedule auto needs a named configuration".into())),
        }
        .with_samples(samples)?
    } else {
        Schedule::parse(schedule, samples)?
    };
    let use_full = match space {
        Space::Full => true,
        Space::Reduced => false,
        Space::Auto => sel.graph.n_vertices() <= cap,
    };
    let system: Box<dyn SearchSystem> = if use_full {
        let mut full = FullSystem::new(sel.graph.clone(), sel.marked.clone())?;
        full.cap = cap;
        Box::new(full)
    } else if let (Some(case), Some(m)) = (sel.case, sel.m) {
        Box::new(ReducedSystem::from_case(case, m, sel.k)?)
    } else {
        Box::new(ReducedSystem::from_configuration(&sel.graph, &sel.marked)?)
    };
    let run = run_schedule(system.as_ref(), &schedule)?;
    let summary = run.summary();
    let json = json_of(&summary)?;
    let mut outcome = Outcome::new(format!("{json}\n"), json);
    outcome.parameters = json!({
        "graph": sel.graph.family(),
        "marked": sel.marked.vertices(),
        "config": args.config,
        "schedule": schedule,
        "space": if use_full { "full" } else { "reduced" },
    });
    if let Some(path) = out {
        run.series.save_csv(path)?;
        outcome.outputs.push(path.to_path_buf());
    }
    Ok(outcome)
}

fn format_matrix(matrix: &nalgebra::DMatrix<f64>, labels: &[String]) -> String {
    let mut s = format!("{:>6}", "");
    for l in labels {
        let _ = write!(s, " {l:>13}");
    }
    s.push('\n');
    for (i, l) in labels.iter().enumerate() {
        let _ = write!(s, "{l:>6}");
        for j in 0..matrix.ncols() {
            let _ = write!(s, " {:>13.6e}", matrix[(i, j)] + 0.0);
        }
        s.push('\n');
    }
    s
}

fn reduce(args: &GraphArgs, gamma: f64, validate: bool, csv: Option<&Path>) -> Result<Outcome> {
    let sel = args.resolve()?;
    let (partition, labels, report) = match (sel.case, sel.m) {
        (Some(case), Some(m)) => {
            let lr = LabeledReduction::new(case, m, sel.k)?;
            let report = if validate { Some(lr.report().clone()) } else { None };
            let labels: Vec<String> = lr.labels().iter().map(|l| l.to_string()).collect();
            (lr.partition().clone(), labels, report)
        }
        _ => {
            if validate {
                return Err(Error::InvalidParameter("--validate needs a named configuration".into()));
            }
            let p = coarsest_equitable_partition(&sel.graph, &sel.marked)?;
            let labels: Vec<String> = (0..p.dimension()).map(|i| i.to_string()).collect();
            (p, labels, None)
        }
    };
    let op = reduced_hamiltonian(&partition, gamma)?;
    let sizes = partition.cell_sizes();
    let mut text = format!("dimension {}\n{:>6} {:>10} {:>7}\n", partition.dimension(), "cell", "size", "marked");
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(text, "{l:>6} {:>10} {:>7}", sizes[i], partition.marked_cells()[i]);
    }
    let _ = write!(text, "\nH at gamma = {gamma}\n{}", format_matrix(op.matrix(), &labels));
    let matrix: Vec<Vec<f64>> = (0..op.dimension()).map(|i| op.matrix().row(i).iter().copied().collect()).collect();
    let cells: Vec<Value> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| json!({"label": l, "size": sizes[i], "marked": partition.marked_cells()[i]}))
        .collect();
    let mut json = json!({"dimension": partition.dimension(), "gamma": gamma, "cells": cells, "matrix": matrix});
    let mut verified = true;
    if let Some(r) = &report {
        let _ = writeln!(
            text,
            "\nclosed-form match: {} (max deviation {:.3e})",
            if r.matched { "yes" } else { "no" },
            r.max_deviation
        );
        json["match"] = json_of(r)?;
        verified = r.matched;
    }
    let mut outcome = Outcome::new(text, json);
    outcome.verified = verified;
    if let Some(path) = csv {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "cell,{}", labels.join(","))?;
        for (i, row) in matrix.iter().enumerate() {
            let cols: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{},{}", labels[i], cols.join(","))?;
        }
        w.flush()?;
        outcome.outputs.push(path.to_path_buf());
        outcome.parameters = json!({"config": args.config, "M": sel.m, "N": args.n, "gamma": gamma});
    }
    Ok(outcome)
}

fn predict(args: &GraphArgs) -> Result<Outcome> {
    let json = match args.graph {
        Family::Simplex => {
            let (case, m, k) = args.named()?;
            json_of(&analytic::predict(case, m, k)?)?
        }
        Family::Complete => {
            let (n, k) = args.complete()?;
            json!({"case": "complete", "N": n, "k": k, "stages": [analytic::predict_complete(n, k)?]})
        }
    };
    let mut text = String::new();
    if let Some(stages) = json["stages"].as_array() {
        let _ = writeln!(text, "{} (k = {})", json["case"].as_str().unwrap_or(""), json["k"]);
        for (i, s) in stages.iter().enumerate() {
            let _ = writeln!(
                text,
                "stage {}: gamma_c = {}, runtime = {}, gap = {}, {}",
                i + 1,
                s["gamma_c"],
                s["runtime"],
                s["gap"],
                s["evolution"].as_str().unwrap_or("")
            );
        }
    }
    Ok(Outcome::new(text, json))
}

#[allow(clippy::too_many_arguments)]
fn sweep_gamma(
    args: &GraphArgs,
    stage: usize,
    eps: &[f64],
    coeffs: &[f64],
    power: f64,
    gammas: &[f64],
    t_max: f64,
    out: Option<&Path>,
) -> Result<Outcome> {
    let points = match args.graph {
        Family::Simplex => {
            let (case, m, k) = args.named()?;
            let mut detunings = eps.to_vec();
            detunings.extend(coeffs.iter().map(|c| c / (m as f64).powf(power)));
            if detunings.is_empty() {
                detunings.push(0.0);
            }
            spectral::gamma_sweep(case, m, k, stage, &detunings)?
        }
        Family::Complete => {
            let (n, k) = args.complete()?;
            let gammas = if gammas.is_empty() { vec![1.0 / n as f64] } else { gammas.to_vec() };
            spectral::complete_gamma_sweep(n, k, &gammas, t_max, 4000)?
        }
    };
    let mut text = format!("{:>14} {:>14} {:>10} {:>12}\n", "epsilon", "gamma", "peak", "t_peak");
    for p in &points {
        let _ = writeln!(text, "{:>14.6e} {:>14.6e} {:>10.6} {:>12.4}", p.epsilon, p.gamma, p.peak_probability, p.t_peak);
    }
    let mut outcome = Outcome::new(text, json_of(&points)?);
    if let Some(path) = out {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "epsilon,peak_probability")?;
        for p in &points {
            writeln!(w, "{:.16e},{:.16e}", p.epsilon, p.peak_probability)?;
        }
        w.flush()?;
        outcome.outputs.push(path.to_path_buf());
        outcome.parameters = json!({"config": args.config, "M": args.m, "N": args.n, "stage": stage});
    }
    Ok(outcome)
}

fn spectrum(args: &GraphArgs, stage: usize, gamma: Option<f64>, ms: &[usize], out: Option<&Path>) -> Result<Outcome> {
    if !ms.is_empty() {
        let fit = match args.graph {
            Family::Simplex => {
                let case: CaseTag = args.config_name()?.parse()?;
                spectral::scaling_fit(case, stage, ms, args.k)?
            }
            Family::Complete => spectral::complete_scaling_fit(ms, args.k.unwrap_or(1))?,
        };
        let mut text = format!("exponent {:.6}, prefactor {:.6}\n", fit.exponent, fit.prefactor);
        for p in &fit.points {
            let _ = writeln!(text, "M = {:>6}: gap {:.6e}, predicted {:.6e}, rel. error {:.3e}", p.m, p.gap, p.predicted_gap, p.rel_error);
        }
        let mut outcome = Outcome::new(text, json_of(&fit)?);
        if let Some(path) = out {
            let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
            writeln!(w, "M,gap,predicted_gap,rel_error")?;
            for p in &fit.points {
                writeln!(w, "{},{:.16e},{:.16e},{:.16e}", p.m, p.gap, p.predicted_gap, p.rel_error)?;
            }
            w.flush()?;
            outcome.outputs.push(path.to_path_buf());
            outcome.parameters = json!({"config": args.config, "Ms": ms, "stage": stage});
        }
        return Ok(outcome);
    }
    let report = match args.graph {
        Family::Simplex => {
            let (case, m, k) = args.named()?;
            match gamma {
                Some(g) => spectral::gap_at(case, m, k, g, stage)?,
                None => spectral::gap_at_critical(case, m, k, stage)?,
            }
        }
        Family::Complete => {
            let (n, k) = args.complete()?;
            spectral::complete_gap_report(n, k, gamma.unwrap_or(1.0 / n as f64))?
        }
    };
    let text = format!(
        "gamma {:.9e}: E0 {:.9e}, E1 {:.9e}, gap {:.6e} (predicted {:.6e}, rel. error {:.3e}); overlaps {:.4} / {:.4}{}\n",
        report.gamma,
        report.e0,
        report.e1,
        report.gap,
        report.predicted_gap,
        report.relative_error,
        report.overlap_plus,
        report.overlap_minus,
        if report.flagged { " [ambiguous selection]" } else { "" }
    );
    Ok(Outcome::new(text, json_of(&report)?))
}

fn format_configuration(marked: &MarkedConfiguration, graph: &Graph) -> String {
    marked
        .vertices()
        .iter()
        .map(|&v| graph.coordinate(v).map_or(v.to_string(), |c| c.to_string()))
        .collect::<Vec<_>>()
        .join(",")
}

fn classify(m: usize) -> Result<Outcome> {
    let classes = classify_pairs(m)?;
    let graph = Graph::simplex(m)?;
    let mut text = format!("{} classes over {} pairs\n", classes.len(), classes.iter().map(|c| c.size).sum::<usize>());
    let mut rows = Vec::new();
    for c in &classes {
        let rep = format_configuration(&c.representative, &graph);
        let name = c.case.map_or("-".to_string(), |t| t.to_string());
        let _ = writeln!(text, "{name:>6}  dim {:>3}  size {:>6}  representative {rep}", c.dimension(), c.size);
        rows.push(json!({
            "case": name,
            "dimension": c.dimension(),
            "size": c.size,
            "representative": rep,
            "signature": c.signature,
        }));
    }
    Ok(Outcome::new(text, json!({"M": m, "classes": rows})))
}

fn replay(path: &Path, verify: bool) -> Result<Outcome> {
    let manifest = RunManifest::load(path)?;
    let before: Vec<Option<Vec<u8>>> = manifest.outputs.iter().map(|p| std::fs::read(p).ok()).collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(&manifest.args, &mut out, &mut err);
    if code == EXIT_USAGE {
        return Err(Error::InvalidParameter(format!(
            "replayed command failed: {}",
            String::from_utf8_lossy(&err).trim()
        )));
    }
    let mut identical = true;
    let mut files = Vec::new();
    for (p, old) in manifest.outputs.iter().zip(before) {
        let same = match (old, std::fs::read(p).ok()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        identical &= same;
        files.push(json!({"path": p, "identical": same}));
    }
    let text = format!(
        "replayed `{}` ({} outputs, {})\n",
        manifest.command,
        manifest.outputs.len(),
        if identical { "byte-identical" } else { "changed" }
    );
    let mut outcome = Outcome::new(text, json!({"command": manifest.command, "outputs": files, "identical": identical}));
    outcome.verified = code == EXIT_OK && (!verify || identical);
    Ok(outcome)
}

/// Checks a named case against its closed form; used by table reproduction.
pub(crate) fn match_report_json(case: CaseTag, m: usize) -> Result<(bool, Value)> {
    let r = validate_against_appendix(case, m, None)?;
    Ok((r.matched, json_of(&r)?))
}
