//! Numerical checks of the perturbative picture in the reduced subspace:
//! energy gaps at the critical jumping rate, the structure of the two
//! eigenvectors at the avoided crossing, sensitivity to detuning, and
//! power-law fits of gaps against `M`.

use nalgebra::{DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, CasePrediction, StagePrediction};
use crate::error::{Error, Result};
use crate::graph::{CaseTag, Graph, MarkedConfiguration};
use crate::hamiltonian::{Propagator, StateVector};
use crate::reduction::{coarsest_equitable_partition, reduced_hamiltonian, LabeledReduction};

/// Samples per sweep point over `[0, 2·runtime]`.
pub const SWEEP_SAMPLES: usize = 4000;
/// Eigenpairs whose combined overlap falls below this are flagged.
pub const SELECTION_THRESHOLD: f64 = 0.5;

/// A named configuration with its aligned reduction and predictions.
#[derive(Debug, Clone)]
pub struct CaseModel {
    pub reduction: LabeledReduction,
    pub prediction: CasePrediction,
}

impl CaseModel {
    pub fn new(case: CaseTag, m: usize, k: Option<usize>) -> Result<Self> {
        Ok(Self {
            reduction: LabeledReduction::new(case, m, k)?,
            prediction: analytic::predict(case, m, k)?,
        })
    }

    pub fn stage(&self, stage: usize) -> Result<&StagePrediction> {
        self.prediction.stage(stage)
    }

    /// State a stage starts from: `|s⟩` for the first stage, the source
    /// cell superposition for the second.
    pub fn stage_start(&self, stage: usize) -> Result<StateVector> {
        let s = self.stage(stage)?;
        if stage == 1 {
            Ok(self.reduction.operator(s.gamma_c)?.start_state())
        } else {
            StateVector::from_real(&self.reduction.model_vector(&s.source)?)
        }
    }

    pub fn cells(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.reduction
                    .cell(l)
                    .ok_or_else(|| Error::Parse(format!("no cell labeled `{l}`")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    #[serde(rename = "M")]
    pub m: usize,
    pub gamma: f64,
    pub stage: usize,
    /// Selected eigenvalues, `e0 <= e1`.
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub predicted_gap: f64,
    pub relative_error: f64,
    /// Squared overlap of the selected eigenvectors with `(u+v)/√2` and
    /// `(u-v)/√2`, for the better of the two assignments.
    pub overlap_plus: f64,
    pub overlap_minus: f64,
    /// `|⟨u|ψ⟩|² + |⟨v|ψ⟩|²` for each selected eigenvector.
    pub combined_overlaps: [f64; 2],
    pub flagged: bool,
}

impl GapReport {
    pub fn min_model_overlap(&self) -> f64 {
        self.overlap_plus.min(self.overlap_minus)
    }
}

fn select_pair(
    matrix: &nalgebra::DMatrix<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> (f64, f64, f64, f64, [f64; 2]) {
    let eig = SymmetricEigen::new(matrix.clone());
    let weight = |j: usize| {
        let psi = eig.eigenvectors.column(j);
        u.dot(&psi).powi(2) + v.dot(&psi).powi(2)
    };
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)));
    let (mut i0, mut i1) = (idx[0], idx[1]);
    if eig.eigenvalues[i0] > eig.eigenvalues[i1] {
        std::mem::swap(&mut i0, &mut i1);
    }
    let plus = (u + v).normalize();
    let minus = (u - v).normalize();
    let ov = |m: &DVector<f64>, j: usize| m.dot(&eig.eigenvectors.column(j)).powi(2);
    let (p0, m0, p1, m1) = (ov(&plus, i0), ov(&minus, i0), ov(&plus, i1), ov(&minus, i1));
    let (op, om) = if p0 + m1 >= m0 + p1 { (p0, m1) } else { (p1, m0) };
    (eig.eigenvalues[i0], eig.eigenvalues[i1], op, om, [weight(i0), weight(i1)])
}

/// Gap of the eigenpair with the largest combined overlap on the stage's
/// source and target cell vectors, at jumping rate `gamma`.
pub fn gap_at(case: CaseTag, m: usize, k: Option<usize>, gamma: f64, stage: usize) -> Result<GapReport> {
    let model = CaseModel::new(case, m, k)?;
    gap_for_model(&model, gamma, stage)
}

/// [`gap_at`] at the predicted critical rate.
pub fn gap_at_critical(case: CaseTag, m: usize, k: Option<usize>, stage: usize) -> Result<GapReport> {
    let model = CaseModel::new(case, m, k)?;
    let gamma = model.stage(stage)?.gamma_c;
    gap_for_model(&model, gamma, stage)
}

pub fn gap_for_model(model: &CaseModel, gamma: f64, stage: usize) -> Result<GapReport> {
    let s = model.stage(stage)?;
    let op = model.reduction.operator(gamma)?;
    let u = model.reduction.model_vector(&s.source)?;
    let v = model.reduction.model_vector(&s.target)?;
    let (e0, e1, overlap_plus, overlap_minus, combined) = select_pair(op.matrix(), &u, &v);
    let gap = e1 - e0;
    Ok(GapReport {
        m: model.prediction.m,
        gamma,
        stage,
        e0,
        e1,
        gap,
        predicted_gap: s.gap,
        relative_error: (gap - s.gap).abs() / s.gap,
        overlap_plus,
        overlap_minus,
        combined_overlaps: combined,
        flagged: combined.iter().any(|&w| w < SELECTION_THRESHOLD),
    })
}

fn complete_reduction(n: usize, k: usize, gamma: f64) -> Result<crate::reduction::ReducedOperator> {
    let graph = Graph::complete(n)?;
    let marked = MarkedConfiguration::new(&graph, (0..k).collect(), CaseTag::Custom)?;
    let partition = coarsest_equitable_partition(&graph, &marked)?;
    reduced_hamiltonian(&partition, gamma)
}

/// Gap of the two-dimensional search operator on `K_N`, with the model
/// vectors `|s⟩` and `|a⟩`.
pub fn complete_gap_report(n: usize, k: usize, gamma: f64) -> Result<GapReport> {
    let predicted = analytic::complete_gap(n, k, gamma)?;
    let op = complete_reduction(n, k, gamma)?;
    let s = op.start_vector().clone();
    let a = DVector::from_vec(vec![1.0, 0.0]);
    let (e0, e1, overlap_plus, overlap_minus, combined) = select_pair(op.matrix(), &s, &a);
    let gap = e1 - e0;
    Ok(GapReport {
        m: n,
        gamma,
        stage: 1,
        e0,
        e1,
        gap,
        predicted_gap: predicted,
        relative_error: (gap - predicted).abs() / predicted,
        overlap_plus,
        overlap_minus,
        combined_overlaps: combined,
        flagged: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub gamma: f64,
    pub peak_probability: f64,
    pub t_peak: f64,
}

pub fn uniform_grid(t_max: f64, samples: usize) -> Vec<f64> {
    let samples = samples.max(1);
    (0..=samples).map(|i| t_max * i as f64 / samples as f64).collect()
}

fn peak_of(times: &[f64], probs: &[f64]) -> (f64, f64) {
    times
        .iter()
        .zip(probs)
        .fold((0.0, f64::NEG_INFINITY), |best, (&t, &p)| if p > best.1 { (t, p) } else { best })
}

/// Peak probability on the stage's target cells over `[0, 2·runtime]`,
/// starting from the stage's source state, at `γ = γ_c + ε` for each `ε`.
pub fn gamma_sweep(case: CaseTag, m: usize, k: Option<usize>, stage: usize, detunings: &[f64]) -> Result<Vec<SweepPoint>> {
    let model = CaseModel::new(case, m, k)?;
    gamma_sweep_model(&model, stage, detunings)
}

pub fn gamma_sweep_model(model: &CaseModel, stage: usize, detunings: &[f64]) -> Result<Vec<SweepPoint>> {
    let s = model.stage(stage)?;
    let start = model.stage_start(stage)?;
    let target = model.cells(&s.target)?;
    let times = uniform_grid(2.0 * s.runtime, SWEEP_SAMPLES);
    detunings
        .par_iter()
        .map(|&epsilon| {
            let gamma = s.gamma_c + epsilon;
            let op = model.reduction.operator(gamma)?;
            let prop = Propagator::from_matrix(op.matrix(), usize::MAX)?;
            let probs = prop.probability_series(&start, &target, &times)?;
            let (t_peak, peak_probability) = peak_of(&times, &probs);
            Ok(SweepPoint {
                epsilon,
                gamma,
                peak_probability,
                t_peak,
            })
        })
        .collect()
}

/// Peak success probability on `K_N` from `|s⟩` over `[0, t_max]` for each
/// jumping rate; `epsilon` is reported relative to `1/N`.
pub fn complete_gamma_sweep(n: usize, k: usize, gammas: &[f64], t_max: f64, samples: usize) -> Result<Vec<SweepPoint>> {
    let times = uniform_grid(t_max, samples);
    gammas
        .par_iter()
        .map(|&gamma| {
            let op = complete_reduction(n, k, gamma)?;
            let prop = Propagator::from_matrix(op.matrix(), usize::MAX)?;
            let probs = prop.probability_series(&op.start_state(), &[0], &times)?;
            let (t_peak, peak_probability) = peak_of(&times, &probs);
            Ok(SweepPoint {
                epsilon: gamma - 1.0 / n as f64,
                gamma,
                peak_probability,
                t_peak,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GapPoint {
    #[serde(rename = "M")]
    pub m: usize,
    pub gamma: f64,
    pub gap: f64,
    pub predicted_gap: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub points: Vec<GapPoint>,
}

/// Least-squares fit of `y = A x^p` in log–log space; returns `(p, A)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least two paired points, got {} and {}", xs.len(), ys.len())));
    }
    if xs.iter().chain(ys).any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::DegenerateFit("all values must be positive and finite".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(Error::DegenerateFit("abscissae are all equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}

/// Fits the numerical gap at the predicted critical rate against `M`.
pub fn scaling_fit(case: CaseTag, stage: usize, ms: &[usize], k: Option<usize>) -> Result<ScalingFit> {
    if ms.len() < 3 || ms.iter().any(|&m| m < 25) {
        return Err(Error::DegenerateFit(format!("need at least three values of M, all >= 25, got {ms:?}")));
    }
    let points = ms
        .par_iter()
        .map(|&m| {
            let r = gap_at_critical(case, m, k, stage)?;
            Ok(GapPoint {
                m,
                gamma: r.gamma,
                gap: r.gap,
                predicted_gap: r.predicted_gap,
                rel_error: r.relative_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.gap).collect();
    let (exponent, prefactor) = fit_power_law(&xs, &ys)?;
    Ok(ScalingFit {
        exponent,
        prefactor,
        points,
    })
}

/// Formula-based fit for `K_N` at `γ = 1/N`.
pub fn complete_scaling_fit(ns: &[usize], k: usize) -> Result<ScalingFit> {
    let points = ns
        .iter()
        .map(|&n| {
            let gamma = 1.0 / n as f64;
            let gap = analytic::complete_gap(n, k, gamma)?;
            let predicted = analytic::predict_complete(n, k)?.gap;
            Ok(GapPoint {
                m: n,
                gamma,
                gap,
                predicted_gap: predicted,
                rel_error: (gap - predicted).abs() / predicted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.gap).collect();
    let (exponent, prefactor) = fit_power_law(&xs, &ys)?;
    Ok(ScalingFit {
        exponent,
        prefactor,
        points,
    })
}
