//! The search Hamiltonian `H = -γA - Σ_marked |i⟩⟨i|` in the full vertex
//! space, quantum states, and propagation.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, MarkedConfiguration};

/// Largest dimension handed to the dense eigensolver by default.
pub const DEFAULT_DENSE_CAP: usize = 5000;

const NORM_TOL: f64 = 1e-10;

/// Complex amplitudes over vertices (or over cells in a reduced space).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Checked constructor: the squared norm must be 1 within `1e-10`.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Unchecked constructor for amplitudes produced by unitary evolution.
    pub fn from_raw(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn from_real(amplitudes: &DVector<f64>) -> Result<Self> {
        Self::new(amplitudes.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn basis(n: usize, v: usize) -> Result<Self> {
        if v >= n {
            return Err(Error::InvalidParameter(format!("basis index {v} out of range for dimension {n}")));
        }
        let mut amplitudes = DVector::zeros(n);
        amplitudes[v] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn probability(&self, v: usize) -> f64 {
        self.amplitudes[v].norm_sqr()
    }
}

/// `|s⟩ = N^{-1/2} Σ_v |v⟩`.
pub fn uniform_state(n: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidSize("uniform state needs n >= 1".into()));
    }
    let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    Ok(StateVector::from_raw(DVector::from_element(n, a)))
}

/// Total probability on the marked vertices.
pub fn success_probability(psi: &StateVector, marked: &MarkedConfiguration) -> f64 {
    marked.vertices().iter().map(|&v| psi.probability(v)).sum()
}

/// Dense search Hamiltonian on a graph.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    entries: DMatrix<f64>,
    gamma: f64,
    marked: MarkedConfiguration,
    degree: usize,
}

impl HamiltonianMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn marked(&self) -> &MarkedConfiguration {
        &self.marked
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Upper bound on the spectral radius: `2γ·degree + 1`.
    pub fn spectral_bound(&self) -> f64 {
        2.0 * self.gamma * self.degree as f64 + 1.0
    }
}

pub fn check_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidParameter(format!("jumping rate must be finite and >= 0, got {gamma}")));
    }
    Ok(())
}

pub fn build_hamiltonian(graph: &Graph, marked: &MarkedConfiguration, gamma: f64) -> Result<HamiltonianMatrix> {
    check_gamma(gamma)?;
    marked.check_against(graph)?;
    let n = graph.n_vertices();
    let mut entries = DMatrix::zeros(n, n);
    for v in 0..n {
        for u in graph.neighbors(v) {
            if u > v {
                entries[(u, v)] = -gamma;
                entries[(v, u)] = -gamma;
            }
        }
    }
    for &v in marked.vertices() {
        entries[(v, v)] = -1.0;
    }
    Ok(HamiltonianMatrix {
        entries,
        gamma,
        marked: marked.clone(),
        degree: graph.degree(),
    })
}

/// `H ψ` for real `H` and complex `ψ`.
fn apply(h: &DMatrix<f64>, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let re = h * psi.map(|z| z.re);
    let im = h * psi.map(|z| z.im);
    re.zip_map(&im, Complex64::new)
}

/// Projection `Vᵀ ψ` for real `V`.
fn apply_transpose(v: &DMatrix<f64>, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let re = v.tr_mul(&psi.map(|z| z.re));
    let im = v.tr_mul(&psi.map(|z| z.im));
    re.zip_map(&im, Complex64::new)
}

/// `e^{-iHt}` from a full symmetric eigendecomposition `H = V Λ Vᵀ`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Propagator {
    pub fn new(h: &HamiltonianMatrix) -> Result<Self> {
        Self::from_matrix(h.entries(), DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(h: &HamiltonianMatrix, cap: usize) -> Result<Self> {
        Self::from_matrix(h.entries(), cap)
    }

    pub fn from_matrix(h: &DMatrix<f64>, cap: usize) -> Result<Self> {
        let dimension = h.nrows();
        if dimension > cap {
            return Err(Error::DimensionCap { dimension, cap });
        }
        let eig = SymmetricEigen::new(h.clone());
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Eigenbasis coefficients `Vᵀ ψ`.
    pub fn coefficients(&self, psi: &StateVector) -> DVector<Complex64> {
        apply_transpose(&self.eigenvectors, psi.amplitudes())
    }

    fn phased(&self, coeffs: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(c, &lambda)| c * Complex64::from_polar(1.0, -lambda * t)),
        )
    }

    fn evolve_coefficients(&self, coeffs: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        apply(&self.eigenvectors, &self.phased(coeffs, t))
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        self.check_len(psi)?;
        if t == 0.0 {
            return Ok(psi.clone());
        }
        Ok(StateVector::from_raw(self.evolve_coefficients(&self.coefficients(psi), t)))
    }

    /// Probability on `rows` at each time, using only those rows of `V`.
    pub fn probability_series(&self, psi: &StateVector, rows: &[usize], times: &[f64]) -> Result<Vec<f64>> {
        self.check_len(psi)?;
        let coeffs = self.coefficients(psi);
        let sub = self.eigenvectors.select_rows(rows);
        Ok(times
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    return rows.iter().map(|&v| psi.probability(v)).sum();
                }
                apply(&sub, &self.phased(&coeffs, t)).norm_squared()
            })
            .collect())
    }

    fn check_len(&self, psi: &StateVector) -> Result<()> {
        if psi.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: psi.len(),
            });
        }
        Ok(())
    }
}

/// Sampled evolution: success probability and optional per-cell
/// probabilities at each sample time.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub success_probability: Vec<f64>,
    pub cell_labels: Vec<String>,
    /// `cell_probabilities[i][c]` is the probability on cell `c` at `times[i]`.
    pub cell_probabilities: Vec<Vec<f64>>,
    #[serde(skip)]
    pub states: Option<Vec<StateVector>>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(time, probability)` of the largest success probability.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.times
            .iter()
            .copied()
            .zip(self.success_probability.iter().copied())
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.success_probability.last()?))
    }

    /// Appends `other`, dropping its first sample when it repeats our last time.
    pub fn extend(&mut self, mut other: TimeSeries) {
        let skip = match (self.times.last(), other.times.first()) {
            (Some(a), Some(b)) if a == b => 1,
            _ => 0,
        };
        if self.cell_labels.is_empty() {
            self.cell_labels = other.cell_labels.clone();
        }
        self.times.extend(other.times.drain(..).skip(skip));
        self.success_probability.extend(other.success_probability.drain(..).skip(skip));
        self.cell_probabilities.extend(other.cell_probabilities.drain(..).skip(skip));
        match (&mut self.states, other.states) {
            (Some(mine), Some(theirs)) => mine.extend(theirs.into_iter().skip(skip)),
            (None, Some(theirs)) if self.times.len() == theirs.len() - skip => {
                self.states = Some(theirs.into_iter().skip(skip).collect())
            }
            _ => {}
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "time,success_probability")?;
        for label in &self.cell_labels {
            write!(out, ",cell_{label}")?;
        }
        writeln!(out)?;
        for i in 0..self.len() {
            write!(out, "{:.16e},{:.16e}", self.times[i], self.success_probability[i])?;
            if let Some(cells) = self.cell_probabilities.get(i) {
                for p in cells {
                    write!(out, ",{p:.16e}")?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Exact evolution at each time in `times` via the eigendecomposition of `H`.
pub fn evolve_spectral(
    h: &HamiltonianMatrix,
    psi0: &StateVector,
    times: &[f64],
    keep_states: bool,
) -> Result<TimeSeries> {
    evolve_spectral_with_cap(h, psi0, times, keep_states, DEFAULT_DENSE_CAP)
}

pub fn evolve_spectral_with_cap(
    h: &HamiltonianMatrix,
    psi0: &StateVector,
    times: &[f64],
    keep_states: bool,
    cap: usize,
) -> Result<TimeSeries> {
    if psi0.len() != h.dimension() {
        return Err(Error::DimensionMismatch {
            expected: h.dimension(),
            actual: psi0.len(),
        });
    }
    let prop = Propagator::with_cap(h, cap)?;
    let marked = h.marked().vertices();
    let mut series = TimeSeries {
        times: times.to_vec(),
        ..TimeSeries::default()
    };
    if keep_states {
        let coeffs = prop.coefficients(psi0);
        let states: Vec<StateVector> = times
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    psi0.clone()
                } else {
                    StateVector::from_raw(prop.evolve_coefficients(&coeffs, t))
                }
            })
            .collect();
        series.success_probability = states.iter().map(|s| success_probability(s, h.marked())).collect();
        series.states = Some(states);
    } else {
        series.success_probability = prop.probability_series(psi0, marked, times)?;
    }
    Ok(series)
}

/// Classical fourth-order Runge–Kutta for `i dψ/dt = Hψ`, used to cross-check
/// the spectral propagator. Requires `dt · (2γ·degree + 1) <= 0.1`.
pub fn evolve_ode(h: &HamiltonianMatrix, psi0: &StateVector, t: f64, dt: f64) -> Result<StateVector> {
    if psi0.len() != h.dimension() {
        return Err(Error::DimensionMismatch {
            expected: h.dimension(),
            actual: psi0.len(),
        });
    }
    let bound = h.spectral_bound();
    let suggested = 0.1 / bound;
    if dt.is_nan() || dt <= 0.0 || dt * bound > 0.1 {
        return Err(Error::StepTooLarge { dt, suggested });
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let steps = (t.abs() / dt).ceil() as usize;
    let step = t / steps as f64;
    let minus_i = Complex64::new(0.0, -1.0);
    let f = |psi: &DVector<Complex64>| apply(h.entries(), psi) * minus_i;
    let mut psi = psi0.amplitudes().clone();
    for _ in 0..steps {
        let k1 = f(&psi);
        let k2 = f(&(&psi + &k1 * Complex64::from(step / 2.0)));
        let k3 = f(&(&psi + &k2 * Complex64::from(step / 2.0)));
        let k4 = f(&(&psi + &k3 * Complex64::from(step)));
        psi += (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(step / 6.0);
    }
    Ok(StateVector::from_raw(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CaseTag;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn complete_marked(n: usize, k: usize) -> (Graph, MarkedConfiguration) {
        let g = Graph::complete(n).unwrap();
        let m = MarkedConfiguration::new(&g, (0..k).collect(), CaseTag::Custom).unwrap();
        (g, m)
    }

    #[test]
    fn entries_match_definition() {
        let (g, m) = complete_marked(6, 2);
        let h = build_hamiltonian(&g, &m, 0.1).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = match (i == j, i < 2) {
                    (true, true) => -1.0,
                    (true, false) => 0.0,
                    _ => -0.1,
                };
                assert_eq!(h.entries()[(i, j)], expected);
            }
        }
        assert_eq!(h.entries(), &h.entries().transpose());
    }

    #[test]
    fn simplex_entries() {
        let g = Graph::simplex(5).unwrap();
        let m = crate::graph::named_configuration(CaseTag::TwoB, 5, None).unwrap();
        let h = build_hamiltonian(&g, &m, 0.25).unwrap();
        for u in 0..30 {
            for v in 0..30 {
                let expected = if u == v {
                    if m.contains(u) { -1.0 } else { 0.0 }
                } else if g.has_edge(u, v) {
                    -0.25
                } else {
                    0.0
                };
                assert_eq!(h.entries()[(u, v)], expected);
            }
        }
    }

    #[test]
    fn oracle_only_spectrum() {
        let (g, m) = complete_marked(7, 3);
        let h = build_hamiltonian(&g, &m, 0.0).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let mut ev: Vec<f64> = prop.eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (i, e) in ev.iter().enumerate() {
            assert_relative_eq!(*e, if i < 3 { -1.0 } else { 0.0 }, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_and_success() {
        let s = uniform_state(4).unwrap();
        for a in s.amplitudes().iter() {
            assert_eq!(*a, Complex64::new(0.5, 0.0));
        }
        assert!(uniform_state(0).is_err());
        let g = Graph::simplex(5).unwrap();
        let m = crate::graph::named_configuration(CaseTag::TwoC, 5, None).unwrap();
        assert_relative_eq!(success_probability(&uniform_state(30).unwrap(), &m), 2.0 / 30.0, epsilon = 1e-15);
        let v = m.vertices()[0];
        assert_eq!(success_probability(&StateVector::basis(30, v).unwrap(), &m), 1.0);
        let mut amps = DVector::zeros(30);
        let unmarked = (0..30).find(|u| !m.contains(*u)).unwrap();
        amps[v] = Complex64::new(0.5f64.sqrt(), 0.0);
        amps[unmarked] = Complex64::new(0.0, 0.5f64.sqrt());
        assert_relative_eq!(success_probability(&StateVector::new(amps).unwrap(), &m), 0.5, epsilon = 1e-15);
        assert!(g.n_vertices() == 30);
    }

    #[test]
    fn unnormalized_rejected() {
        let amps = DVector::from_element(3, Complex64::new(1.0, 0.0));
        assert!(matches!(StateVector::new(amps), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn zero_time_is_identity() {
        let (g, m) = complete_marked(10, 1);
        let h = build_hamiltonian(&g, &m, 0.1).unwrap();
        let s = uniform_state(10).unwrap();
        let ts = evolve_spectral(&h, &s, &[0.0], true).unwrap();
        assert_eq!(ts.states.unwrap()[0], s);
        assert_eq!(evolve_ode(&h, &s, 0.0, 0.01).unwrap(), s);
    }

    #[test]
    fn grover_limit_at_n1024() {
        let (g, m) = complete_marked(1024, 4);
        let n = 1024.0;
        let h = build_hamiltonian(&g, &m, 1.0 / n).unwrap();
        let s = uniform_state(1024).unwrap();
        let ts = evolve_spectral(&h, &s, &[8.0 * PI], false).unwrap();
        assert!(ts.success_probability[0] >= 0.99, "{}", ts.success_probability[0]);
        let h2 = build_hamiltonian(&g, &m, 2.0 / n).unwrap();
        let times: Vec<f64> = (0..=500).map(|i| 50.0 * i as f64 / 500.0).collect();
        let ts2 = evolve_spectral(&h2, &s, &times, false).unwrap();
        assert!(ts2.peak().unwrap().1 <= 0.05);
    }

    #[test]
    fn phase_of_marked_eigenstate() {
        let (g, m) = complete_marked(5, 1);
        let h = build_hamiltonian(&g, &m, 0.0).unwrap();
        let s = StateVector::basis(5, 0).unwrap();
        let out = evolve_ode(&h, &s, PI, 0.01).unwrap();
        assert!((out.amplitudes()[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        let out = Propagator::new(&h).unwrap().evolve(&s, PI).unwrap();
        assert!((out.amplitudes()[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ode_matches_spectral() {
        let (g, m) = complete_marked(64, 1);
        let h = build_hamiltonian(&g, &m, 1.0 / 64.0).unwrap();
        let s = uniform_state(64).unwrap();
        let t = PI / 2.0 * 8.0;
        let a = Propagator::new(&h).unwrap().evolve(&s, t).unwrap();
        let b = evolve_ode(&h, &s, t, 0.005).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-6);
    }

    #[test]
    fn ode_rejects_large_steps() {
        let (g, m) = complete_marked(64, 1);
        let h = build_hamiltonian(&g, &m, 1.0).unwrap();
        let s = uniform_state(64).unwrap();
        match evolve_ode(&h, &s, 1.0, 0.01) {
            Err(Error::StepTooLarge { suggested, .. }) => assert_relative_eq!(suggested, 0.1 / 127.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cap_enforced() {
        let (g, m) = complete_marked(20, 1);
        let h = build_hamiltonian(&g, &m, 0.05).unwrap();
        let s = uniform_state(20).unwrap();
        assert!(matches!(
            evolve_spectral_with_cap(&h, &s, &[1.0], false, 10),
            Err(Error::DimensionCap { dimension: 20, cap: 10 })
        ));
    }

    #[test]
    fn csv_layout() {
        let ts = TimeSeries {
            times: vec![0.0, 0.5],
            success_probability: vec![0.1, 0.2],
            cell_labels: vec!["a".into(), "b".into()],
            cell_probabilities: vec![vec![0.1, 0.9], vec![0.2, 0.8]],
            states: None,
        };
        let mut buf = Vec::new();
        ts.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,success_probability,cell_a,cell_b");
        let fields: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields, vec![0.5, 0.2, 0.2, 0.8]);
    }
}
