//! Closed-form subspace Hamiltonians for the named configurations, written
//! as functions of `M` (and `k`), and the alignment of computed partitions
//! against them.
//!
//! Each matrix stores the adjacency part `Q` of `H = -γQ - Σ_marked |P⟩⟨P|`
//! together with the cell labels, cell sizes and marked flags, so that a
//! computed [`ReducedOperator`] can be matched cell by cell.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{coarsest_equitable_partition, reduced_hamiltonian, EquitablePartition, ReducedOperator};
use crate::error::{Error, Result};
use crate::graph::{named_configuration, CaseTag, Graph, MarkedConfiguration};

/// Entry tolerance used while searching for an aligning permutation.
const ALIGN_TOL: f64 = 1e-9;
/// Maximum entry deviation for a match.
pub const MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct AppendixMatrix {
    pub labels: Vec<&'static str>,
    pub sizes: Vec<usize>,
    pub marked: Vec<bool>,
    pub adjacency: DMatrix<f64>,
}

impl AppendixMatrix {
    fn new(labels: &[&'static str], sizes: Vec<usize>, marked: &[&str], rows: Vec<Vec<f64>>) -> Self {
        let dim = labels.len();
        assert_eq!(sizes.len(), dim);
        assert_eq!(rows.len(), dim);
        let adjacency = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        assert_eq!(adjacency, adjacency.transpose(), "appendix matrix must be symmetric");
        Self {
            labels: labels.to_vec(),
            sizes,
            marked: labels.iter().map(|l| marked.contains(l)).collect(),
            adjacency,
        }
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    /// `-γQ - P_marked`.
    pub fn hamiltonian(&self, gamma: f64) -> DMatrix<f64> {
        let mut h = self.adjacency.scale(-gamma);
        for (i, &m) in self.marked.iter().enumerate() {
            if m {
                h[(i, i)] -= 1.0;
            }
        }
        h
    }

    /// Drops cells whose size formula evaluates to zero (e.g. `h` when
    /// `k = 1`); their rows and columns vanish from the subspace.
    pub fn without_empty_cells(&self) -> Self {
        let keep: Vec<usize> = (0..self.dimension()).filter(|&i| self.sizes[i] > 0).collect();
        Self {
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
            sizes: keep.iter().map(|&i| self.sizes[i]).collect(),
            marked: keep.iter().map(|&i| self.marked[i]).collect(),
            adjacency: DMatrix::from_fn(keep.len(), keep.len(), |i, j| self.adjacency[(keep[i], keep[j])]),
        }
    }
}

/// The closed-form subspace matrix for a named case. `k` is only read by
/// [`CaseTag::KInClique`]; `two-a` is the same family at `k = 2`.
pub fn appendix_matrix(case: CaseTag, m: usize, k: Option<usize>) -> Result<AppendixMatrix> {
    if m < 5 {
        return Err(Error::InvalidSize(format!("named configurations need M >= 5, got {m}")));
    }
    let r = |x: usize| (x as f64).sqrt();
    let f = |x: usize| x as f64;
    let mat = match case {
        CaseTag::TwoA | CaseTag::KInClique => {
            let k = if case == CaseTag::TwoA {
                2
            } else {
                k.ok_or_else(|| Error::InvalidMarked("k-in-clique needs k".into()))?
            };
            if k == 0 || k >= m {
                return Err(Error::InvalidMarked(format!("k-in-clique needs 1 <= k < M, got k = {k}")));
            }
            let (mk, mk1) = (m - k, m - k - 1);
            AppendixMatrix::new(
                &["a", "b", "c", "d", "e", "f", "g", "h"],
                vec![k, mk, k, k * mk, mk, k * mk, mk1 * mk, k * (k - 1)],
                &["a"],
                vec![
                    vec![f(k - 1), r(k * mk), 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                    vec![r(k * mk), f(mk1), 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                    vec![1.0, 0.0, 0.0, r(mk), 0.0, 0.0, 0.0, r(k - 1)],
                    vec![0.0, 0.0, r(mk), f(mk1), 0.0, 1.0, 0.0, r(mk * (k - 1))],
                    vec![0.0, 1.0, 0.0, 0.0, 0.0, r(k), r(mk1), 0.0],
                    vec![0.0, 0.0, 0.0, 1.0, r(k), f(k - 1), r(k * mk1), 0.0],
                    vec![0.0, 0.0, 0.0, 0.0, r(mk1), r(k * mk1), f(mk1), 0.0],
                    vec![0.0, 0.0, r(k - 1), r(mk * (k - 1)), 0.0, 0.0, 0.0, f(k - 1)],
                ],
            )
        }
        CaseTag::TwoB => AppendixMatrix::new(
            &["a", "b", "e", "g"],
            vec![2, 2 * (m - 1), 2 * (m - 1), (m - 1) * (m - 2)],
            &["a"],
            vec![
                vec![1.0, r(m - 1), 0.0, 0.0],
                vec![r(m - 1), f(m - 2), 1.0, 0.0],
                vec![0.0, 1.0, 1.0, r(2 * (m - 2))],
                vec![0.0, 0.0, r(2 * (m - 2)), f(m - 2)],
            ],
        ),
        CaseTag::TwoC => {
            let (m2, m3) = (m - 2, m - 3);
            AppendixMatrix::new(
                &["a", "b", "c", "d", "e", "f", "g", "i"],
                vec![2, 2 * m2, 2, m2, 2 * m2, m2, m2 * m3, 2],
                &["a"],
                vec![
                    vec![0.0, r(m2), 1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
                    vec![r(m2), f(m3), 0.0, 0.0, 1.0, 0.0, 0.0, r(m2)],
                    vec![1.0, 0.0, 1.0, r(2 * m2), 0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, r(2 * m2), f(m3), 0.0, 1.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0, 0.0, 1.0, r(2), r(2 * m3), 0.0],
                    vec![0.0, 0.0, 0.0, 1.0, r(2), 0.0, r(m3), 0.0],
                    vec![0.0, 0.0, 0.0, 0.0, r(2 * m3), r(m3), f(m3), 0.0],
                    vec![1.0, r(m2), 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
                ],
            )
        }
        CaseTag::TwoD => {
            let (m3, m4) = (m - 3, m - 4);
            let (a, b) = (r(m3), r(2 * m4));
            AppendixMatrix::new(
                &["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k"],
                vec![2, 2 * m3, 2, 2 * m3, 2 * m3, 2 * m3, m3 * m4, 2, 2, 2, 2],
                &["a"],
                vec![
                    vec![0.0, a, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0],
                    vec![a, f(m4), 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, a, a, 0.0],
                    vec![1.0, 0.0, 0.0, a, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
                    vec![0.0, 0.0, a, f(m4), 0.0, 1.0, 0.0, a, 0.0, 0.0, a],
                    vec![0.0, 1.0, 0.0, 0.0, 1.0, 2.0, b, 0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 1.0, 2.0, 1.0, b, 0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0, b, b, f(m4), 0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 1.0, a, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
                    vec![1.0, a, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0],
                    vec![1.0, a, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0],
                    vec![0.0, 0.0, 1.0, a, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0],
                ],
            )
        }
        CaseTag::TwoE => {
            let (m2, m3) = (m - 2, m - 3);
            let (a, b) = (r(m2), r(m3));
            AppendixMatrix::new(
                &["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m"],
                vec![1, m2, 1, 1, m2, 1, m2, m2, 1, 1, m2, m2, m2 * m3],
                &["a", "d"],
                vec![
                    vec![0.0, a, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
                    vec![a, f(m3), 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, a, 0.0, 0.0, 0.0, 0.0],
                    vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, a, 0.0, 0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, a, 0.0, 0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, b],
                    vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, a, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0, 0.0, a, f(m3), 0.0, 0.0, a, 1.0, 0.0, 0.0],
                    vec![0.0, 0.0, a, a, 0.0, 0.0, 0.0, f(m3), 0.0, 0.0, 0.0, 1.0, 0.0],
                    vec![1.0, a, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, a, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, b],
                    vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, b],
                    vec![0.0, 0.0, 0.0, 0.0, b, 0.0, 0.0, 0.0, 0.0, 0.0, b, b, f(m3)],
                ],
            )
        }
        CaseTag::Ring1 => AppendixMatrix::new(
            &["a", "b", "c"],
            vec![m + 1, (m + 1) * (m - 2), m + 1],
            &["a"],
            vec![
                vec![0.0, r(m - 2), 2.0],
                vec![r(m - 2), f(m - 2), r(m - 2)],
                vec![2.0, r(m - 2), 0.0],
            ],
        ),
        CaseTag::CliquePlus1 => {
            let (a, b) = (r(m - 1), r(m - 2));
            AppendixMatrix::new(
                &["a", "b", "c", "d", "e", "f", "g"],
                vec![1, m - 1, 1, m - 1, m - 1, m - 1, (m - 1) * (m - 2)],
                &["a", "b", "c"],
                vec![
                    vec![0.0, a, 1.0, 0.0, 0.0, 0.0, 0.0],
                    vec![a, f(m - 2), 0.0, 0.0, 1.0, 0.0, 0.0],
                    vec![1.0, 0.0, 0.0, a, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, a, f(m - 2), 0.0, 1.0, 0.0],
                    vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, b],
                    vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, b],
                    vec![0.0, 0.0, 0.0, 0.0, b, b, f(m - 2)],
                ],
            )
        }
        CaseTag::Ring2 => AppendixMatrix::new(
            &["a", "b"],
            vec![2 * (m + 1), (m + 1) * (m - 2)],
            &["a"],
            vec![vec![2.0, r(2 * (m - 2))], vec![r(2 * (m - 2)), f(m - 2)]],
        ),
        CaseTag::Ring2Shift => {
            let a = r(2 * (m - 4));
            AppendixMatrix::new(
                &["a", "b", "c"],
                vec![2 * (m + 1), (m - 4) * (m + 1), 2 * (m + 1)],
                &["a"],
                vec![vec![1.0, a, 3.0], vec![a, f(m - 4), a], vec![3.0, a, 1.0]],
            )
        }
        CaseTag::Custom => return Err(Error::UnknownCase("custom".into())),
    };
    Ok(mat)
}

/// Result of aligning a computed reduced operator with its closed form.
#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub case: CaseTag,
    pub m: usize,
    pub k: usize,
    pub dimension: usize,
    /// Appendix label of each computed cell, in partition order.
    pub labels: Vec<&'static str>,
    pub cell_sizes: Vec<usize>,
    pub max_deviation: f64,
    pub matched: bool,
}

/// Gammas at which computed and closed-form operators are compared.
fn probe_gammas(m: usize) -> [f64; 2] {
    [1.0, 1.0 / m as f64]
}

struct Aligner<'a> {
    ops: Vec<DMatrix<f64>>,
    refs: Vec<DMatrix<f64>>,
    sizes: &'a [usize],
    marked: &'a [bool],
    appendix: &'a AppendixMatrix,
    assignment: Vec<usize>,
    used: Vec<bool>,
    deepest: Vec<usize>,
}

impl Aligner<'_> {
    fn compatible(&self, cell: usize, target: usize) -> Option<String> {
        if self.sizes[cell] != self.appendix.sizes[target] {
            return Some(format!("size {} vs {}", self.sizes[cell], self.appendix.sizes[target]));
        }
        if self.marked[cell] != self.appendix.marked[target] {
            return Some("marked flag differs".into());
        }
        for (op, rf) in self.ops.iter().zip(&self.refs) {
            if (op[(cell, cell)] - rf[(target, target)]).abs() > ALIGN_TOL {
                return Some(format!("diagonal {} vs {}", op[(cell, cell)], rf[(target, target)]));
            }
            for (prev, &t) in self.assignment.iter().enumerate() {
                if (op[(cell, prev)] - rf[(target, t)]).abs() > ALIGN_TOL {
                    return Some(format!(
                        "entry ({},{}) = {} vs ({},{}) = {}",
                        cell,
                        prev,
                        op[(cell, prev)],
                        self.appendix.labels[target],
                        self.appendix.labels[t],
                        rf[(target, t)]
                    ));
                }
            }
        }
        None
    }

    fn search(&mut self) -> bool {
        let cell = self.assignment.len();
        if cell > self.deepest.len() {
            self.deepest = self.assignment.clone();
        }
        if cell == self.sizes.len() {
            return true;
        }
        for target in 0..self.appendix.dimension() {
            if self.used[target] || self.compatible(cell, target).is_some() {
                continue;
            }
            self.used[target] = true;
            self.assignment.push(target);
            if self.search() {
                return true;
            }
            self.assignment.pop();
            self.used[target] = false;
        }
        false
    }
}

/// Finds the cell permutation that maps `partition` onto `appendix`
/// (returned as the appendix index of each computed cell).
fn align(partition: &EquitablePartition, appendix: &AppendixMatrix, m: usize, case: CaseTag) -> Result<(Vec<usize>, f64)> {
    let sizes = partition.cell_sizes();
    if sizes.len() != appendix.dimension() {
        return Err(Error::AppendixMismatch {
            case: case.to_string(),
            detail: format!(
                "computed dimension {} (sizes {:?}) but closed form has {} (sizes {:?})",
                sizes.len(),
                sizes,
                appendix.dimension(),
                appendix.sizes
            ),
        });
    }
    let gammas = probe_gammas(m);
    let ops = gammas
        .iter()
        .map(|&g| reduced_hamiltonian(partition, g).map(|op| op.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<DMatrix<f64>> = gammas.iter().map(|&g| appendix.hamiltonian(g)).collect();
    let mut aligner = Aligner {
        ops,
        refs,
        sizes: &sizes,
        marked: partition.marked_cells(),
        appendix,
        assignment: Vec::new(),
        used: vec![false; appendix.dimension()],
        deepest: Vec::new(),
    };
    if !aligner.search() {
        aligner.assignment = aligner.deepest.clone();
        let stuck = aligner.assignment.len();
        let reasons: Vec<String> = (0..appendix.dimension())
            .filter(|&t| !aligner.assignment.contains(&t))
            .filter_map(|t| aligner.compatible(stuck, t).map(|why| format!("{}: {}", appendix.labels[t], why)))
            .collect();
        return Err(Error::AppendixMismatch {
            case: case.to_string(),
            detail: format!(
                "no cell permutation aligns the operators; deepest partial alignment {} of {} cells; \
                 offending entries for cell {}: [{}]",
                stuck,
                sizes.len(),
                stuck,
                reasons.join("; ")
            ),
        });
    }
    let perm = aligner.assignment.clone();
    let mut dev: f64 = 0.0;
    for (op, rf) in aligner.ops.iter().zip(&aligner.refs) {
        for i in 0..perm.len() {
            for j in 0..perm.len() {
                dev = dev.max((op[(i, j)] - rf[(perm[i], perm[j])]).abs());
            }
        }
    }
    Ok((perm, dev))
}

/// Computes the coarsest equitable partition of a named configuration and
/// aligns its reduced operator with the closed-form matrix.
pub fn validate_against_appendix(case: CaseTag, m: usize, k: Option<usize>) -> Result<MatchReport> {
    Ok(LabeledReduction::new(case, m, k)?.report)
}

/// A named configuration together with its aligned, labeled partition.
#[derive(Debug, Clone)]
pub struct LabeledReduction {
    graph: Graph,
    marked: MarkedConfiguration,
    partition: EquitablePartition,
    report: MatchReport,
}

impl LabeledReduction {
    pub fn new(case: CaseTag, m: usize, k: Option<usize>) -> Result<Self> {
        let marked = named_configuration(case, m, k)?;
        let graph = Graph::simplex(m)?;
        let partition = coarsest_equitable_partition(&graph, &marked)?;
        let appendix = appendix_matrix(case, m, k)?.without_empty_cells();
        let (perm, max_deviation) = align(&partition, &appendix, m, case)?;
        let report = MatchReport {
            case,
            m,
            k: marked.k(),
            dimension: partition.dimension(),
            labels: perm.iter().map(|&t| appendix.labels[t]).collect(),
            cell_sizes: partition.cell_sizes(),
            max_deviation,
            matched: max_deviation < MATCH_TOL,
        };
        Ok(Self {
            graph,
            marked,
            partition,
            report,
        })
    }

    pub fn case(&self) -> CaseTag {
        self.report.case
    }

    pub fn m(&self) -> usize {
        self.report.m
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn marked(&self) -> &MarkedConfiguration {
        &self.marked
    }

    pub fn partition(&self) -> &EquitablePartition {
        &self.partition
    }

    pub fn report(&self) -> &MatchReport {
        &self.report
    }

    pub fn labels(&self) -> &[&'static str] {
        &self.report.labels
    }

    pub fn cell(&self, label: &str) -> Option<usize> {
        self.report.labels.iter().position(|&l| l == label)
    }

    pub fn operator(&self, gamma: f64) -> Result<ReducedOperator> {
        reduced_hamiltonian(&self.partition, gamma)
    }

    /// Normalized equal-weight sum of the named cell vectors.
    pub fn model_vector(&self, labels: &[&str]) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(self.partition.dimension());
        for l in labels {
            let p = self
                .cell(l)
                .ok_or_else(|| Error::Parse(format!("no cell labeled `{l}` in {}", self.case())))?;
            v[p] = 1.0;
        }
        let norm = v.norm();
        Ok(v / norm)
    }
}
