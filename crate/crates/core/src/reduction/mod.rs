//! Invariant subspaces from equitable partitions.
//!
//! Vertices that evolve identically under the search Hamiltonian are grouped
//! into the cells of the coarsest equitable partition refining the
//! marked/unmarked split. The uniform superpositions over the cells span an
//! invariant subspace that contains the initial state `|s⟩`, and the
//! Hamiltonian restricted to it is the quotient matrix built here.

mod appendix;
mod refine;

pub use appendix::{appendix_matrix, validate_against_appendix, AppendixMatrix, LabeledReduction, MatchReport};
pub use refine::{stable_coloring, stable_coloring_by_neighbor_lists};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, MarkedConfiguration};
use crate::hamiltonian::StateVector;

/// A partition of the vertex set into cells such that every vertex of cell
/// `P` has exactly `counts[P][Q]` neighbors in cell `Q`.
///
/// Cells are ordered marked first, then by size ascending, then by smallest
/// vertex id.
#[derive(Debug, Clone)]
pub struct EquitablePartition {
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    counts: Vec<Vec<usize>>,
    marked_cells: Vec<bool>,
    /// Isomorphism-invariant refinement color of each cell.
    colors: Vec<usize>,
}

/// Isomorphism-invariant description of an equitable partition: cells in
/// canonical color order with their marked flag, size and neighbor counts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PartitionSignature {
    pub cells: Vec<(bool, usize)>,
    pub counts: Vec<Vec<usize>>,
}

impl PartitionSignature {
    pub fn dimension(&self) -> usize {
        self.cells.len()
    }

    /// Cell sizes sorted ascending.
    pub fn size_multiset(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.cells.iter().map(|&(_, s)| s).collect();
        sizes.sort_unstable();
        sizes
    }
}

impl EquitablePartition {
    /// Builds a partition from explicit cells and verifies it is equitable
    /// and never mixes marked and unmarked vertices.
    pub fn from_cells(graph: &Graph, marked: &MarkedConfiguration, cells: Vec<Vec<usize>>) -> Result<Self> {
        marked.check_against(graph)?;
        let n = graph.n_vertices();
        let mut cell_of = vec![usize::MAX; n];
        for (p, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::NotEquitable(format!("cell {p} is empty")));
            }
            for &v in cell {
                if v >= n || cell_of[v] != usize::MAX {
                    return Err(Error::NotEquitable(format!("vertex {v} invalid or repeated")));
                }
                cell_of[v] = p;
            }
        }
        if let Some(v) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::NotEquitable(format!("vertex {v} is not covered")));
        }
        let colors = (0..cells.len()).collect();
        let partition = Self::assemble(graph, marked, cells, cell_of, colors);
        partition.check_equitable(graph, marked)?;
        Ok(partition)
    }

    fn assemble(
        graph: &Graph,
        marked: &MarkedConfiguration,
        mut cells: Vec<Vec<usize>>,
        cell_of: Vec<usize>,
        colors: Vec<usize>,
    ) -> Self {
        for cell in &mut cells {
            cell.sort_unstable();
        }
        let dim = cells.len();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by_key(|&p| (!marked.contains(cells[p][0]), cells[p].len(), cells[p][0]));
        let mut rank = vec![0; dim];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        let cells: Vec<Vec<usize>> = order.iter().map(|&p| std::mem::take(&mut cells[p])).collect();
        let colors: Vec<usize> = order.iter().map(|&p| colors[p]).collect();
        let cell_of: Vec<usize> = cell_of.into_iter().map(|p| rank[p]).collect();
        let counts = cells
            .iter()
            .map(|cell| {
                let mut row = vec![0; dim];
                for u in graph.neighbors(cell[0]) {
                    row[cell_of[u]] += 1;
                }
                row
            })
            .collect();
        let marked_cells = cells.iter().map(|cell| marked.contains(cell[0])).collect();
        Self {
            cells,
            cell_of,
            counts,
            marked_cells,
            colors,
        }
    }

    pub fn dimension(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.cell_of.len()
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_of(&self, v: usize) -> usize {
        self.cell_of[v]
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    pub fn marked_cells(&self) -> &[bool] {
        &self.marked_cells
    }

    /// Checks every vertex against every cell, plus the marked/unmarked
    /// split. Cost is `O(N · degree)`.
    pub fn check_equitable(&self, graph: &Graph, marked: &MarkedConfiguration) -> Result<()> {
        let dim = self.dimension();
        for (p, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                if marked.contains(v) != self.marked_cells[p] {
                    return Err(Error::NotEquitable(format!("cell {p} mixes marked and unmarked vertices")));
                }
                let mut row = vec![0; dim];
                for u in graph.neighbors(v) {
                    row[self.cell_of[u]] += 1;
                }
                if row != self.counts[p] {
                    return Err(Error::NotEquitable(format!(
                        "vertex {v} of cell {p} has neighbor counts {row:?}, expected {:?}",
                        self.counts[p]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `|P| b[P][Q] = |Q| b[Q][P]` for all cell pairs.
    pub fn check_edge_symmetry(&self) -> Result<()> {
        for p in 0..self.dimension() {
            for q in 0..self.dimension() {
                let lhs = self.cells[p].len() * self.counts[p][q];
                let rhs = self.cells[q].len() * self.counts[q][p];
                if lhs != rhs {
                    return Err(Error::NotEquitable(format!(
                        "edge count between cells {p} and {q} is asymmetric ({lhs} vs {rhs})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn signature(&self) -> PartitionSignature {
        let dim = self.dimension();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by_key(|&p| self.colors[p]);
        PartitionSignature {
            cells: order.iter().map(|&p| (self.marked_cells[p], self.cells[p].len())).collect(),
            counts: order
                .iter()
                .map(|&p| order.iter().map(|&q| self.counts[p][q]).collect())
                .collect(),
        }
    }
}

/// Coarsest equitable partition refining `{marked, unmarked}`, found by
/// color refinement.
pub fn coarsest_equitable_partition(graph: &Graph, marked: &MarkedConfiguration) -> Result<EquitablePartition> {
    marked.check_against(graph)?;
    let coloring = stable_coloring(graph, marked);
    Ok(partition_from_coloring(graph, marked, &coloring))
}

pub(crate) fn partition_from_coloring(graph: &Graph, marked: &MarkedConfiguration, coloring: &[usize]) -> EquitablePartition {
    let n_colors = coloring.iter().max().map_or(0, |&c| c + 1);
    let mut cells = vec![Vec::new(); n_colors];
    for (v, &c) in coloring.iter().enumerate() {
        cells[c].push(v);
    }
    EquitablePartition::assemble(graph, marked, cells, coloring.to_vec(), (0..n_colors).collect())
}

/// The search Hamiltonian restricted to the span of the normalized cell
/// vectors `|P⟩ = |P|^{-1/2} Σ_{v∈P} |v⟩`.
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    matrix: DMatrix<f64>,
    gamma: f64,
    cell_sizes: Vec<usize>,
    start_vector: DVector<f64>,
    marked_cells: Vec<bool>,
}

impl ReducedOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dimension(&self) -> usize {
        self.cell_sizes.len()
    }

    pub fn cell_sizes(&self) -> &[usize] {
        &self.cell_sizes
    }

    /// `|s⟩` in cell coordinates: `√(|P| / N)`.
    pub fn start_vector(&self) -> &DVector<f64> {
        &self.start_vector
    }

    pub fn start_state(&self) -> StateVector {
        StateVector::from_raw(self.start_vector.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn marked_cells(&self) -> &[bool] {
        &self.marked_cells
    }

    /// Probability on marked vertices for a state in cell coordinates.
    pub fn success_probability(&self, psi: &StateVector) -> f64 {
        psi.amplitudes()
            .iter()
            .zip(&self.marked_cells)
            .filter(|(_, &m)| m)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }
}

/// Quotient Hamiltonian: `H[P][Q] = -γ b[P][Q] √(|P|/|Q|)` off the diagonal
/// and `-γ b[P][P] - [P marked]` on it.
pub fn reduced_hamiltonian(partition: &EquitablePartition, gamma: f64) -> Result<ReducedOperator> {
    partition.check_edge_symmetry()?;
    let dim = partition.dimension();
    let sizes = partition.cell_sizes();
    let n: usize = sizes.iter().sum();
    let mut matrix = DMatrix::zeros(dim, dim);
    for p in 0..dim {
        // symmetrized: b[P][Q]√(|P|/|Q|) = √(b[P][Q] b[Q][P]) exactly for equitable partitions
        for q in p..dim {
            let weight = ((partition.counts[p][q] * partition.counts[q][p]) as f64).sqrt();
            let value = -gamma * weight;
            matrix[(p, q)] = value;
            matrix[(q, p)] = value;
        }
        if partition.marked_cells[p] {
            matrix[(p, p)] -= 1.0;
        }
    }
    let start_vector = DVector::from_iterator(dim, sizes.iter().map(|&s| (s as f64 / n as f64).sqrt()));
    Ok(ReducedOperator {
        matrix,
        gamma,
        cell_sizes: sizes,
        start_vector,
        marked_cells: partition.marked_cells.clone(),
    })
}

/// Cell amplitudes `c_P = ⟨P|ψ⟩`.
pub fn project_state(psi: &StateVector, partition: &EquitablePartition) -> Result<DVector<Complex64>> {
    if psi.len() != partition.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: partition.n_vertices(),
            actual: psi.len(),
        });
    }
    let amps = psi.amplitudes();
    Ok(DVector::from_iterator(
        partition.dimension(),
        partition.cells.iter().map(|cell| {
            let sum: Complex64 = cell.iter().map(|&v| amps[v]).sum();
            sum / (cell.len() as f64).sqrt()
        }),
    ))
}

/// `Σ_P c_P |P⟩`, which is uniform on every cell.
pub fn lift_state(reduced: &DVector<Complex64>, partition: &EquitablePartition) -> Result<StateVector> {
    if reduced.len() != partition.dimension() {
        return Err(Error::DimensionMismatch {
            expected: partition.dimension(),
            actual: reduced.len(),
        });
    }
    let mut out = DVector::zeros(partition.n_vertices());
    for (cell, &c) in partition.cells.iter().zip(reduced.iter()) {
        let amp = c / (cell.len() as f64).sqrt();
        for &v in cell {
            out[v] = amp;
        }
    }
    Ok(StateVector::from_raw(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{named_configuration, CaseTag};
    use crate::hamiltonian::{build_hamiltonian, uniform_state};

    #[test]
    fn complete_graph_has_two_cells() {
        for (n, k) in [(6, 2), (10, 1), (16, 5)] {
            let g = Graph::complete(n).unwrap();
            let marked = MarkedConfiguration::new(&g, (0..k).collect(), CaseTag::Custom).unwrap();
            let p = coarsest_equitable_partition(&g, &marked).unwrap();
            assert_eq!(p.cell_sizes(), vec![k, n - k]);
            assert_eq!(p.marked_cells(), &[true, false]);
        }
    }

    #[test]
    fn complete_graph_two_by_two() {
        let (n, k, gamma) = (1024usize, 4usize, 1.0 / 1024.0);
        let g = Graph::complete(n).unwrap();
        let marked = MarkedConfiguration::new(&g, vec![3, 100, 500, 1023], CaseTag::Custom).unwrap();
        let p = coarsest_equitable_partition(&g, &marked).unwrap();
        let op = reduced_hamiltonian(&p, gamma).unwrap();
        let off = -gamma * ((k * (n - k)) as f64).sqrt();
        assert!((op.matrix()[(0, 0)] - (-gamma * (k as f64 - 1.0) - 1.0)).abs() < 1e-15);
        assert!((op.matrix()[(0, 0)] - -1.0029296875).abs() < 1e-15);
        assert!((op.matrix()[(1, 1)] - -0.9951171875).abs() < 1e-15);
        assert!((op.matrix()[(0, 1)] - off).abs() < 1e-15);
        assert!((op.matrix()[(0, 1)] - -0.062377_5).abs() < 1e-6);
    }

    #[test]
    fn two_b_cells() {
        let g = Graph::simplex(5).unwrap();
        let marked = named_configuration(CaseTag::TwoB, 5, None).unwrap();
        let p = coarsest_equitable_partition(&g, &marked).unwrap();
        assert_eq!(p.cell_sizes(), vec![2, 8, 8, 12]);
        let two_e = named_configuration(CaseTag::TwoE, 5, None).unwrap();
        assert_eq!(coarsest_equitable_partition(&g, &two_e).unwrap().dimension(), 13);
    }

    #[test]
    fn refinement_paths_agree() {
        for m in 5..=9 {
            let g = Graph::simplex(m).unwrap();
            for case in CaseTag::NAMED {
                let marked = named_configuration(case, m, None).unwrap();
                assert_eq!(
                    stable_coloring(&g, &marked),
                    stable_coloring_by_neighbor_lists(&g, &marked),
                    "{case} M={m}"
                );
            }
        }
        let g = Graph::complete(12).unwrap();
        let marked = MarkedConfiguration::new(&g, vec![2, 7, 9], CaseTag::Custom).unwrap();
        assert_eq!(stable_coloring(&g, &marked), stable_coloring_by_neighbor_lists(&g, &marked));
    }

    #[test]
    fn non_equitable_cells_rejected() {
        let g = Graph::simplex(5).unwrap();
        let marked = named_configuration(CaseTag::TwoB, 5, None).unwrap();
        let (m, u): (Vec<usize>, Vec<usize>) = (0..30).partition(|&v| marked.contains(v));
        assert!(matches!(
            EquitablePartition::from_cells(&g, &marked, vec![m, u]),
            Err(Error::NotEquitable(_))
        ));
        let mixed = vec![(0..15).collect(), (15..30).collect()];
        assert!(EquitablePartition::from_cells(&g, &marked, mixed).is_err());
    }

    #[test]
    fn from_cells_accepts_the_refined_partition() {
        let g = Graph::simplex(6).unwrap();
        let marked = named_configuration(CaseTag::TwoC, 6, None).unwrap();
        let p = coarsest_equitable_partition(&g, &marked).unwrap();
        let q = EquitablePartition::from_cells(&g, &marked, p.cells().to_vec()).unwrap();
        assert_eq!(q.counts(), p.counts());
        let op = reduced_hamiltonian(&q, 0.2).unwrap();
        assert_eq!(op.dimension(), 8);
    }

    #[test]
    fn project_lift() {
        let g = Graph::simplex(6).unwrap();
        let marked = named_configuration(CaseTag::TwoD, 6, None).unwrap();
        let p = coarsest_equitable_partition(&g, &marked).unwrap();
        let op = reduced_hamiltonian(&p, 1.0 / 6.0).unwrap();
        let s = uniform_state(g.n_vertices()).unwrap();
        let c = project_state(&s, &p).unwrap();
        for (a, b) in c.iter().zip(op.start_vector().iter()) {
            assert!((a.re - b).abs() < 1e-14 && a.im.abs() < 1e-14);
        }
        assert!((op.start_vector().norm_squared() - 1.0).abs() < 1e-14);

        let mut one_hot = DVector::zeros(p.dimension());
        one_hot[0] = Complex64::new(1.0, 0.0);
        let lifted = lift_state(&one_hot, &p).unwrap();
        let amp = 1.0 / (marked.k() as f64).sqrt();
        for v in 0..g.n_vertices() {
            let expected = if marked.contains(v) { amp } else { 0.0 };
            assert!((lifted.amplitudes()[v].re - expected).abs() < 1e-15);
        }

        let reduced = DVector::from_fn(p.dimension(), |i, _| Complex64::new(i as f64 - 3.0, 0.5 * i as f64));
        let back = project_state(&lift_state(&reduced, &p).unwrap(), &p).unwrap();
        assert!((back - &reduced).norm() < 1e-12);

        assert!(matches!(
            lift_state(&DVector::zeros(3), &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cell_vectors_span_an_invariant_subspace() {
        // H |P⟩ must stay in the span: lift(reduced H c) == H_full lift(c)
        let m = 6;
        let g = Graph::simplex(m).unwrap();
        for case in CaseTag::NAMED {
            let marked = named_configuration(case, m, None).unwrap();
            let p = coarsest_equitable_partition(&g, &marked).unwrap();
            let gamma = 0.37;
            let op = reduced_hamiltonian(&p, gamma).unwrap();
            let h = build_hamiltonian(&g, &marked, gamma).unwrap();
            let c = DVector::from_fn(p.dimension(), |i, _| Complex64::new((i as f64).sin(), (i as f64).cos()));
            let lhs = lift_state(&(op.matrix().map(|x| Complex64::new(x, 0.0)) * &c), &p).unwrap();
            let full = h.entries().map(|x| Complex64::new(x, 0.0)) * lift_state(&c, &p).unwrap().amplitudes();
            assert!((lhs.amplitudes() - full).norm() < 1e-12, "{case}");
        }
    }

    #[test]
    fn largest_start_component_is_the_bulk_cell() {
        // white g (two-a..d, clique-plus-1), violet m (two-e), blue b (rings)
        let m = 9;
        let g = Graph::simplex(m).unwrap();
        for case in CaseTag::NAMED {
            let marked = named_configuration(case, m, None).unwrap();
            let p = coarsest_equitable_partition(&g, &marked).unwrap();
            let op = reduced_hamiltonian(&p, 0.1).unwrap();
            let labeled = LabeledReduction::new(case, m, None).unwrap();
            let expected = match case {
                CaseTag::TwoE => "m",
                CaseTag::Ring1 | CaseTag::Ring2 | CaseTag::Ring2Shift => "b",
                _ => "g",
            };
            assert_eq!(labeled.labels()[op.start_vector().imax()], expected, "{case}");
        }
    }
}
