//! Graph families used for search: the complete graph `K_N` and the simplex
//! of complete graphs.
//!
//! The simplex of complete graphs with parameter `M` is the `M`-simplex with
//! each of its `M + 1` corners replaced by a copy of `K_M`. A vertex is
//! addressed by a [`SimplexCoordinate`] `(i, j)`: it lives in clique `i` and
//! its single inter-clique edge goes to vertex `(j, i)` of clique `j`.
//!
//! Adjacency is implicit in the family, so no neighbor lists are stored;
//! they are generated on demand and always come out sorted.

mod classify;
mod marked;

pub use classify::{classify_pairs, PairClass};
pub use marked::{named_configuration, parse_coordinate_list, parse_vertex_list, CaseTag, MarkedConfiguration};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "family", content = "size", rename_all = "lowercase")]
pub enum GraphFamily {
    /// `K_N`.
    Complete(usize),
    /// Simplex of `M + 1` copies of `K_M`.
    Simplex(usize),
}

/// A vertex of the simplex of complete graphs: `clique` is the copy of `K_M`
/// the vertex lives in, `target` the clique its inter-clique edge points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SimplexCoordinate {
    pub clique: usize,
    pub target: usize,
}

impl SimplexCoordinate {
    pub fn new(clique: usize, target: usize, m: usize) -> Result<Self> {
        if clique > m || target > m || clique == target {
            return Err(Error::InvalidMarked(format!(
                "({clique}, {target}) is not a simplex coordinate for M = {m}"
            )));
        }
        Ok(Self { clique, target })
    }

    /// Flat vertex id: `clique * M + rank(target)`, where `rank` is the
    /// position of `target` in the sorted list `{0..=M} \ {clique}`.
    pub fn index(self, m: usize) -> usize {
        let rank = if self.target < self.clique {
            self.target
        } else {
            self.target - 1
        };
        self.clique * m + rank
    }

    pub fn from_index(v: usize, m: usize) -> Self {
        let clique = v / m;
        let rank = v % m;
        let target = if rank < clique { rank } else { rank + 1 };
        Self { clique, target }
    }

    /// The other endpoint of this vertex's inter-clique edge.
    pub fn partner(self) -> Self {
        Self {
            clique: self.target,
            target: self.clique,
        }
    }
}

impl std::fmt::Display for SimplexCoordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.clique, self.target)
    }
}

/// A regular graph from one of the two supported families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    family: GraphFamily,
    n_vertices: usize,
}

impl Graph {
    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!(
                "complete graph needs N >= 2, got {n}"
            )));
        }
        Ok(Self {
            family: GraphFamily::Complete(n),
            n_vertices: n,
        })
    }

    pub fn simplex(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidSize(format!(
                "simplex of complete graphs needs M >= 2, got {m}"
            )));
        }
        Ok(Self {
            family: GraphFamily::Simplex(m),
            n_vertices: m * (m + 1),
        })
    }

    pub fn family(&self) -> GraphFamily {
        self.family
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Common degree of every vertex.
    pub fn degree(&self) -> usize {
        match self.family {
            GraphFamily::Complete(n) => n - 1,
            GraphFamily::Simplex(m) => m,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.n_vertices * self.degree() / 2
    }

    /// `M` for the simplex family.
    pub fn simplex_m(&self) -> Option<usize> {
        match self.family {
            GraphFamily::Simplex(m) => Some(m),
            GraphFamily::Complete(_) => None,
        }
    }

    pub fn coordinate(&self, v: usize) -> Option<SimplexCoordinate> {
        let m = self.simplex_m()?;
        (v < self.n_vertices).then(|| SimplexCoordinate::from_index(v, m))
    }

    pub fn vertex(&self, coord: SimplexCoordinate) -> Option<usize> {
        let m = self.simplex_m()?;
        SimplexCoordinate::new(coord.clique, coord.target, m)
            .ok()
            .map(|c| c.index(m))
    }

    /// Inter-clique neighbor of `v` in the simplex family.
    pub fn partner(&self, v: usize) -> Option<usize> {
        let m = self.simplex_m()?;
        Some(SimplexCoordinate::from_index(v, m).partner().index(m))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v || u >= self.n_vertices || v >= self.n_vertices {
            return false;
        }
        match self.family {
            GraphFamily::Complete(_) => true,
            GraphFamily::Simplex(m) => u / m == v / m || self.partner(u) == Some(v),
        }
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        assert!(v < self.n_vertices, "vertex {v} out of range");
        match self.family {
            GraphFamily::Complete(n) => (0..n).filter(|&u| u != v).collect(),
            GraphFamily::Simplex(m) => {
                let start = (v / m) * m;
                let partner = SimplexCoordinate::from_index(v, m).partner().index(m);
                let mut out: Vec<usize> = (start..start + m).filter(|&u| u != v).collect();
                let pos = out.partition_point(|&u| u < partner);
                out.insert(pos, partner);
                out
            }
        }
    }

    pub fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n_vertices).map(|v| self.neighbors(v)).collect()
    }
}

pub fn build_complete(n: usize) -> Result<Graph> {
    Graph::complete(n)
}

pub fn build_simplex(m: usize) -> Result<Graph> {
    Graph::simplex(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_regular_symmetric(g: &Graph) {
        let lists = g.neighbor_lists();
        let mut degree_sum = 0;
        for (v, nb) in lists.iter().enumerate() {
            assert_eq!(nb.len(), g.degree());
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "unsorted at {v}");
            assert!(!nb.contains(&v));
            for &u in nb {
                assert!(lists[u].binary_search(&v).is_ok(), "{u}~{v} not symmetric");
                assert!(g.has_edge(u, v));
            }
            degree_sum += nb.len();
        }
        assert_eq!(degree_sum, 2 * g.edge_count());
    }

    #[test]
    fn complete_sizes() {
        let g = build_complete(2).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), vec![1]);
        let g = build_complete(6).unwrap();
        assert_eq!(g.edge_count(), 15);
        assert_eq!(g.degree(), 5);
        check_regular_symmetric(&g);
        let g = build_complete(1024).unwrap();
        assert_eq!(g.n_vertices(), 1024);
        assert_eq!(g.degree(), 1023);
    }

    #[test]
    fn too_small() {
        assert!(matches!(build_complete(1), Err(Error::InvalidSize(_))));
        assert!(matches!(build_simplex(1), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn simplex_two_is_a_hexagon() {
        let g = build_simplex(2).unwrap();
        assert_eq!(g.n_vertices(), 6);
        assert_eq!(g.edge_count(), 6);
        check_regular_symmetric(&g);
        // connected 2-regular graph on 6 vertices is the 6-cycle
        let mut seen = [false; 6];
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend(g.neighbors(v));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn simplex_five() {
        let g = build_simplex(5).unwrap();
        assert_eq!(g.n_vertices(), 30);
        assert_eq!(g.edge_count(), 75);
        check_regular_symmetric(&g);
    }

    #[test]
    fn one_edge_between_each_clique_pair() {
        for m in 2..=9 {
            let g = build_simplex(m).unwrap();
            let mut crossing = vec![vec![0usize; m + 1]; m + 1];
            for v in 0..g.n_vertices() {
                for u in g.neighbors(v) {
                    if u / m != v / m {
                        crossing[v / m][u / m] += 1;
                    }
                }
            }
            for i in 0..=m {
                for j in 0..=m {
                    // each edge is seen from both sides
                    let expected = if i == j { 0 } else { 1 };
                    assert_eq!(crossing[i][j], expected, "cliques {i},{j} at M={m}");
                }
            }
        }
    }

    #[test]
    fn coordinate_bijection_and_partner_involution() {
        for m in 2..=12 {
            let g = build_simplex(m).unwrap();
            let mut hit = vec![false; g.n_vertices()];
            for i in 0..=m {
                for j in (0..=m).filter(|&j| j != i) {
                    let c = SimplexCoordinate::new(i, j, m).unwrap();
                    let v = c.index(m);
                    assert!(!hit[v]);
                    hit[v] = true;
                    assert_eq!(SimplexCoordinate::from_index(v, m), c);
                    assert_eq!(v / m, i);
                }
            }
            assert!(hit.iter().all(|&h| h));
            for v in 0..g.n_vertices() {
                let p = g.partner(v).unwrap();
                assert_ne!(p, v);
                assert_eq!(g.partner(p), Some(v));
            }
        }
    }

    #[test]
    fn invalid_coordinates() {
        assert!(SimplexCoordinate::new(2, 2, 5).is_err());
        assert!(SimplexCoordinate::new(6, 0, 5).is_err());
        let g = build_complete(5).unwrap();
        assert_eq!(g.coordinate(0), None);
        assert_eq!(g.partner(0), None);
    }
}
