use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{Graph, GraphFamily, SimplexCoordinate};
use crate::error::{Error, Result};

/// Named marked-vertex configurations on the simplex of complete graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseTag {
    /// Both marked vertices in one clique.
    TwoA,
    /// The two endpoints of one inter-clique edge.
    TwoB,
    /// Two cliques whose marked vertices both point to a common third clique.
    TwoC,
    /// Two cliques, marked vertices pointing to two distinct other cliques.
    TwoD,
    /// Exactly one marked vertex on the edge joining the two marked cliques.
    TwoE,
    /// One marked vertex per clique, arranged in a ring.
    Ring1,
    /// One clique fully marked plus a single vertex elsewhere.
    CliquePlus1,
    /// Two marked vertices per clique, pointing to both ring neighbors.
    Ring2,
    /// Two marked vertices per clique, shifted along the ring.
    Ring2Shift,
    /// `k` marked vertices in a single clique.
    KInClique,
    Custom,
}

impl CaseTag {
    /// The nine configurations with closed-form predictions.
    pub const NAMED: [CaseTag; 9] = [
        CaseTag::TwoA,
        CaseTag::TwoB,
        CaseTag::TwoC,
        CaseTag::TwoD,
        CaseTag::TwoE,
        CaseTag::Ring1,
        CaseTag::CliquePlus1,
        CaseTag::Ring2,
        CaseTag::Ring2Shift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::TwoA => "two-a",
            CaseTag::TwoB => "two-b",
            CaseTag::TwoC => "two-c",
            CaseTag::TwoD => "two-d",
            CaseTag::TwoE => "two-e",
            CaseTag::Ring1 => "ring-1",
            CaseTag::CliquePlus1 => "clique-plus-1",
            CaseTag::Ring2 => "ring-2",
            CaseTag::Ring2Shift => "ring-2-shift",
            CaseTag::KInClique => "k-in-clique",
            CaseTag::Custom => "custom",
        }
    }

    pub fn is_two_marked(self) -> bool {
        matches!(
            self,
            CaseTag::TwoA | CaseTag::TwoB | CaseTag::TwoC | CaseTag::TwoD | CaseTag::TwoE
        )
    }

    /// Two-stage algorithms: all two-marked cases plus `k` in one clique.
    pub fn is_two_stage(self) -> bool {
        self.is_two_marked() || self == CaseTag::KInClique
    }

    /// Number of marked vertices for a named case.
    pub fn marked_count(self, m: usize, k: Option<usize>) -> Option<usize> {
        match self {
            CaseTag::TwoA | CaseTag::TwoB | CaseTag::TwoC | CaseTag::TwoD | CaseTag::TwoE => {
                Some(2)
            }
            CaseTag::Ring1 | CaseTag::CliquePlus1 => Some(m + 1),
            CaseTag::Ring2 | CaseTag::Ring2Shift => Some(2 * (m + 1)),
            CaseTag::KInClique => k,
            CaseTag::Custom => None,
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tag = match s {
            "two-a" => CaseTag::TwoA,
            "two-b" => CaseTag::TwoB,
            "two-c" => CaseTag::TwoC,
            "two-d" => CaseTag::TwoD,
            "two-e" => CaseTag::TwoE,
            "ring-1" => CaseTag::Ring1,
            "clique-plus-1" => CaseTag::CliquePlus1,
            "ring-2" => CaseTag::Ring2,
            "ring-2-shift" => CaseTag::Ring2Shift,
            "k-in-clique" => CaseTag::KInClique,
            "custom" => CaseTag::Custom,
            other => return Err(Error::UnknownCase(other.to_string())),
        };
        Ok(tag)
    }
}

impl Serialize for CaseTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// A nonempty set of marked vertices, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MarkedConfiguration {
    vertices: Vec<usize>,
    case_tag: CaseTag,
}

impl MarkedConfiguration {
    pub fn new(graph: &Graph, mut vertices: Vec<usize>, case_tag: CaseTag) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.is_empty() {
            return Err(Error::InvalidMarked("marked set is empty".into()));
        }
        if let Some(&bad) = vertices.iter().find(|&&v| v >= graph.n_vertices()) {
            return Err(Error::InvalidMarked(format!(
                "vertex {bad} out of range for a graph with {} vertices",
                graph.n_vertices()
            )));
        }
        Ok(Self { vertices, case_tag })
    }

    pub fn from_coordinates(
        graph: &Graph,
        coords: &[SimplexCoordinate],
        case_tag: CaseTag,
    ) -> Result<Self> {
        let vertices = coords
            .iter()
            .map(|&c| {
                graph.vertex(c).ok_or_else(|| {
                    Error::InvalidMarked(format!("{c} is not a vertex of {:?}", graph.family()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(graph, vertices, case_tag)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn case_tag(&self) -> CaseTag {
        self.case_tag
    }

    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.vertices {
            mask[v] = true;
        }
        mask
    }

    /// Checks that the configuration fits `graph`.
    pub fn check_against(&self, graph: &Graph) -> Result<()> {
        match self.vertices.last() {
            Some(&v) if v >= graph.n_vertices() => Err(Error::InvalidMarked(format!(
                "vertex {v} out of range for a graph with {} vertices",
                graph.n_vertices()
            ))),
            _ => Ok(()),
        }
    }
}

fn coords(pairs: impl IntoIterator<Item = (usize, usize)>, m: usize) -> Result<Vec<SimplexCoordinate>> {
    pairs
        .into_iter()
        .map(|(i, j)| SimplexCoordinate::new(i, j, m))
        .collect()
}

/// Builds one of the named configurations on `simplex(M)`.
///
/// `k` is only used by [`CaseTag::KInClique`], where `1 <= k < M`.
pub fn named_configuration(case: CaseTag, m: usize, k: Option<usize>) -> Result<MarkedConfiguration> {
    if case == CaseTag::Custom {
        return Err(Error::UnknownCase("custom is not a named configuration".into()));
    }
    if m < 5 {
        return Err(Error::InvalidSize(format!(
            "named configurations need M >= 5, got {m}"
        )));
    }
    let graph = Graph::simplex(m)?;
    let ring = m + 1;
    let pairs: Vec<(usize, usize)> = match case {
        CaseTag::TwoA => vec![(0, 1), (0, 2)],
        CaseTag::TwoB => vec![(0, 1), (1, 0)],
        CaseTag::TwoC => vec![(0, 2), (1, 2)],
        CaseTag::TwoD => vec![(0, 2), (1, 3)],
        CaseTag::TwoE => vec![(0, 1), (1, 2)],
        CaseTag::Ring1 => (0..ring).map(|i| (i, (i + 1) % ring)).collect(),
        CaseTag::CliquePlus1 => (1..=m).map(|j| (0, j)).chain([(1, 0)]).collect(),
        CaseTag::Ring2 => (0..ring)
            .flat_map(|i| [(i, (i + 1) % ring), (i, (i + ring - 1) % ring)])
            .collect(),
        CaseTag::Ring2Shift => (0..ring)
            .flat_map(|i| [(i, (i + 1) % ring), (i, (i + 2) % ring)])
            .collect(),
        CaseTag::KInClique => {
            let k = k.ok_or_else(|| Error::InvalidMarked("k-in-clique needs k".into()))?;
            if k == 0 || k >= m {
                return Err(Error::InvalidMarked(format!(
                    "k-in-clique needs 1 <= k < M, got k = {k}, M = {m}"
                )));
            }
            (1..=k).map(|j| (0, j)).collect()
        }
        CaseTag::Custom => unreachable!(),
    };
    MarkedConfiguration::from_coordinates(&graph, &coords(pairs, m)?, case)
}

/// Parses a comma-separated list of `i:j` simplex coordinates.
pub fn parse_coordinate_list(s: &str, m: usize) -> Result<Vec<SimplexCoordinate>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (i, j) = t
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected i:j, got `{t}`")))?;
            let i = i.trim().parse().map_err(|_| Error::Parse(format!("bad clique in `{t}`")))?;
            let j = j.trim().parse().map_err(|_| Error::Parse(format!("bad target in `{t}`")))?;
            SimplexCoordinate::new(i, j, m)
        })
        .collect()
}

/// Parses a comma-separated list of flat vertex ids.
pub fn parse_vertex_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad vertex id `{t}`"))))
        .collect()
}

impl Graph {
    /// Marked configuration from CLI-style input: a named case, or for
    /// `custom` a coordinate list (simplex) or vertex list (complete).
    pub fn configuration(&self, spec: &str, k: Option<usize>) -> Result<MarkedConfiguration> {
        if let Ok(tag) = spec.parse::<CaseTag>() {
            if tag != CaseTag::Custom {
                let m = self.simplex_m().ok_or_else(|| {
                    Error::InvalidMarked(format!("{tag} is defined on the simplex family only"))
                })?;
                return named_configuration(tag, m, k);
            }
        }
        let list = spec.strip_prefix("custom:").unwrap_or(spec);
        match self.family() {
            GraphFamily::Simplex(m) => {
                MarkedConfiguration::from_coordinates(self, &parse_coordinate_list(list, m)?, CaseTag::Custom)
            }
            GraphFamily::Complete(_) => MarkedConfiguration::new(self, parse_vertex_list(list)?, CaseTag::Custom),
        }
    }
}
