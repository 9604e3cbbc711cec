//! Enumeration of all two-vertex marked sets on the simplex of complete
//! graphs, grouped by the canonical signature of their coarsest equitable
//! partition.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{named_configuration, CaseTag, Graph, MarkedConfiguration};
use crate::error::{Error, Result};
use crate::reduction::{coarsest_equitable_partition, PartitionSignature};

#[derive(Debug, Clone, Serialize)]
pub struct PairClass {
    pub signature: PartitionSignature,
    /// Lexicographically smallest pair in the class.
    pub representative: MarkedConfiguration,
    pub size: usize,
    /// Named two-marked case with the same signature, if any.
    pub case: Option<CaseTag>,
}

impl PairClass {
    pub fn dimension(&self) -> usize {
        self.signature.dimension()
    }
}

/// Groups every unordered pair of marked vertices of the simplex with
/// parameter `m`. Classes are sorted by representative.
pub fn classify_pairs(m: usize) -> Result<Vec<PairClass>> {
    if m < 5 {
        return Err(Error::InvalidSize(format!("classification needs M >= 5, got {m}")));
    }
    let graph = Graph::simplex(m)?;
    let n = graph.n_vertices();
    let signatures: Vec<((usize, usize), PartitionSignature)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|u| (u + 1..n).map(move |v| (u, v)))
        .map(|(u, v)| {
            let marked = MarkedConfiguration::new(&graph, vec![u, v], CaseTag::Custom)?;
            Ok(((u, v), coarsest_equitable_partition(&graph, &marked)?.signature()))
        })
        .collect::<Result<_>>()?;

    let mut groups: BTreeMap<PartitionSignature, ((usize, usize), usize)> = BTreeMap::new();
    for (pair, sig) in signatures {
        let entry = groups.entry(sig).or_insert((pair, 0));
        entry.0 = entry.0.min(pair);
        entry.1 += 1;
    }

    let mut named = Vec::new();
    for case in CaseTag::NAMED.into_iter().filter(|c| c.is_two_marked()) {
        let marked = named_configuration(case, m, None)?;
        named.push((coarsest_equitable_partition(&graph, &marked)?.signature(), case));
    }

    let mut classes = groups
        .into_iter()
        .map(|(signature, ((u, v), size))| {
            let case = named.iter().find(|(s, _)| *s == signature).map(|&(_, c)| c);
            let representative = MarkedConfiguration::new(&graph, vec![u, v], case.unwrap_or(CaseTag::Custom))?;
            Ok(PairClass {
                signature,
                representative,
                size,
                case,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    classes.sort_by(|a, b| a.representative.vertices().cmp(b.representative.vertices()));
    Ok(classes)
}
