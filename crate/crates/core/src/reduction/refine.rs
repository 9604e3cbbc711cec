//! Color refinement (1-dimensional Weisfeiler–Leman) from the
//! marked/unmarked coloring.
//!
//! Each round, a vertex's new color is the rank of its signature
//! `(old color, number of neighbors of each old color)` among all distinct
//! signatures, sorted. Ranks depend only on isomorphism-invariant data, so
//! isomorphic configurations receive identical colorings up to relabeling of
//! vertices. Refinement never merges classes and stops as soon as a round
//! leaves the number of colors unchanged.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::graph::{Graph, GraphFamily, MarkedConfiguration};

fn initial_coloring(graph: &Graph, marked: &MarkedConfiguration) -> Vec<usize> {
    let mut colors = vec![0; graph.n_vertices()];
    if marked.k() < graph.n_vertices() {
        for &v in marked.vertices() {
            colors[v] = 1;
        }
    }
    colors
}

fn count_colors(colors: &[usize]) -> usize {
    colors.iter().collect::<BTreeSet<_>>().len()
}

/// Renames signatures to their rank among the distinct ones.
fn rank_signatures(signatures: &[Vec<u32>]) -> BTreeMap<&Vec<u32>, usize> {
    let unique: BTreeSet<&Vec<u32>> = signatures.iter().collect();
    unique.into_iter().enumerate().map(|(rank, sig)| (sig, rank)).collect()
}

fn signature(own: usize, counts: &[u32]) -> Vec<u32> {
    let mut sig = Vec::with_capacity(counts.len() + 1);
    sig.push(own as u32);
    sig.extend_from_slice(counts);
    sig
}

/// Reference implementation that walks every neighbor list.
pub fn stable_coloring_by_neighbor_lists(graph: &Graph, marked: &MarkedConfiguration) -> Vec<usize> {
    let mut colors = initial_coloring(graph, marked);
    let mut n_colors = count_colors(&colors);
    loop {
        let sigs: Vec<Vec<u32>> = (0..graph.n_vertices())
            .map(|v| {
                let mut counts = vec![0u32; n_colors];
                for u in graph.neighbors(v) {
                    counts[colors[u]] += 1;
                }
                signature(colors[v], &counts)
            })
            .collect();
        let ranks = rank_signatures(&sigs);
        let next: Vec<usize> = sigs.iter().map(|s| ranks[s]).collect();
        let n_next = ranks.len();
        colors = next;
        if n_next == n_colors {
            return colors;
        }
        n_colors = n_next;
    }
}

/// Stable coloring using the family structure: a vertex's neighbor colors
/// are its clique's color histogram minus itself plus its partner. Touches
/// each vertex once per round instead of each edge.
pub fn stable_coloring(graph: &Graph, marked: &MarkedConfiguration) -> Vec<usize> {
    let mut colors = initial_coloring(graph, marked);
    let mut n_colors = count_colors(&colors);
    let n = graph.n_vertices();
    loop {
        let (signature_of, sigs) = match graph.family() {
            GraphFamily::Complete(_) => {
                let mut hist = vec![0u32; n_colors];
                for &c in &colors {
                    hist[c] += 1;
                }
                let sigs: Vec<Vec<u32>> = (0..n_colors)
                    .map(|c| {
                        let mut counts = hist.clone();
                        counts[c] = counts[c].saturating_sub(1);
                        signature(c, &counts)
                    })
                    .collect();
                let signature_of: Vec<usize> = colors.clone();
                (signature_of, sigs)
            }
            GraphFamily::Simplex(m) => {
                let mut hist_class = HashMap::new();
                let mut hists: Vec<Vec<u32>> = Vec::new();
                let clique_class: Vec<usize> = colors
                    .chunks(m)
                    .map(|clique| {
                        let mut hist = vec![0u32; n_colors];
                        for &c in clique {
                            hist[c] += 1;
                        }
                        *hist_class.entry(hist.clone()).or_insert_with(|| {
                            hists.push(hist);
                            hists.len() - 1
                        })
                    })
                    .collect();
                let mut key_index: HashMap<(usize, usize, usize), usize> = HashMap::new();
                let mut sigs: Vec<Vec<u32>> = Vec::new();
                let signature_of: Vec<usize> = (0..n)
                    .map(|v| {
                        let own = colors[v];
                        let partner = colors[graph.partner(v).expect("simplex vertex")];
                        let key = (own, clique_class[v / m], partner);
                        *key_index.entry(key).or_insert_with(|| {
                            let mut counts = hists[key.1].clone();
                            counts[own] -= 1;
                            counts[partner] += 1;
                            sigs.push(signature(own, &counts));
                            sigs.len() - 1
                        })
                    })
                    .collect();
                (signature_of, sigs)
            }
        };
        let ranks = rank_signatures(&sigs);
        let by_index: Vec<usize> = sigs.iter().map(|s| ranks[s]).collect();
        let n_next = ranks.len();
        colors = signature_of.into_iter().map(|i| by_index[i]).collect();
        if n_next == n_colors {
            return colors;
        }
        n_colors = n_next;
    }
}
