use ctqw_search::graph::{named_configuration, CaseTag, Graph, MarkedConfiguration, SimplexCoordinate};
use ctqw_search::hamiltonian::{build_hamiltonian, uniform_state, Propagator, StateVector};
use ctqw_search::reduction::{
    coarsest_equitable_partition, lift_state, project_state, reduced_hamiltonian, stable_coloring,
    stable_coloring_by_neighbor_lists,
};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

const CASES: [CaseTag; 9] = [
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

fn simplex_marked(m: usize, picks: &[usize]) -> (Graph, MarkedConfiguration) {
    let graph = Graph::simplex(m).unwrap();
    let n = graph.n_vertices();
    let vertices: Vec<usize> = picks.iter().map(|p| p % n).collect();
    let marked = MarkedConfiguration::new(&graph, vertices, CaseTag::Custom).unwrap();
    (graph, marked)
}

/// Partitions from two colorings are the same iff the color maps are a bijection.
fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut fwd = std::collections::HashMap::new();
    let mut bwd = std::collections::HashMap::new();
    a.iter().zip(b).all(|(x, y)| *fwd.entry(x).or_insert(y) == y && *bwd.entry(y).or_insert(x) == x)
}

fn random_state(re: &[f64], im: &[f64]) -> StateVector {
    let v = DVector::from_iterator(re.len(), re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)));
    let norm = v.norm();
    StateVector::new(v / Complex64::new(norm, 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evolution_conserves_norm(m in 3usize..8, picks in prop::collection::vec(0usize..10_000, 1..5),
                                gamma in 0.0f64..2.0, t in 0.0f64..500.0) {
        let (graph, marked) = simplex_marked(m, &picks);
        let h = build_hamiltonian(&graph, &marked, gamma).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let psi = uniform_state(graph.n_vertices()).unwrap();
        let phi = prop.evolve(&psi, t).unwrap();
        prop_assert!((phi.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn semigroup_and_time_reversal(n in 2usize..60, k in 1usize..4, gamma in 0.0f64..1.0,
                                   s in 0.0f64..50.0, t in 0.0f64..50.0,
                                   seed in prop::collection::vec(-1.0f64..1.0, 120)) {
        let graph = Graph::complete(n).unwrap();
        let marked = MarkedConfiguration::new(&graph, (0..k.min(n)).collect(), CaseTag::Custom).unwrap();
        let prop = Propagator::new(&build_hamiltonian(&graph, &marked, gamma).unwrap()).unwrap();
        let psi = random_state(&seed[..n], &seed[60..60 + n]);
        let two = prop.evolve(&prop.evolve(&psi, s).unwrap(), t).unwrap();
        let one = prop.evolve(&psi, s + t).unwrap();
        prop_assert!((two.amplitudes() - one.amplitudes()).camax() < 1e-9);
        let back = prop.evolve(&prop.evolve(&psi, t).unwrap(), -t).unwrap();
        prop_assert!((back.amplitudes() - psi.amplitudes()).camax() < 1e-9);
    }

    #[test]
    fn refinement_paths_agree_and_are_equitable(m in 3usize..9, picks in prop::collection::vec(0usize..10_000, 1..6)) {
        let (graph, marked) = simplex_marked(m, &picks);
        let fast = stable_coloring(&graph, &marked);
        let generic = stable_coloring_by_neighbor_lists(&graph, &marked);
        prop_assert!(same_partition(&fast, &generic));
        let partition = coarsest_equitable_partition(&graph, &marked).unwrap();
        prop_assert!(partition.check_equitable(&graph, &marked).is_ok());
        prop_assert!(partition.check_edge_symmetry().is_ok());
    }

    #[test]
    fn project_lift_round_trip(case_index in 0usize..9, m in 5usize..9, gamma in 0.0f64..1.5, t in 0.0f64..200.0) {
        let case = CASES[case_index];
        let graph = Graph::simplex(m).unwrap();
        let marked = named_configuration(case, m, None).unwrap();
        let partition = coarsest_equitable_partition(&graph, &marked).unwrap();
        let prop = Propagator::new(&build_hamiltonian(&graph, &marked, gamma).unwrap()).unwrap();
        let phi = prop.evolve(&uniform_state(graph.n_vertices()).unwrap(), t).unwrap();
        // the uniform state stays in the invariant subspace
        let lifted = lift_state(&project_state(&phi, &partition).unwrap(), &partition).unwrap();
        prop_assert!((lifted.amplitudes() - phi.amplitudes()).camax() < 1e-9);
        let op = reduced_hamiltonian(&partition, gamma).unwrap();
        let reduced = Propagator::from_matrix(op.matrix(), usize::MAX).unwrap().evolve(&op.start_state(), t).unwrap();
        let from_full = project_state(&phi, &partition).unwrap();
        prop_assert!((reduced.amplitudes() - from_full).camax() < 1e-9);
    }

    #[test]
    fn coordinate_lists_parse(m in 2usize..30, pairs in prop::collection::vec((0usize..31, 0usize..30), 1..6)) {
        let graph = Graph::simplex(m).unwrap();
        let coords: Vec<(usize, usize)> = pairs
            .iter()
            .map(|&(i, j)| {
                let i = i % (m + 1);
                let mut j = j % (m + 1);
                if j == i {
                    j = (j + 1) % (m + 1);
                }
                (i, j)
            })
            .collect();
        let spec = coords.iter().map(|(i, j)| format!("{i}:{j}")).collect::<Vec<_>>().join(",");
        let marked = graph.configuration(&spec, None).unwrap();
        let prefixed = graph.configuration(&format!("custom:{spec}"), None).unwrap();
        prop_assert_eq!(marked.vertices(), prefixed.vertices());
        for &(i, j) in &coords {
            let v = SimplexCoordinate::new(i, j, m).unwrap().index(m);
            prop_assert!(marked.contains(v));
            prop_assert_eq!(graph.partner(v), Some(SimplexCoordinate::new(j, i, m).unwrap().index(m)));
        }
    }

    #[test]
    fn self_loops_in_lists_are_rejected(m in 2usize..20, i in 0usize..21) {
        let graph = Graph::simplex(m).unwrap();
        let i = i % (m + 1);
        let spec = format!("{i}:{i}");
        prop_assert!(graph.configuration(&spec, None).is_err());
    }
}
