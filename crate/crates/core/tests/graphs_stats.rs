//! Statistical and combinatorial checks of the graph samplers.

use std::collections::BTreeMap;

use netdyn::graphs::{
    sample_configuration_model, sample_degrees, sample_ugw, validate_graphical, CmMode,
    DegreeDistribution, Graph, DEFAULT_REJECTION_CAP,
};
use netdyn::rng::stream;
use netdyn::Error;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Exhaustive ground truth for 4-vertex degree sequences: a sequence is
/// graphical iff some subset of the 6 possible edges realizes it.
fn graphical_exhaustive_4(seq: &[usize; 4]) -> bool {
    let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    for mask in 0u32..64 {
        let mut deg = [0usize; 4];
        for (b, &(u, v)) in edges.iter().enumerate() {
            if mask & (1 << b) != 0 {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        if &deg == seq {
            return true;
        }
    }
    false
}

#[test]
fn erdos_gallai_matches_exhaustive_enumeration_on_four_vertices() {
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let seq = [a, b, c, d];
                    assert_eq!(
                        validate_graphical(&seq),
                        graphical_exhaustive_4(&seq),
                        "disagreement on {seq:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn nongraphical_sequence_is_rejected() {
    assert!(!validate_graphical(&[3, 3, 1, 1]));
    let mut rng = stream(1, 0);
    let err = sample_configuration_model(&[3, 3, 1, 1], &mut rng, CmMode::Reject, 1000);
    assert!(matches!(err, Err(Error::NotGraphical)));
}

#[test]
fn reject_mode_yields_simple_graphs_with_the_exact_degrees() {
    let degrees = [3, 2, 2, 2, 1, 2];
    let mut rng = stream(2, 0);
    for _ in 0..50 {
        let g = sample_configuration_model(&degrees, &mut rng, CmMode::Reject, DEFAULT_REJECTION_CAP)
            .unwrap();
        assert_eq!(g.degree_sequence(), degrees);
        for v in 0..g.n() {
            let nb = g.neighbors(v);
            assert!(!nb.contains(&v), "self-loop at {v}");
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "multi-edge at {v}");
        }
    }
}

#[test]
fn erase_mode_never_exceeds_the_degrees() {
    let degrees = [4, 4, 4, 2, 2];
    let mut rng = stream(3, 0);
    for _ in 0..50 {
        let g = sample_configuration_model(&degrees, &mut rng, CmMode::Erase, DEFAULT_REJECTION_CAP)
            .unwrap();
        for v in 0..g.n() {
            assert!(g.degree(v) <= degrees[v]);
            assert!(!g.neighbors(v).contains(&v));
        }
    }
}

fn chi_square_gof(observed: &BTreeMap<usize, usize>, expected: &[(usize, f64)], total: f64) -> f64 {
    let mut stat = 0.0;
    let mut dof = 0usize;
    for &(k, p) in expected {
        let e = total * p;
        assert!(e >= 5.0, "cell {k} too small for the chi-square approximation");
        let o = *observed.get(&k).unwrap_or(&0) as f64;
        stat += (o - e) * (o - e) / e;
        dof += 1;
    }
    let chi = ChiSquared::new((dof - 1) as f64).unwrap();
    1.0 - chi.cdf(stat)
}

#[test]
fn ugw_root_and_offspring_distributions_pass_goodness_of_fit() {
    let theta = DegreeDistribution::new([(1, 0.3), (2, 0.5), (3, 0.2)]).unwrap();
    let theta_hat = theta.size_biased().unwrap();
    let mut rng = stream(4, 0);
    let samples = 10_000usize;

    let mut root_counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut child_counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut n_children = 0usize;
    for _ in 0..samples {
        let t = sample_ugw(&theta, 2, &mut rng).unwrap();
        *root_counts.entry(t.root_degree()).or_default() += 1;
        for &c in t.children(0) {
            *child_counts.entry(t.children(c).len()).or_default() += 1;
            n_children += 1;
        }
    }

    let root_expected: Vec<(usize, f64)> = theta.iter().collect();
    let p_root = chi_square_gof(&root_counts, &root_expected, samples as f64);
    assert!(p_root > 0.001, "root degree GOF failed: p = {p_root}");

    let child_expected: Vec<(usize, f64)> = theta_hat.iter().collect();
    let p_child = chi_square_gof(&child_counts, &child_expected, n_children as f64);
    assert!(p_child > 0.001, "offspring GOF failed: p = {p_child}");
}

#[test]
fn sampled_degree_sequences_are_even_and_distributed_like_theta() {
    let theta = DegreeDistribution::new([(2, 0.6), (3, 0.4)]).unwrap();
    let mut rng = stream(5, 0);
    for _ in 0..100 {
        let degrees = sample_degrees(&theta, 51, &mut rng);
        assert_eq!(degrees.len(), 51);
        assert_eq!(degrees.iter().sum::<usize>() % 2, 0);
        assert!(degrees.iter().all(|&d| d == 2 || d == 3));
    }
}

proptest! {
    #[test]
    fn edge_list_round_trip(edge_bits in proptest::collection::vec(any::<bool>(), 28)) {
        // Graphs on 8 vertices with an arbitrary subset of the 28 pairs.
        let mut edges = Vec::new();
        let mut idx = 0;
        for u in 0..8usize {
            for v in (u + 1)..8usize {
                if edge_bits[idx] {
                    edges.push((u, v));
                }
                idx += 1;
            }
        }
        let g = Graph::from_edges(8, &edges).unwrap();
        let text = g.to_edge_list();
        let back = Graph::from_edge_list(&text).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.n(), 8);
    }

    #[test]
    fn size_biased_is_a_probability_distribution(
        raw in proptest::collection::btree_map(1usize..10, 0.05f64..1.0, 1..6)
    ) {
        let total: f64 = raw.values().sum();
        let theta = DegreeDistribution::new(
            raw.iter().map(|(&k, &w)| (k, w / total))
        ).unwrap();
        let hat = theta.size_biased().unwrap();
        let mass: f64 = hat.iter().map(|(_, p)| p).sum();
        prop_assert!((mass - 1.0).abs() < 1e-9);
        // Support shifts down by one: θ̂(k) > 0 iff θ(k+1) > 0.
        for (k, p) in hat.iter() {
            prop_assert!(p >= 0.0);
            prop_assert!(theta.prob(k + 1) > 0.0);
        }
    }
}
