use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graphs::{DegreeDistribution, Graph};
use crate::rng::SimRng;

pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmMode {
    /// Repeat uniform half-edge matchings until the multigraph is simple;
    /// the result is uniform over simple graphs with the given degrees.
    Reject,
    /// Single matching; self-loops deleted and multi-edges collapsed
    /// (degrees may drop).
    Erase,
}

/// Erdős–Gallai test: true iff `seq` is the degree sequence of some
/// simple graph.
pub fn validate_graphical(seq: &[usize]) -> bool {
    if seq.is_empty() {
        return false;
    }
    let n = seq.len();
    if seq.iter().any(|&d| d >= n) {
        return false;
    }
    let sum: usize = seq.iter().sum();
    if sum % 2 != 0 {
        return false;
    }
    let mut d = seq.to_vec();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let mut prefix = 0usize;
    for k in 1..=n {
        prefix += d[k - 1];
        let mut tail = 0usize;
        for &di in &d[k..] {
            tail += di.min(k);
        }
        if prefix > k * (k - 1) + tail {
            return false;
        }
    }
    true
}

/// Samples a configuration-model graph with the given degree sequence.
pub fn sample_configuration_model(
    degrees: &[usize],
    rng: &mut SimRng,
    mode: CmMode,
    rejection_cap: u64,
) -> Result<Graph> {
    let sum: usize = degrees.iter().sum();
    if sum % 2 != 0 {
        return Err(Error::Graph("degree sum must be even".into()));
    }
    if mode == CmMode::Reject && !validate_graphical(degrees) {
        return Err(Error::NotGraphical);
    }
    let n = degrees.len();
    let mut stubs = Vec::with_capacity(sum);
    for (v, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat(v).take(d));
    }
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        if attempts > rejection_cap {
            return Err(Error::RejectionCap(rejection_cap));
        }
        stubs.shuffle(rng);
        let pairs: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        match mode {
            CmMode::Reject => {
                if let Some(g) = build_if_simple(n, &pairs) {
                    return Ok(g);
                }
            }
            CmMode::Erase => {
                let mut edges: Vec<(usize, usize)> = pairs
                    .into_iter()
                    .filter(|&(u, v)| u != v)
                    .map(|(u, v)| (u.min(v), u.max(v)))
                    .collect();
                edges.sort_unstable();
                edges.dedup();
                return Graph::from_edges(n, &edges);
            }
        }
    }
}

fn build_if_simple(n: usize, pairs: &[(usize, usize)]) -> Option<Graph> {
    let mut edges = Vec::with_capacity(pairs.len());
    for &(u, v) in pairs {
        if u == v {
            return None;
        }
        edges.push((u.min(v), u.max(v)));
    }
    edges.sort_unstable();
    if edges.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Graph::from_edges(n, &edges).ok()
}

/// Draws `n` i.i.d. degrees from `theta`; if the total is odd the last
/// vertex's degree is resampled until the total is even.
pub fn sample_degrees(theta: &DegreeDistribution, n: usize, rng: &mut SimRng) -> Vec<usize> {
    let mut degrees: Vec<usize> = (0..n).map(|_| theta.sample(rng)).collect();
    let mut sum: usize = degrees.iter().sum();
    while sum % 2 != 0 {
        sum -= degrees[n - 1];
        degrees[n - 1] = theta.sample(rng);
        sum += degrees[n - 1];
    }
    degrees
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn graphical_basics() {
        assert!(validate_graphical(&[1, 1]));
        assert!(!validate_graphical(&[3, 1]));
        assert!(!validate_graphical(&[]));
        assert!(validate_graphical(&[0]));
        assert!(validate_graphical(&[2, 2, 2]));
        assert!(!validate_graphical(&[3, 3, 3])); // d >= n
    }

    #[test]
    fn single_edge_forced() {
        let mut rng = stream(0, 0);
        let g = sample_configuration_model(&[1, 1], &mut rng, CmMode::Reject, 100).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn triangle_forced() {
        // The triangle is the unique simple 2-regular graph on 3 vertices.
        let mut rng = stream(1, 0);
        let g = sample_configuration_model(&[2, 2, 2], &mut rng, CmMode::Reject, 1000).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn reject_mode_preserves_degrees() {
        let mut rng = stream(2, 0);
        let degrees = vec![3usize; 50];
        let g = sample_configuration_model(&degrees, &mut rng, CmMode::Reject, 10_000).unwrap();
        assert_eq!(g.degree_sequence(), degrees);
    }

    #[test]
    fn reject_mode_refuses_non_graphical() {
        let mut rng = stream(3, 0);
        assert!(matches!(
            sample_configuration_model(&[3, 1], &mut rng, CmMode::Reject, 100),
            Err(Error::Graph(_)) | Err(Error::NotGraphical)
        ));
    }

    #[test]
    fn erase_mode_never_exceeds_degrees() {
        let mut rng = stream(4, 0);
        let degrees = vec![3usize; 20];
        let g = sample_configuration_model(&degrees, &mut rng, CmMode::Erase, 1).unwrap();
        for v in 0..20 {
            assert!(g.degree(v) <= 3);
        }
    }

    #[test]
    fn identical_seeds_identical_graphs() {
        let degrees = vec![3usize; 30];
        let a =
            sample_configuration_model(&degrees, &mut stream(9, 5), CmMode::Reject, 10_000).unwrap();
        let b =
            sample_configuration_model(&degrees, &mut stream(9, 5), CmMode::Reject, 10_000).unwrap();
        assert_eq!(a.to_edge_list(), b.to_edge_list());
    }

    #[test]
    fn degree_sampling_parity() {
        let theta = DegreeDistribution::new([(2, 0.5), (3, 0.5)]).unwrap();
        let mut rng = stream(5, 0);
        for _ in 0..20 {
            let d = sample_degrees(&theta, 11, &mut rng);
            assert_eq!(d.iter().sum::<usize>() % 2, 0);
        }
    }
}
