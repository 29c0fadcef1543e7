use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graphs::DegreeDistribution;

/// Finite undirected simple graph; adjacency lists are sorted and
/// symmetric, with no self-loops or duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::Graph(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (v, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Graph(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(Graph { n, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in &self.adjacency[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// `θ̄_G(k) = |{v : d_v = k}| / n`.
    pub fn empirical_degree_distribution(&self) -> Result<DegreeDistribution> {
        if self.n == 0 {
            return Err(Error::Graph("empty graph has no degree distribution".into()));
        }
        let mut counts = std::collections::BTreeMap::new();
        for v in 0..self.n {
            *counts.entry(self.degree(v)).or_insert(0usize) += 1;
        }
        DegreeDistribution::new(
            counts
                .into_iter()
                .map(|(k, c)| (k, c as f64 / self.n as f64)),
        )
    }

    /// Edge-list text format: first line `n m`, then one `u v` line per
    /// edge with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n, edges.len());
        for (u, v) in edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Graph("empty edge-list document".into()))?;
        let mut it = header.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize> {
            s.ok_or_else(|| Error::Graph("short header".into()))?
                .parse()
                .map_err(|e| Error::Graph(format!("bad header: {e}")))
        };
        let n = parse(it.next())?;
        let m = parse(it.next())?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let mut it = line.split_whitespace();
            let u = parse(it.next())?;
            let v = parse(it.next())?;
            if u >= v {
                return Err(Error::Graph(format!("edge line must have u < v, got {u} {v}")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Graph(format!(
                "header declares {m} edges, found {}",
                edges.len()
            )));
        }
        Graph::from_edges(n, &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn empirical_degrees() {
        let g = triangle();
        let d = g.empirical_degree_distribution().unwrap();
        assert_eq!(d, DegreeDistribution::delta(2));

        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let d = star.empirical_degree_distribution().unwrap();
        assert!((d.prob(3) - 0.25).abs() < 1e-15);
        assert!((d.prob(1) - 0.75).abs() < 1e-15);

        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(
            edge.empirical_degree_distribution().unwrap(),
            DegreeDistribution::delta(1)
        );
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert!(Graph::from_edges(2, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 1), (0, 1)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = triangle();
        let text = g.to_edge_list();
        assert_eq!(text.lines().next().unwrap(), "3 3");
        let back = Graph::from_edge_list(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn edge_list_rejects_unordered() {
        assert!(Graph::from_edge_list("2 1\n1 0\n").is_err());
    }
}
