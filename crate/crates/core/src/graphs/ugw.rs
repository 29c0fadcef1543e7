use crate::error::Result;
use crate::graphs::{DegreeDistribution, Graph};
use crate::rng::SimRng;

/// Rooted tree with Ulam–Harris labels: the root is the empty sequence,
/// the children of `v` are `v1..vk` with contiguous indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    labels: Vec<Vec<u32>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth_cutoff: usize,
}

impl RootedTree {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> &[u32] {
        &self.labels[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.labels[v].len()
    }

    pub fn depth_cutoff(&self) -> usize {
        self.depth_cutoff
    }

    pub fn root_degree(&self) -> usize {
        self.children[0].len()
    }

    /// Underlying undirected graph (vertex 0 is the root).
    pub fn to_graph(&self) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = (1..self.len())
            .map(|v| (self.parent[v].unwrap(), v))
            .collect();
        Graph::from_edges(self.len(), &edges)
    }
}

/// Samples a UGW(θ) tree truncated at `depth`: the root's offspring
/// count is drawn from `theta`, every deeper vertex's offspring count
/// from the size-biased law `size_biased(theta)`.
pub fn sample_ugw(theta: &DegreeDistribution, depth: usize, rng: &mut SimRng) -> Result<RootedTree> {
    let offspring = theta.size_biased();
    let mut tree = RootedTree {
        labels: vec![Vec::new()],
        parent: vec![None],
        children: vec![Vec::new()],
        depth_cutoff: depth,
    };
    let mut frontier = vec![0usize];
    for level in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let count = if level == 0 {
                theta.sample(rng)
            } else {
                // Non-root vertices exist only if theta has positive mean.
                offspring.as_ref().expect("non-root vertex under zero-mean theta").sample(rng)
            };
            for i in 1..=count {
                let mut label = tree.labels[v].clone();
                label.push(i as u32);
                let idx = tree.labels.len();
                tree.labels.push(label);
                tree.parent.push(Some(v));
                tree.children.push(Vec::new());
                tree.children[v].push(idx);
                next.push(idx);
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn delta2_depth2_shape() {
        // size_biased(δ_2) = δ_1: root has two children, each child one.
        let t = sample_ugw(&DegreeDistribution::delta(2), 2, &mut stream(0, 0)).unwrap();
        assert_eq!(t.root_degree(), 2);
        assert_eq!(t.len(), 5);
        for &c in t.children(0) {
            assert_eq!(t.children(c).len(), 1);
        }
        assert_eq!(t.label(1), &[1]);
        assert_eq!(t.label(2), &[2]);
    }

    #[test]
    fn delta0_isolated_root() {
        let t = sample_ugw(&DegreeDistribution::delta(0), 3, &mut stream(0, 0)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.root_degree(), 0);
    }

    #[test]
    fn delta1_is_single_edge() {
        // size_biased(δ_1) = δ_0: the tree is the path ∅–1 regardless of depth.
        let t = sample_ugw(&DegreeDistribution::delta(1), 5, &mut stream(0, 0)).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.label(1), &[1]);
        assert_eq!(t.children(1).len(), 0);
    }

    #[test]
    fn labels_prefix_closed() {
        let theta = DegreeDistribution::new([(1, 0.3), (2, 0.4), (3, 0.3)]).unwrap();
        let t = sample_ugw(&theta, 4, &mut stream(7, 0)).unwrap();
        for v in 1..t.len() {
            let label = t.label(v).to_vec();
            let parent = t.parent(v).unwrap();
            assert_eq!(&label[..label.len() - 1], t.label(parent));
            assert!(t.depth(v) <= t.depth_cutoff());
        }
        // children indices contiguous from 1
        for v in 0..t.len() {
            for (i, &c) in t.children(v).iter().enumerate() {
                assert_eq!(*t.label(c).last().unwrap() as usize, i + 1);
            }
        }
    }

    #[test]
    fn to_graph_is_tree() {
        let theta = DegreeDistribution::new([(2, 0.5), (3, 0.5)]).unwrap();
        let t = sample_ugw(&theta, 3, &mut stream(3, 0)).unwrap();
        let g = t.to_graph().unwrap();
        assert_eq!(g.edge_count(), t.len() - 1);
        assert_eq!(g.degree(0), t.root_degree());
    }
}
