use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{Mark, ModelSpec};
use crate::rng::SimRng;

pub const DEFAULT_PROBE_COUNT: usize = 10_000;

/// Directed graph on the state space with an edge `(a, a + j)` for each
/// declared transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionGraph {
    pub nodes: Vec<i32>,
    pub edges: Vec<(i32, i32)>,
}

/// Extracts the declared transition graph after a randomized probe:
/// `count` random `(t, a, neighbors)` draws must not reveal a positive
/// rate outside the declared edge set, nor one above the envelope.
pub fn transition_graph(
    model: &ModelSpec,
    count: usize,
    max_degree: usize,
    horizon: f64,
    rng: &mut SimRng,
) -> Result<TransitionGraph> {
    let states = model.states();
    let mut neighbors = Vec::with_capacity(max_degree);
    for _ in 0..count {
        let t: f64 = rng.random::<f64>() * horizon;
        let a = states[rng.random_range(0..states.len())];
        let d = rng.random_range(0..=max_degree);
        neighbors.clear();
        for _ in 0..d {
            // ⋆ shows up in probes too: absent particles must be handled.
            if rng.random::<f64>() < 0.15 {
                neighbors.push(Mark::Star);
            } else {
                neighbors.push(Mark::State(states[rng.random_range(0..states.len())]));
            }
        }
        let mut total = 0.0;
        for &j in model.jumps() {
            let r = model.rate(j, t, Mark::State(a), &neighbors);
            if r < 0.0 {
                return Err(Error::Model(format!(
                    "negative rate {r} for jump {j} at t={t}, state {a}, neighbors {neighbors:?}"
                )));
            }
            if r > 0.0 && !model.declared_edges().contains(&(a, a + j)) {
                return Err(Error::Model(format!(
                    "positive rate {r} for undeclared transition ({a} -> {}) \
                     at t={t}, jump {j}, neighbors {neighbors:?}",
                    a + j
                )));
            }
            total += r;
        }
        let bound = model.rate_bound(d + 1, t);
        if total > bound * (1.0 + 1e-9) {
            return Err(Error::RateBound(format!(
                "total rate {total} exceeds bound {bound} at t={t}, state {a}, degree {d}"
            )));
        }
    }
    Ok(TransitionGraph {
        nodes: states.to_vec(),
        edges: model.declared_edges().to_vec(),
    })
}

/// Topological order of the states, or a cycle witness.
pub fn check_acyclic(tg: &TransitionGraph) -> Result<Vec<i32>> {
    let n = tg.nodes.len();
    let idx = |s: i32| tg.nodes.iter().position(|&x| x == s).unwrap();
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in &tg.edges {
        succ[idx(a)].push(idx(b));
        indeg[idx(b)] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop() {
        order.push(tg.nodes[i]);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                queue.push(j);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Extract a cycle among the unresolved states.
    let remaining: Vec<usize> = (0..n).filter(|&i| indeg[i] > 0).collect();
    let start = remaining[0];
    let mut path = vec![start];
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut cur = start;
    loop {
        let next = succ[cur]
            .iter()
            .copied()
            .find(|&j| indeg[j] > 0)
            .expect("unresolved state must have an unresolved successor");
        if seen[next] {
            let pos = path.iter().position(|&v| v == next).unwrap();
            let cycle: Vec<i32> = path[pos..].iter().map(|&v| tg.nodes[v]).collect();
            return Err(Error::Cycle(cycle));
        }
        seen[next] = true;
        path.push(next);
        cur = next;
    }
}

/// All states reachable from `a` (excluding `a` unless on a cycle).
pub fn reachable(tg: &TransitionGraph, a: i32) -> Vec<i32> {
    let mut out = Vec::new();
    let mut stack = vec![a];
    while let Some(s) = stack.pop() {
        for &(u, v) in &tg.edges {
            if u == s && !out.contains(&v) {
                out.push(v);
                stack.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nodes: &[i32], edges: &[(i32, i32)]) -> TransitionGraph {
        TransitionGraph {
            nodes: nodes.to_vec(),
            edges: edges.to_vec(),
        }
    }

    #[test]
    fn sir_order() {
        let tg = graph(&[0, 1, 2], &[(0, 1), (1, 2)]);
        assert_eq!(check_acyclic(&tg).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn sis_cycle_witness() {
        let tg = graph(&[0, 1], &[(0, 1), (1, 0)]);
        match check_acyclic(&tg) {
            Err(Error::Cycle(c)) => {
                assert_eq!(c.len(), 2);
                assert!(c.contains(&0) && c.contains(&1));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn monotone_chain() {
        let tg = graph(&[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(check_acyclic(&tg).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn topological_order_consistent() {
        let tg = graph(&[0, 1, -1], &[(0, 1), (0, -1)]);
        let order = check_acyclic(&tg).unwrap();
        for &(a, b) in &tg.edges {
            let pa = order.iter().position(|&x| x == a).unwrap();
            let pb = order.iter().position(|&x| x == b).unwrap();
            assert!(pa < pb);
        }
    }
}
