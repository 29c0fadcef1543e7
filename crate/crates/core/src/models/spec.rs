use std::sync::Arc;

use crate::error::{Error, Result};

/// A vertex observation: an actual state, or ⋆ for an absent particle
/// (an unused neighbor slot).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    State(i32),
    Star,
}

impl Mark {
    pub fn state(self) -> Option<i32> {
        match self {
            Mark::State(a) => Some(a),
            Mark::Star => None,
        }
    }
}

/// `(jump, t, own state, neighbor marks) -> rate`. Must be invariant
/// under permutations of the neighbor slice; ⋆ entries contribute as
/// absent particles.
pub type RateFn = Arc<dyn Fn(i32, f64, i32, &[Mark]) -> f64 + Send + Sync>;

/// `(d, t) -> envelope`, nondecreasing in both arguments, dominating
/// every rate of a vertex with fewer than `d` neighbors.
pub type RateBoundFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// Complete-graph (n → ∞) intensity as a function of the population
/// composition: `(jump, t, own state, μ over state indices) -> rate`.
/// Only some models admit one; it backs the classical mean-field
/// baseline in which the graph is replaced by the complete graph.
pub type CompleteRateFn = Arc<dyn Fn(i32, f64, i32, &[f64]) -> f64 + Send + Sync>;

/// An interacting-particle-system model: finite state space, jump set,
/// rate functions, declared transition edges, and a rate envelope.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    states: Vec<i32>,
    labels: Vec<String>,
    jumps: Vec<i32>,
    declared_edges: Vec<(i32, i32)>,
    rate: RateFn,
    rate_bound: RateBoundFn,
    complete_rate: Option<CompleteRateFn>,
}

impl std::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("states", &self.states)
            .field("jumps", &self.jumps)
            .field("declared_edges", &self.declared_edges)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        states: Vec<i32>,
        labels: Vec<String>,
        jumps: Vec<i32>,
        declared_edges: Vec<(i32, i32)>,
        rate: RateFn,
        rate_bound: RateBoundFn,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Model("state space is empty".into()));
        }
        let mut sorted = states.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != states.len() {
            return Err(Error::Model("duplicate state codes".into()));
        }
        if labels.len() != states.len() {
            return Err(Error::Model("one label per state required".into()));
        }
        if jumps.iter().any(|&j| j == 0) {
            return Err(Error::Model("jump 0 is not permissible".into()));
        }
        for &(a, b) in &declared_edges {
            if !states.contains(&a) || !states.contains(&b) {
                return Err(Error::Model(format!(
                    "declared edge ({a},{b}) leaves the state space"
                )));
            }
            if !jumps.contains(&(b - a)) {
                return Err(Error::Model(format!(
                    "declared edge ({a},{b}) has no matching jump"
                )));
            }
        }
        Ok(ModelSpec {
            name: name.into(),
            states,
            labels,
            jumps,
            declared_edges,
            rate,
            rate_bound,
            complete_rate: None,
        })
    }

    pub fn with_complete_rate(mut self, f: CompleteRateFn) -> Self {
        self.complete_rate = Some(f);
        self
    }

    pub fn states(&self) -> &[i32] {
        &self.states
    }

    pub fn m(&self) -> usize {
        self.states.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn jumps(&self) -> &[i32] {
        &self.jumps
    }

    pub fn declared_edges(&self) -> &[(i32, i32)] {
        &self.declared_edges
    }

    pub fn state_index(&self, code: i32) -> Option<usize> {
        self.states.iter().position(|&s| s == code)
    }

    pub fn label_of(&self, code: i32) -> &str {
        match self.state_index(code) {
            Some(i) => &self.labels[i],
            None => "?",
        }
    }

    pub fn code_of_label(&self, label: &str) -> Option<i32> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.states[i])
    }

    /// Jump-`j` rate of a particle in state `a` with the given neighbor
    /// marks. A ⋆ particle never jumps.
    pub fn rate(&self, j: i32, t: f64, a: Mark, neighbors: &[Mark]) -> f64 {
        match a {
            Mark::Star => 0.0,
            Mark::State(a) => (self.rate)(j, t, a, neighbors),
        }
    }

    /// Envelope: bounds every rate of a particle whose closed
    /// neighborhood has at most `d` vertices (i.e. degree `d - 1`).
    pub fn rate_bound(&self, d: usize, t: f64) -> f64 {
        (self.rate_bound)(d, t)
    }

    /// Sum of all jump rates at `(t, a, neighbors)`.
    pub fn total_rate(&self, t: f64, a: Mark, neighbors: &[Mark]) -> f64 {
        self.jumps.iter().map(|&j| self.rate(j, t, a, neighbors)).sum()
    }

    pub fn complete_rate(&self, j: i32, t: f64, a: i32, mu: &[f64]) -> Option<f64> {
        self.complete_rate.as_ref().map(|f| f(j, t, a, mu))
    }

    pub fn has_complete_rate(&self) -> bool {
        self.complete_rate.is_some()
    }
}
