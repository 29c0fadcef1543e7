//! Event logs and empirical measures extracted from them.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::lfode::{ConfigSpace, NeighborhoodConfig, Slots};
use crate::models::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub vertex: usize,
    pub jump: i32,
}

/// A realized trajectory: initial per-vertex states plus the ordered
/// sequence of accepted jumps up to `t_end`.
#[derive(Debug, Clone)]
pub struct EventLog {
    pub init: Vec<i32>,
    pub events: Vec<Event>,
    pub t_end: f64,
}

impl EventLog {
    /// States at time `t` (right-continuous: events at exactly `t` are
    /// applied).
    pub fn states_at(&self, t: f64) -> Vec<i32> {
        let mut states = self.init.clone();
        for e in &self.events {
            if e.time > t {
                break;
            }
            states[e.vertex] += e.jump;
        }
        states
    }

    pub fn jump_count(&self, vertex: usize) -> usize {
        self.events.iter().filter(|e| e.vertex == vertex).count()
    }

    /// CSV with header `time,vertex,jump`, one accepted event per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,vertex,jump\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{},{}", e.time, e.vertex, e.jump);
        }
        out
    }

    pub fn parse_csv(text: &str, init: Vec<i32>, t_end: f64) -> Result<EventLog> {
        let mut lines = text.lines();
        match lines.next() {
            Some("time,vertex,jump") => {}
            _ => return Err(Error::Config("event log is missing its header".into())),
        }
        let mut events = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let bad = || Error::Config(format!("malformed event on line {}", lineno + 2));
            let time: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let vertex: usize = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let jump: i32 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            if parts.next().is_some() {
                return Err(bad());
            }
            events.push(Event { time, vertex, jump });
        }
        if events.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(Error::Config("event log times are not sorted".into()));
        }
        Ok(EventLog { init, events, t_end })
    }
}

/// Fraction of vertices in each state (indexed like `model.states()`).
pub fn empirical_measure(states: &[i32], model: &ModelSpec) -> Vec<f64> {
    let mut mu = vec![0.0; model.m()];
    for &s in states {
        if let Some(i) = model.state_index(s) {
            mu[i] += 1.0;
        }
    }
    let n = states.len().max(1) as f64;
    for v in mu.iter_mut() {
        *v /= n;
    }
    mu
}

/// Empirical law of the rooted neighborhood, in the canonical-class
/// basis of `space` (representative values: class share divided by the
/// class multiplicity). Vertices whose degree is outside the support of
/// the space are skipped and excluded from the normalization.
pub fn neighborhood_empirical_measure(
    graph: &Graph,
    states: &[i32],
    model: &ModelSpec,
    space: &ConfigSpace,
) -> Vec<f64> {
    let mut counts = vec![0.0; space.len()];
    let mut total = 0.0;
    for v in 0..graph.n() {
        let Some(root) = model.state_index(states[v]) else {
            continue;
        };
        let slots: Option<Slots> = graph
            .neighbors(v)
            .iter()
            .map(|&u| model.state_index(states[u]).map(|i| i as u8))
            .collect();
        let Some(slots) = slots else { continue };
        let cfg = NeighborhoodConfig::new(root as u8, slots);
        if let Some(class) = space.index_of(&cfg) {
            counts[class] += 1.0;
            total += 1.0;
        }
    }
    if total > 0.0 {
        for (i, c) in counts.iter_mut().enumerate() {
            *c /= total * space.multiplicity(i);
        }
    }
    counts
}
