//! Forward Kolmogorov (master) equation on the full joint state space.
//!
//! Exact up to integrator tolerance, and exponential in the number of
//! vertices — the reference against which the Monte Carlo simulator is
//! validated on small graphs.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::integrate::{self, OdeOptions};
use crate::models::{Mark, ModelSpec};

const STATE_CAP: usize = 1_000_000;

pub struct MasterEquation<'a> {
    model: &'a ModelSpec,
    graph: &'a Graph,
    m: usize,
    n_states: usize,
}

impl<'a> MasterEquation<'a> {
    pub fn new(model: &'a ModelSpec, graph: &'a Graph) -> Result<Self> {
        let m = model.m();
        let mut n_states = 1usize;
        for _ in 0..graph.n() {
            n_states = n_states
                .checked_mul(m)
                .filter(|&s| s <= STATE_CAP)
                .ok_or(Error::StateSpaceCap(graph.n(), STATE_CAP))?;
        }
        Ok(MasterEquation {
            model,
            graph,
            m,
            n_states,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    fn decode(&self, mut z: usize, out: &mut [usize]) {
        for s in out.iter_mut() {
            *s = z % self.m;
            z /= self.m;
        }
    }

    /// Product initial law from a per-vertex marginal `q`.
    pub fn product_law(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.m {
            return Err(Error::Config("initial marginal has the wrong length".into()));
        }
        let n = self.graph.n();
        let mut decoded = vec![0usize; n];
        let mut law = vec![0.0; self.n_states];
        for (z, p) in law.iter_mut().enumerate() {
            self.decode(z, &mut decoded);
            *p = decoded.iter().map(|&s| q[s]).product();
        }
        Ok(law)
    }

    /// Point mass on a given joint state.
    pub fn point_law(&self, init: &[i32]) -> Result<Vec<f64>> {
        if init.len() != self.graph.n() {
            return Err(Error::Config("initial condition has the wrong length".into()));
        }
        let mut z = 0usize;
        for &s in init.iter().rev() {
            let i = self
                .model
                .state_index(s)
                .ok_or_else(|| Error::Model(format!("state {s} is not in the state space")))?;
            z = z * self.m + i;
        }
        let mut law = vec![0.0; self.n_states];
        law[z] = 1.0;
        Ok(law)
    }

    pub fn rhs(&self, t: f64, p: &[f64], out: &mut [f64]) {
        let n = self.graph.n();
        let states = self.model.states();
        let mut decoded = vec![0usize; n];
        let mut marks: SmallVec<[Mark; 8]> = SmallVec::new();
        out.fill(0.0);
        let mut stride = vec![1usize; n];
        for v in 1..n {
            stride[v] = stride[v - 1] * self.m;
        }
        for z in 0..self.n_states {
            if p[z] == 0.0 {
                continue;
            }
            self.decode(z, &mut decoded);
            for v in 0..n {
                marks.clear();
                marks.extend(
                    self.graph
                        .neighbors(v)
                        .iter()
                        .map(|&u| Mark::State(states[decoded[u]])),
                );
                let a = states[decoded[v]];
                for &j in self.model.jumps() {
                    let Some(up) = self.model.state_index(a + j) else {
                        continue;
                    };
                    let r = self.model.rate(j, t, Mark::State(a), &marks);
                    if r == 0.0 {
                        continue;
                    }
                    let flux = p[z] * r;
                    out[z] -= flux;
                    let target =
                        (z as i64 + (up as i64 - decoded[v] as i64) * stride[v] as i64) as usize;
                    out[target] += flux;
                }
            }
        }
    }

    pub fn solve(
        &self,
        p0: &[f64],
        grid: &[f64],
        opts: &OdeOptions,
    ) -> Result<Vec<(f64, Vec<f64>)>> {
        if p0.len() != self.n_states {
            return Err(Error::Config("initial joint law has the wrong length".into()));
        }
        integrate::solve(
            |t, p, out| self.rhs(t, p, out),
            p0,
            grid.first().copied().unwrap_or(0.0),
            grid,
            opts,
            |p| {
                let mut mass = 0.0;
                for v in p.iter_mut() {
                    if *v < 0.0 && *v >= -1e-10 {
                        *v = 0.0;
                    }
                    mass += *v;
                }
                if mass > 0.0 {
                    for v in p.iter_mut() {
                        *v /= mass;
                    }
                }
            },
        )
    }

    /// Marginal law of one vertex under a joint law.
    pub fn marginal(&self, p: &[f64], vertex: usize) -> Vec<f64> {
        let n = self.graph.n();
        let mut decoded = vec![0usize; n];
        let mut mu = vec![0.0; self.m];
        for (z, &w) in p.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            self.decode(z, &mut decoded);
            mu[decoded[vertex]] += w;
        }
        mu
    }
}
