//! Brute-force solver on ordered neighborhood configurations.
//!
//! Keeps one probability per ordered configuration (root state plus an
//! ordered tuple of neighbor states) and evaluates the law ODE directly
//! from the defining sums, with no symmetry reduction and no shared code
//! with [`super::LfOde`] beyond the integrator. Exponential in the
//! maximum degree, so only usable on small supports — which is the
//! point: it is the oracle the reduced path is checked against.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graphs::DegreeDistribution;
use crate::integrate::{self, OdeOptions};
use crate::lfode::{ConfigSpace, NeighborhoodConfig, Slots};
use crate::models::{Mark, ModelSpec};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Ordered {
    root: u8,
    slots: Vec<u8>,
}

pub struct OrderedSolver<'a> {
    model: &'a ModelSpec,
    theta: DegreeDistribution,
    configs: Vec<Ordered>,
    index: HashMap<Ordered, usize>,
}

impl<'a> OrderedSolver<'a> {
    pub fn new(model: &'a ModelSpec, theta: &DegreeDistribution) -> Self {
        let m = model.m();
        let mut configs = Vec::new();
        for k in theta.support() {
            for code in 0..m.pow(k as u32) {
                let mut slots = vec![0u8; k];
                let mut rem = code;
                for s in slots.iter_mut() {
                    *s = (rem % m) as u8;
                    rem /= m;
                }
                for root in 0..m {
                    configs.push(Ordered {
                        root: root as u8,
                        slots: slots.clone(),
                    });
                }
            }
        }
        let index = configs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        OrderedSolver {
            model,
            theta: theta.clone(),
            configs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Product initial law: degree from θ, every vertex i.i.d. `q`.
    pub fn initial_law(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.model.m() {
            return Err(Error::Config("initial marginal has the wrong length".into()));
        }
        if (q.iter().sum::<f64>() - 1.0).abs() > 1e-9 || q.iter().any(|&v| v < 0.0) {
            return Err(Error::Config("initial marginal is not a probability vector".into()));
        }
        Ok(self
            .configs
            .iter()
            .map(|c| {
                self.theta.prob(c.slots.len())
                    * q[c.root as usize]
                    * c.slots.iter().map(|&s| q[s as usize]).product::<f64>()
            })
            .collect())
    }

    fn rate(&self, j: i32, t: f64, c: &Ordered) -> f64 {
        let states = self.model.states();
        let marks: SmallVec<[Mark; 8]> = c
            .slots
            .iter()
            .map(|&s| Mark::State(states[s as usize]))
            .collect();
        self.model.rate(j, t, Mark::State(states[c.root as usize]), &marks)
    }

    /// The conditional-rate functional evaluated by literal summation:
    /// degree-weighted expectation of the root jump rate given root state
    /// `x` and first neighbor state `s`.
    fn psi(&self, t: f64, f: &[f64], j: i32, x: u8, s: u8) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, c) in self.configs.iter().enumerate() {
            if c.root != x || c.slots.first() != Some(&s) {
                continue;
            }
            let w = c.slots.len() as f64 * f[i];
            den += w;
            num += w * self.rate(j, t, c);
        }
        if den <= 0.0 {
            0.0
        } else {
            (num / den).max(0.0)
        }
    }

    pub fn rhs(&self, t: f64, f: &[f64], out: &mut [f64]) {
        let states = self.model.states();
        let idx_of_code = |code: i32| states.iter().position(|&s| s == code);
        for (i, a) in self.configs.iter().enumerate() {
            let mut acc = 0.0;
            for &j in self.model.jumps() {
                // Root slot.
                acc -= f[i] * self.rate(j, t, a);
                if let Some(r) = idx_of_code(states[a.root as usize] - j) {
                    let down = Ordered {
                        root: r as u8,
                        slots: a.slots.clone(),
                    };
                    let gi = self.index[&down];
                    acc += f[gi] * self.rate(j, t, &down);
                }
                // Neighbor slots, one at a time.
                for v in 0..a.slots.len() {
                    acc -= f[i] * self.psi(t, f, j, a.slots[v], a.root);
                    if let Some(sd) = idx_of_code(states[a.slots[v] as usize] - j) {
                        let mut down = a.clone();
                        down.slots[v] = sd as u8;
                        let gi = self.index[&down];
                        acc += f[gi] * self.psi(t, f, j, sd as u8, a.root);
                    }
                }
            }
            out[i] = acc;
        }
    }

    pub fn solve(
        &self,
        f0: &[f64],
        grid: &[f64],
        opts: &OdeOptions,
    ) -> Result<Vec<(f64, Vec<f64>)>> {
        integrate::solve(
            |t, f, out| self.rhs(t, f, out),
            f0,
            grid.first().copied().unwrap_or(0.0),
            grid,
            opts,
            |f| {
                let mut mass = 0.0;
                for v in f.iter_mut() {
                    if *v < 0.0 && *v >= -1e-10 {
                        *v = 0.0;
                    }
                    mass += *v;
                }
                if mass > 0.0 {
                    for v in f.iter_mut() {
                        *v /= mass;
                    }
                }
            },
        )
    }

    /// Lifts a canonical-basis law (representative values) to the
    /// ordered basis: every ordered configuration gets its class value.
    pub fn lift(&self, space: &ConfigSpace, p: &[f64]) -> Vec<f64> {
        self.configs
            .iter()
            .map(|c| {
                let slots: Slots = c.slots.iter().copied().collect();
                let class = space
                    .index_of(&NeighborhoodConfig::new(c.root, slots))
                    .expect("ordered config belongs to a class");
                p[class]
            })
            .collect()
    }

    /// The conditional functional `Ψ_v^{ℓ,j}(t, f, a)` for a neighbor
    /// slot `v ∈ 1..=deg(a)`, evaluated by the ordered definition:
    /// conditioned root state is `a_v - ℓ`, first neighbor is the root
    /// of `a`. Returns 0 when the shifted state leaves the space or the
    /// conditioning event has zero mass.
    pub fn psi_oracle(
        &self,
        t: f64,
        f: &[f64],
        j: i32,
        a: &NeighborhoodConfig,
        v: usize,
        ell: i32,
    ) -> f64 {
        let states = self.model.states();
        assert!(v >= 1 && v <= a.degree());
        let Some(x) = self
            .model
            .state_index(states[a.neighbors[v - 1] as usize] - ell)
        else {
            return 0.0;
        };
        self.psi(t, f, j, x as u8, a.root)
    }

    /// Projects an ordered law onto canonical classes, averaging the
    /// ordered values inside each class (they should agree when the law
    /// is exchangeable; the spread is the caller's cross-check).
    pub fn to_class_law(&self, space: &ConfigSpace, f: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; space.len()];
        let mut counts = vec![0.0; space.len()];
        for (i, c) in self.configs.iter().enumerate() {
            let slots: Slots = c.slots.iter().copied().collect();
            let class = space
                .index_of(&NeighborhoodConfig::new(c.root, slots))
                .expect("ordered config belongs to a class");
            sums[class] += f[i];
            counts[class] += 1.0;
        }
        sums.iter()
            .zip(&counts)
            .map(|(&s, &c)| if c > 0.0 { s / c } else { 0.0 })
            .collect()
    }

    /// Largest deviation between ordered values inside any class: a
    /// direct measure of exchangeability of the solved law.
    pub fn class_spread(&self, space: &ConfigSpace, f: &[f64]) -> f64 {
        let mut lo = vec![f64::INFINITY; space.len()];
        let mut hi = vec![f64::NEG_INFINITY; space.len()];
        for (i, c) in self.configs.iter().enumerate() {
            let slots: Slots = c.slots.iter().copied().collect();
            let class = space
                .index_of(&NeighborhoodConfig::new(c.root, slots))
                .expect("ordered config belongs to a class");
            lo[class] = lo[class].min(f[i]);
            hi[class] = hi[class].max(f[i]);
        }
        lo.iter()
            .zip(&hi)
            .filter(|(l, _)| l.is_finite())
            .map(|(&l, &h)| h - l)
            .fold(0.0, f64::max)
    }

    pub fn marginal(&self, f: &[f64], m: usize) -> Vec<f64> {
        let mut mu = vec![0.0; m];
        for (i, c) in self.configs.iter().enumerate() {
            mu[c.root as usize] += f[i];
        }
        mu
    }
}
