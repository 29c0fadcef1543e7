//! The coupled ODE system for the law of the root neighborhood.
//!
//! The law is a vector over canonical classes (one representative value
//! per class, see [`ConfigSpace`]). The right-hand side couples, for
//! every class, a root term (plain jump rates) with neighbor-slot terms
//! whose rates are conditional expectations of the root rate under the
//! current law — the Ψ functionals. Conditioning cells with zero mass
//! contribute zero (the 0/0 = 0 convention).

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::integrate::{self, OdeOptions};
use crate::lfode::{ConfigSpace, NeighborhoodConfig};
use crate::models::{check_acyclic, Mark, ModelSpec, TransitionGraph};

/// Per-class slot group: a distinct neighbor value with its repetition
/// count and, per jump, the class reached by lowering one such slot.
#[derive(Debug, Clone)]
struct SlotGroup {
    /// Neighbor state index.
    s: u8,
    /// Number of slots holding it.
    cnt: f64,
    /// Per jump: (state index of s - j, class of the lowered config),
    /// when s - j stays inside the state space.
    down: SmallVec<[Option<(u8, u32)>; 2]>,
}

pub struct LfOde<'a> {
    pub space: &'a ConfigSpace,
    pub model: &'a ModelSpec,
    nj: usize,
    /// Per class, per jump: class with the root lowered by the jump.
    root_gain: Vec<SmallVec<[Option<u32>; 2]>>,
    slot_groups: Vec<Vec<SlotGroup>>,
    /// Scratch reused across rhs evaluations.
    rates: std::cell::RefCell<Vec<f64>>,
}

impl<'a> LfOde<'a> {
    pub fn new(space: &'a ConfigSpace, model: &'a ModelSpec) -> Result<Self> {
        if space.m() != model.m() {
            return Err(Error::Model(
                "configuration space and model disagree on the state space size".into(),
            ));
        }
        let states = model.states();
        let idx_of_code = |code: i32| states.iter().position(|&s| s == code);
        let nj = model.jumps().len();

        let mut root_gain = Vec::with_capacity(space.len());
        let mut slot_groups = Vec::with_capacity(space.len());
        for c in space.configs() {
            let mut rg: SmallVec<[Option<u32>; 2]> = SmallVec::new();
            for &j in model.jumps() {
                let down_code = states[c.root as usize] - j;
                rg.push(idx_of_code(down_code).map(|r| {
                    space
                        .class_of(r as u8, &c.neighbors)
                        .expect("lowered root stays in the space") as u32
                }));
            }
            root_gain.push(rg);

            let mut groups: Vec<SlotGroup> = Vec::new();
            let mut i = 0;
            while i < c.neighbors.len() {
                let s = c.neighbors[i];
                let mut run = 1;
                while i + run < c.neighbors.len() && c.neighbors[i + run] == s {
                    run += 1;
                }
                let mut down: SmallVec<[Option<(u8, u32)>; 2]> = SmallVec::new();
                for &j in model.jumps() {
                    let down_code = states[s as usize] - j;
                    down.push(idx_of_code(down_code).map(|sd| {
                        let mut slots = c.neighbors.clone();
                        slots[i] = sd as u8;
                        let class = space
                            .class_of(c.root, &slots)
                            .expect("lowered slot stays in the space")
                            as u32;
                        (sd as u8, class)
                    }));
                }
                groups.push(SlotGroup {
                    s,
                    cnt: run as f64,
                    down,
                });
                i += run;
            }
            slot_groups.push(groups);
        }
        Ok(LfOde {
            space,
            model,
            nj,
            root_gain,
            slot_groups,
            rates: std::cell::RefCell::new(vec![0.0; space.len() * nj]),
        })
    }

    fn transition_graph(&self) -> TransitionGraph {
        TransitionGraph {
            nodes: self.model.states().to_vec(),
            edges: self.model.declared_edges().to_vec(),
        }
    }

    /// Jump rates of every class at time `t` (reparametrized rates
    /// evaluated on in-space configurations).
    fn fill_rates(&self, t: f64, rates: &mut [f64]) {
        let states = self.model.states();
        let mut marks: SmallVec<[Mark; 8]> = SmallVec::new();
        for (i, c) in self.space.configs().iter().enumerate() {
            marks.clear();
            marks.extend(c.neighbors.iter().map(|&s| Mark::State(states[s as usize])));
            for (jj, &j) in self.model.jumps().iter().enumerate() {
                rates[i * self.nj + jj] =
                    self.model
                        .rate(j, t, Mark::State(states[c.root as usize]), &marks);
            }
        }
    }

    /// Conditional-rate tables over (conditioned root state x, first
    /// neighbor state s): `den[x,s] = Σ_c 1{root(c)=x} p_c·mult_c·cnt_c(s)`
    /// and `num[j][x,s]` with the jump rate of c folded in. These are the
    /// ordered-configuration sums of the Ψ functionals reduced to the
    /// canonical basis.
    fn fill_tables(&self, p: &[f64], rates: &[f64], den: &mut [f64], num: &mut [f64]) {
        let m = self.space.m();
        den.fill(0.0);
        num.fill(0.0);
        for (i, c) in self.space.configs().iter().enumerate() {
            let w = p[i] * self.space.multiplicity(i);
            let x = c.root as usize;
            for g in &self.slot_groups[i] {
                let cell = x * m + g.s as usize;
                den[cell] += w * g.cnt;
                for jj in 0..self.nj {
                    num[jj * m * m + cell] += w * g.cnt * rates[i * self.nj + jj];
                }
            }
        }
    }

    /// Right-hand side of the law ODE, in the canonical-class basis.
    pub fn rhs(&self, t: f64, p: &[f64], out: &mut [f64]) {
        let m = self.space.m();
        let mut rates = self.rates.borrow_mut();
        self.fill_rates(t, &mut rates);
        let mut den = vec![0.0; m * m];
        let mut num = vec![0.0; self.nj * m * m];
        self.fill_tables(p, &rates, &mut den, &mut num);
        let psi = |jj: usize, x: usize, s: usize| -> f64 {
            let d = den[x * m + s];
            if d <= 0.0 {
                0.0
            } else {
                (num[jj * m * m + x * m + s] / d).max(0.0)
            }
        };

        for (i, c) in self.space.configs().iter().enumerate() {
            let x0 = c.root as usize;
            let pa = p[i];
            let mut acc = 0.0;
            for jj in 0..self.nj {
                // Root slot: gain from the lowered-root class, loss at
                // the own jump rate.
                acc -= pa * rates[i * self.nj + jj];
                if let Some(g) = self.root_gain[i][jj] {
                    let g = g as usize;
                    acc += p[g] * rates[g * self.nj + jj];
                }
                // Neighbor slots, grouped by value.
                for group in &self.slot_groups[i] {
                    acc -= pa * group.cnt * psi(jj, group.s as usize, x0);
                    if let Some((sd, class)) = group.down[jj] {
                        acc += p[class as usize] * group.cnt * psi(jj, sd as usize, x0);
                    }
                }
            }
            out[i] = acc;
        }
    }

    /// Integrates the law from `p0` over `grid`, clamping tiny negative
    /// entries and renormalizing after each accepted step. Fails when
    /// the model's transition graph has a cycle.
    pub fn integrate(&self, p0: &[f64], grid: &[f64], opts: &OdeOptions) -> Result<LfSolution> {
        check_acyclic(&self.transition_graph())?;
        let mass0 = self.space.mass(p0);
        if (mass0 - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("initial law has mass {mass0}")));
        }
        let mult: Vec<f64> = (0..self.space.len())
            .map(|i| self.space.multiplicity(i))
            .collect();
        let mut clamped = 0.0;
        let sol = integrate::solve(
            |t, p, out| self.rhs(t, p, out),
            p0,
            grid.first().copied().unwrap_or(0.0),
            grid,
            opts,
            |p| {
                let mut mass = 0.0;
                for (v, &mu) in p.iter_mut().zip(&mult) {
                    if *v < 0.0 && *v >= -1e-10 {
                        clamped += -*v * mu;
                        *v = 0.0;
                    }
                    mass += *v * mu;
                }
                if mass > 0.0 {
                    for v in p.iter_mut() {
                        *v /= mass;
                    }
                }
            },
        )?;
        let (times, laws): (Vec<f64>, Vec<Vec<f64>>) = sol.into_iter().unzip();
        Ok(LfSolution {
            times,
            laws,
            clamped_mass: clamped,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LfSolution {
    pub times: Vec<f64>,
    /// Representative class values per output time.
    pub laws: Vec<Vec<f64>>,
    pub clamped_mass: f64,
}

impl LfSolution {
    pub fn marginals(&self, space: &ConfigSpace) -> Vec<Vec<f64>> {
        self.laws.iter().map(|p| space.marginalize(p)).collect()
    }
}

/// Direct evaluation of `Ψ_v^{ℓ,j}(t, f, a)`: reparametrized rate of the
/// shifted configuration for the root slot, conditional expected jump
/// rate for a neighbor slot. Brute-force over classes; the ODE path uses
/// precomputed tables instead, and the two must agree.
pub fn psi_reference(
    space: &ConfigSpace,
    model: &ModelSpec,
    t: f64,
    f: &[f64],
    a: &NeighborhoodConfig,
    v: usize,
    ell: i32,
    j: i32,
) -> f64 {
    let states = model.states();
    let idx_of_code = |code: i32| states.iter().position(|&s| s == code);
    let rate_of = |c: &NeighborhoodConfig| -> f64 {
        let marks: SmallVec<[Mark; 8]> = c
            .neighbors
            .iter()
            .map(|&s| Mark::State(states[s as usize]))
            .collect();
        model.rate(j, t, Mark::State(states[c.root as usize]), &marks)
    };
    if v == 0 {
        // r^j(t, a - ℓ e_∅): zero when the shifted root leaves the space.
        let Some(root) = idx_of_code(states[a.root as usize] - ell) else {
            return 0.0;
        };
        let shifted = NeighborhoodConfig {
            root: root as u8,
            neighbors: a.neighbors.clone(),
        };
        if space.index_of(&shifted).is_none() {
            return 0.0;
        }
        return rate_of(&shifted);
    }
    if v > a.degree() {
        return 0.0;
    }
    let Some(x) = idx_of_code(states[a.neighbors[v - 1] as usize] - ell) else {
        return 0.0;
    };
    let s = a.root as usize;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, c) in space.configs().iter().enumerate() {
        if c.root as usize != x {
            continue;
        }
        let cnt = c.neighbors.iter().filter(|&&w| w as usize == s).count() as f64;
        if cnt == 0.0 {
            continue;
        }
        let w = f[i] * space.multiplicity(i) * cnt;
        den += w;
        num += w * rate_of(c);
    }
    if den <= 0.0 {
        0.0
    } else {
        (num / den).max(0.0)
    }
}
