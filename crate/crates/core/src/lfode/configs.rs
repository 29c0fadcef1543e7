use std::collections::HashMap;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graphs::DegreeDistribution;
use crate::models::ModelSpec;

/// Sentinel for an unused (⋆) neighbor slot in padded displays.
pub const STAR: u8 = u8::MAX;

pub type Slots = SmallVec<[u8; 8]>;

/// Canonical root-neighborhood configuration: root state index plus the
/// sorted multiset of neighbor state indices. Slots beyond the degree
/// are ⋆ and not stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NeighborhoodConfig {
    pub root: u8,
    pub neighbors: Slots,
}

impl NeighborhoodConfig {
    pub fn new(root: u8, mut neighbors: Slots) -> Self {
        neighbors.sort_unstable();
        NeighborhoodConfig { root, neighbors }
    }

    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

/// Indexed enumeration of all canonical configurations compatible with
/// a degree distribution and a state space of size `m`, together with
/// the number of ordered configurations in each canonical class.
///
/// A law over the space is stored as one value per canonical class,
/// holding the probability of a *single* ordered configuration in the
/// class (all orderings share it, the law being exchangeable); the
/// class carries total mass `multiplicity * value`.
#[derive(Debug, Clone)]
pub struct ConfigSpace {
    theta: DegreeDistribution,
    m: usize,
    configs: Vec<NeighborhoodConfig>,
    index: HashMap<NeighborhoodConfig, usize>,
    multiplicity: Vec<f64>,
}

fn ordered_count(neighbors: &[u8]) -> f64 {
    // k! / prod over repeated values of (count!)
    let k = neighbors.len();
    let mut mult = 1.0;
    for i in 1..=k {
        mult *= i as f64;
    }
    let mut i = 0;
    while i < k {
        let mut run = 1;
        while i + run < k && neighbors[i + run] == neighbors[i] {
            run += 1;
        }
        let mut fact = 1.0;
        for r in 1..=run {
            fact *= r as f64;
        }
        mult /= fact;
        i += run;
    }
    mult
}

impl ConfigSpace {
    /// Enumerates, for each degree in the support of `theta`, every root
    /// state and every sorted neighbor multiset. The total count is
    /// `m * Σ_{k∈Θ} C(k+m-1, m-1)`.
    pub fn enumerate(theta: &DegreeDistribution, m: usize) -> Self {
        let mut configs = Vec::new();
        for k in theta.support() {
            for root in 0..m as u8 {
                let mut slots: Slots = SmallVec::new();
                gen_multisets(m as u8, k, 0, &mut slots, &mut |neighbors| {
                    configs.push(NeighborhoodConfig {
                        root,
                        neighbors: neighbors.clone(),
                    });
                });
            }
        }
        let multiplicity = configs.iter().map(|c| ordered_count(&c.neighbors)).collect();
        let index = configs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        ConfigSpace {
            theta: theta.clone(),
            m,
            configs,
            index,
            multiplicity,
        }
    }

    pub fn theta(&self) -> &DegreeDistribution {
        &self.theta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d_max(&self) -> usize {
        self.theta.d_max()
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn config(&self, i: usize) -> &NeighborhoodConfig {
        &self.configs[i]
    }

    pub fn configs(&self) -> &[NeighborhoodConfig] {
        &self.configs
    }

    /// Ordered configurations in class `i`.
    pub fn multiplicity(&self, i: usize) -> f64 {
        self.multiplicity[i]
    }

    pub fn index_of(&self, cfg: &NeighborhoodConfig) -> Option<usize> {
        self.index.get(cfg).copied()
    }

    /// Index of the canonical class of (root, multiset of neighbors).
    pub fn class_of(&self, root: u8, neighbors: &[u8]) -> Option<usize> {
        let mut slots: Slots = SmallVec::from_slice(neighbors);
        slots.sort_unstable();
        self.index
            .get(&NeighborhoodConfig { root, neighbors: slots })
            .copied()
    }

    /// Product initial law: `p(a) = θ(k)·q(a_∅)·Π q(a_i)` per ordered
    /// configuration, stored as one representative value per class.
    pub fn build_initial_law(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.m {
            return Err(Error::Config(format!(
                "initial marginal has {} entries, state space has {}",
                q.len(),
                self.m
            )));
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > 1e-9 || q.iter().any(|&x| x < 0.0) {
            return Err(Error::Config("initial marginal must be a probability vector".into()));
        }
        Ok(self
            .configs
            .iter()
            .map(|c| {
                let mut v = self.theta.prob(c.degree()) * q[c.root as usize];
                for &s in &c.neighbors {
                    v *= q[s as usize];
                }
                v
            })
            .collect())
    }

    /// Total mass `Σ multiplicity * value`.
    pub fn mass(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(&self.multiplicity)
            .map(|(&v, &m)| v * m)
            .sum()
    }

    /// Total-variation distance between two laws given in the
    /// canonical basis: `½ Σ multiplicity * |p - q|`.
    pub fn tv_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        0.5 * p
            .iter()
            .zip(q)
            .zip(&self.multiplicity)
            .map(|((&a, &b), &m)| m * (a - b).abs())
            .sum::<f64>()
    }

    /// Root marginal `μ(a) = Σ_{classes with root a} multiplicity * value`.
    pub fn marginalize(&self, p: &[f64]) -> Vec<f64> {
        let mut mu = vec![0.0; self.m];
        for (i, c) in self.configs.iter().enumerate() {
            mu[c.root as usize] += self.multiplicity[i] * p[i];
        }
        mu
    }

    /// Display form like `S|I,S,*` (neighbors ⋆-padded to d_max).
    pub fn config_string(&self, i: usize, model: &ModelSpec) -> String {
        let c = &self.configs[i];
        let label = |s: u8| model.labels()[s as usize].clone();
        let mut parts: Vec<String> = c.neighbors.iter().map(|&s| label(s)).collect();
        while parts.len() < self.d_max() {
            parts.push("*".into());
        }
        format!("{}|{}", label(c.root), parts.join(","))
    }

    /// The closed-form class count `m * Σ_{k∈Θ} C(k+m-1, m-1)`.
    pub fn expected_len(theta: &DegreeDistribution, m: usize) -> usize {
        let mut total = 0usize;
        for k in theta.support() {
            total += binomial(k + m - 1, m - 1);
        }
        m * total
    }
}

fn gen_multisets(m: u8, k: usize, min: u8, slots: &mut Slots, f: &mut impl FnMut(&Slots)) {
    if k == 0 {
        f(slots);
        return;
    }
    for s in min..m {
        slots.push(s);
        gen_multisets(m, k - 1, s, slots, f);
        slots.pop();
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_closed_form() {
        // |X| = 3, θ = δ_2: 3·C(4,2) = 18 classes (27 ordered).
        let space = ConfigSpace::enumerate(&DegreeDistribution::delta(2), 3);
        assert_eq!(space.len(), 18);
        assert_eq!(ConfigSpace::expected_len(&DegreeDistribution::delta(2), 3), 18);
        let ordered: f64 = (0..space.len()).map(|i| space.multiplicity(i)).sum();
        assert_eq!(ordered, 27.0);

        // |X| = 2, θ = δ_1: 2·C(2,1) = 4 classes.
        let space = ConfigSpace::enumerate(&DegreeDistribution::delta(1), 2);
        assert_eq!(space.len(), 4);

        // θ = δ_0: m classes.
        let space = ConfigSpace::enumerate(&DegreeDistribution::delta(0), 5);
        assert_eq!(space.len(), 5);
    }

    #[test]
    fn multiplicities() {
        let space = ConfigSpace::enumerate(&DegreeDistribution::delta(3), 2);
        for i in 0..space.len() {
            let c = space.config(i);
            let ones = c.neighbors.iter().filter(|&&s| s == 1).count();
            let expected = binomial(3, ones) as f64;
            assert_eq!(space.multiplicity(i), expected);
        }
    }

    #[test]
    fn initial_law_products() {
        // q = {S: 0.9, I: 0.1}, θ = δ_1 over a 2-state space.
        let space = ConfigSpace::enumerate(&DegreeDistribution::delta(1), 2);
        let p = space.build_initial_law(&[0.9, 0.1]).unwrap();
        let get = |root: u8, nb: u8| p[space.class_of(root, &[nb]).unwrap()];
        assert!((get(0, 0) - 0.81).abs() < 1e-15);
        assert!((get(0, 1) - 0.09).abs() < 1e-15);
        assert!((get(1, 0) - 0.09).abs() < 1e-15);
        assert!((get(1, 1) - 0.01).abs() < 1e-15);
        assert!((space.mass(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_mass_initial_law() {
        let space = ConfigSpace::enumerate(&DegreeDistribution::delta(2), 3);
        let p = space.build_initial_law(&[1.0, 0.0, 0.0]).unwrap();
        let idx = space.class_of(0, &[0, 0]).unwrap();
        assert_eq!(p[idx], 1.0);
        assert!((space.mass(&p) - 1.0).abs() < 1e-12);
        let mu = space.marginalize(&p);
        assert_eq!(mu, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn marginalize_inverts_product_init() {
        let theta = DegreeDistribution::new([(1, 0.25), (3, 0.75)]).unwrap();
        let space = ConfigSpace::enumerate(&theta, 3);
        let q = [0.2, 0.5, 0.3];
        let p = space.build_initial_law(&q).unwrap();
        assert!((space.mass(&p) - 1.0).abs() < 1e-12);
        let mu = space.marginalize(&p);
        for (a, b) in mu.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn config_strings_padded() {
        let theta = DegreeDistribution::new([(1, 0.5), (2, 0.5)]).unwrap();
        let space = ConfigSpace::enumerate(&theta, 3);
        let model = crate::models::builtin(
            "sir",
            &[("beta".to_string(), 1.0), ("gamma".to_string(), 0.5)]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let i = space.class_of(0, &[1]).unwrap();
        assert_eq!(space.config_string(i, &model), "S|I,*");
        let j = space.class_of(1, &[0, 2]).unwrap();
        assert_eq!(space.config_string(j, &model), "I|S,R");
    }
}
