//! Mean-field baselines for the single-vertex marginal.
//!
//! [`mean_field_ode`] closes the marginal flow by treating the neighbor
//! states of a degree-k vertex as i.i.d. draws from the current marginal
//! (degree drawn from θ), with the expectation computed exactly by
//! summing over neighbor multisets. [`mean_field_complete`] is the
//! complete-graph closure, available for models that expose a rate as a
//! function of the global empirical measure.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graphs::DegreeDistribution;
use crate::integrate::{self, OdeOptions};
use crate::models::{Mark, ModelSpec};

/// Neighbor multisets of size `k` over `m` states with their multinomial
/// coefficients, as (counts, k!/∏counts!).
fn multisets(m: usize, k: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; m];
    fn rec(
        pos: usize,
        left: usize,
        m: usize,
        k: usize,
        counts: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if pos == m - 1 {
            counts[pos] = left;
            let ln = (2..=k).map(|i| (i as f64).ln()).sum::<f64>()
                - counts
                    .iter()
                    .map(|&c| (2..=c).map(|i| (i as f64).ln()).sum::<f64>())
                    .sum::<f64>();
            out.push((counts.clone(), ln.exp()));
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(pos + 1, left - c, m, k, counts, out);
        }
    }
    if m == 0 {
        return out;
    }
    rec(0, k, m, k, &mut counts, &mut out);
    out
}

/// Expected jump rate of a root in state index `x` whose `k` neighbors
/// are i.i.d. `mu`, summed exactly over neighbor multisets.
fn expected_rate(model: &ModelSpec, t: f64, j: i32, x: usize, k: usize, mu: &[f64]) -> f64 {
    let states = model.states();
    let m = states.len();
    let mut acc = 0.0;
    for (counts, coef) in multisets(m, k) {
        let mut prob = coef;
        for (s, &c) in counts.iter().enumerate() {
            if c > 0 {
                prob *= mu[s].max(0.0).powi(c as i32);
            }
        }
        if prob == 0.0 {
            continue;
        }
        let mut marks: SmallVec<[Mark; 8]> = SmallVec::new();
        for (s, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                marks.push(Mark::State(states[s]));
            }
        }
        acc += prob * model.rate(j, t, Mark::State(states[x]), &marks);
    }
    acc
}

/// Degree-averaged mean-field flow for the marginal `mu`:
/// `dμ(a) = Σ_j Σ_k θ(k) [μ(a−j)·E_k r^j(a−j) − μ(a)·E_k r^j(a)]`.
pub fn mean_field_rhs(
    model: &ModelSpec,
    theta: &DegreeDistribution,
    t: f64,
    mu: &[f64],
    out: &mut [f64],
) {
    let states = model.states();
    out.fill(0.0);
    for (k, pk) in theta.iter() {
        if pk == 0.0 {
            continue;
        }
        for (x, &code) in states.iter().enumerate() {
            for &j in model.jumps() {
                let loss = mu[x] * expected_rate(model, t, j, x, k, mu);
                out[x] -= pk * loss;
                if let Some(up) = model.state_index(code + j) {
                    out[up] += pk * loss;
                }
            }
        }
    }
}

/// Integrates the degree-averaged mean-field ODE over `grid`.
pub fn mean_field_ode(
    model: &ModelSpec,
    theta: &DegreeDistribution,
    mu0: &[f64],
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if mu0.len() != model.m() {
        return Err(Error::Config("initial marginal has the wrong length".into()));
    }
    integrate::solve(
        |t, mu, out| mean_field_rhs(model, theta, t, mu, out),
        mu0,
        grid.first().copied().unwrap_or(0.0),
        grid,
        opts,
        |mu| {
            let mut mass = 0.0;
            for v in mu.iter_mut() {
                if *v < 0.0 && *v >= -1e-10 {
                    *v = 0.0;
                }
                mass += *v;
            }
            if mass > 0.0 {
                for v in mu.iter_mut() {
                    *v /= mass;
                }
            }
        },
    )
}

/// Complete-graph mean field: the flow of the marginal when every vertex
/// sees the empirical measure of all others. Requires the model to carry
/// a rate defined against a measure, rather than a finite mark vector.
pub fn mean_field_complete(
    model: &ModelSpec,
    mu0: &[f64],
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if !model.has_complete_rate() {
        return Err(Error::Model(format!(
            "model `{}` has no complete-graph rate",
            model.name
        )));
    }
    if mu0.len() != model.m() {
        return Err(Error::Config("initial marginal has the wrong length".into()));
    }
    let states = model.states().to_vec();
    integrate::solve(
        |t, mu, out| {
            out.fill(0.0);
            for (x, &code) in states.iter().enumerate() {
                for &j in model.jumps() {
                    let loss = mu[x] * model.complete_rate(j, t, code, mu).unwrap_or(0.0);
                    out[x] -= loss;
                    if let Some(up) = model.state_index(code + j) {
                        out[up] += loss;
                    }
                }
            }
        },
        mu0,
        grid.first().copied().unwrap_or(0.0),
        grid,
        opts,
        |mu| {
            let mut mass = 0.0;
            for v in mu.iter_mut() {
                if *v < 0.0 && *v >= -1e-10 {
                    *v = 0.0;
                }
                mass += *v;
            }
            if mass > 0.0 {
                for v in mu.iter_mut() {
                    *v /= mass;
                }
            }
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin;
    use std::collections::BTreeMap;

    fn sir() -> ModelSpec {
        let mut p = BTreeMap::new();
        p.insert("beta".to_string(), 1.0);
        p.insert("gamma".to_string(), 0.5);
        builtin("sir", &p).unwrap()
    }

    #[test]
    fn multiset_weights_sum_to_mk() {
        for (m, k) in [(2usize, 3usize), (3, 4), (4, 2)] {
            let total: f64 = multisets(m, k).iter().map(|(_, c)| c).sum();
            assert!((total - (m as f64).powi(k as i32)).abs() < 1e-9);
        }
    }

    #[test]
    fn expected_rate_matches_hand_value() {
        // SIR infection rate with k=2 i.i.d. neighbors, P(I)=0.3:
        // E[β·#I] = β·k·0.3 = 0.6.
        let model = sir();
        let mu = [0.7, 0.3, 0.0];
        let r = expected_rate(&model, 0.0, 1, 0, 2, &mu);
        assert!((r - 0.6).abs() < 1e-12, "{r}");
    }

    #[test]
    fn mass_conserved() {
        let model = sir();
        let theta = DegreeDistribution::delta(3);
        let grid = [0.0, 1.0, 2.0];
        let sol = mean_field_ode(&model, &theta, &[0.9, 0.1, 0.0], &grid, &OdeOptions::default())
            .unwrap();
        for (_, mu) in &sol {
            let mass: f64 = mu.iter().sum();
            assert!((mass - 1.0).abs() < 1e-8);
            assert!(mu.iter().all(|&v| v >= 0.0));
        }
        // Infection spreads: S decreases, R increases.
        assert!(sol.last().unwrap().1[0] < 0.9);
        assert!(sol.last().unwrap().1[2] > 0.0);
    }
}
