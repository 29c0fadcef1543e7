use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::{Mark, ModelSpec};

fn param(params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| Error::Config(format!("missing model parameter `{name}`")))
}

fn count_state(neighbors: &[Mark], code: i32) -> usize {
    neighbors.iter().filter(|&&m| m == Mark::State(code)).count()
}

/// Builds one of the catalog models. Recognized names: `sir`, `seir`,
/// `two_strain_sir`, `seizure`, `voter`, `hawkes_threshold`.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    match name {
        "sir" => sir(params),
        "seir" => seir(params),
        "two_strain_sir" => two_strain_sir(params),
        "seizure" => seizure(params),
        "voter" => voter(),
        "hawkes_threshold" => hawkes_threshold(params),
        other => Err(Error::Config(format!("unknown builtin model `{other}`"))),
    }
}

fn sir(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let beta = param(params, "beta")?;
    let gamma = param(params, "gamma")?;
    if beta < 0.0 || gamma < 0.0 {
        return Err(Error::Config("sir: beta and gamma must be non-negative".into()));
    }
    ModelSpec::new(
        "sir",
        vec![0, 1, 2],
        vec!["S".into(), "I".into(), "R".into()],
        vec![1],
        vec![(0, 1), (1, 2)],
        Arc::new(move |j, _t, a, nb| match (j, a) {
            (1, 0) => beta * count_state(nb, 1) as f64,
            (1, 1) => gamma,
            _ => 0.0,
        }),
        Arc::new(move |d, _t| (beta * (d - 1) as f64).max(gamma)),
    )
}

fn seir(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let beta = param(params, "beta")?;
    let sigma = param(params, "sigma")?;
    let gamma = param(params, "gamma")?;
    if beta < 0.0 || sigma < 0.0 || gamma < 0.0 {
        return Err(Error::Config("seir: parameters must be non-negative".into()));
    }
    ModelSpec::new(
        "seir",
        vec![0, 1, 2, 3],
        vec!["S".into(), "E".into(), "I".into(), "R".into()],
        vec![1],
        vec![(0, 1), (1, 2), (2, 3)],
        Arc::new(move |j, _t, a, nb| match (j, a) {
            (1, 0) => beta * count_state(nb, 2) as f64,
            (1, 1) => sigma,
            (1, 2) => gamma,
            _ => 0.0,
        }),
        Arc::new(move |d, _t| (beta * (d - 1) as f64).max(sigma).max(gamma)),
    )
}

fn two_strain_sir(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let beta1 = param(params, "beta1")?;
    let beta2 = param(params, "beta2")?;
    let gamma1 = param(params, "gamma1")?;
    let gamma2 = param(params, "gamma2")?;
    if [beta1, beta2, gamma1, gamma2].iter().any(|&x| x < 0.0) {
        return Err(Error::Config("two_strain_sir: parameters must be non-negative".into()));
    }
    // States: S=0, I1=1, I2=2, R=3. Strain-1 infection and I2 recovery
    // are jump +1; strain-2 infection and I1 recovery are jump +2.
    ModelSpec::new(
        "two_strain_sir",
        vec![0, 1, 2, 3],
        vec!["S".into(), "I1".into(), "I2".into(), "R".into()],
        vec![1, 2],
        vec![(0, 1), (0, 2), (1, 3), (2, 3)],
        Arc::new(move |j, _t, a, nb| match (j, a) {
            (1, 0) => beta1 * count_state(nb, 1) as f64,
            (2, 0) => beta2 * count_state(nb, 2) as f64,
            (2, 1) => gamma1,
            (1, 2) => gamma2,
            _ => 0.0,
        }),
        Arc::new(move |d, _t| {
            ((beta1 + beta2) * (d - 1) as f64).max(gamma1).max(gamma2)
        }),
    )
}

/// Seizure-propagation dynamics. State code = excitability block * 3 +
/// phase, with phases 0 (susceptible), 1 (seizing), 2 (resting); block 0
/// carries excitability `+alpha_plus`, block 1 carries `-alpha_minus`.
/// The excitability coordinate never jumps, so the single jump +1 moves
/// within a block.
fn seizure(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let beta = param(params, "beta")?;
    let alpha_plus = param(params, "alpha_plus")?;
    let alpha_minus = param(params, "alpha_minus")?;
    if beta < 0.0 || alpha_plus < 0.0 || alpha_minus < 0.0 {
        return Err(Error::Config("seizure: parameters must be non-negative".into()));
    }
    let phase = |code: i32| code % 3;
    let inhibitory = |code: i32| code >= 3;

    let rate = {
        move |j: i32, _t: f64, a: i32, nb: &[Mark]| -> f64 {
            if j != 1 {
                return 0.0;
            }
            match phase(a) {
                0 => {
                    let own = if inhibitory(a) { -alpha_minus } else { alpha_plus };
                    let mut drive = own;
                    for m in nb {
                        if let Mark::State(w) = *m {
                            if phase(w) == 1 {
                                drive += beta;
                            } else if phase(w) == 0 && inhibitory(w) {
                                drive -= alpha_minus;
                            }
                        }
                    }
                    drive.max(0.0)
                }
                1 => {
                    let d = nb.iter().filter(|m| m.state().is_some()).count() as f64;
                    let s: f64 = nb
                        .iter()
                        .filter_map(|m| m.state())
                        .filter(|&w| phase(w) == 0 && inhibitory(w))
                        .count() as f64
                        * alpha_minus;
                    let denom = d - 1.0 - s;
                    // The recovery rate diverges as the denominator
                    // approaches 0 from above; a non-positive denominator
                    // is read as a blocked recovery.
                    if denom > 0.0 {
                        ((1.0 + s) / denom).max(0.0)
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            }
        }
    };

    let bound = move |d: usize, _t: f64| -> f64 {
        let deg = d.saturating_sub(1);
        let mut best = alpha_plus + beta * deg as f64;
        for dd in 0..=deg {
            for m in 0..=dd {
                let s = alpha_minus * m as f64;
                let denom = dd as f64 - 1.0 - s;
                if denom > 0.0 {
                    best = best.max((1.0 + s) / denom);
                }
            }
        }
        best
    };

    ModelSpec::new(
        "seizure",
        vec![0, 1, 2, 3, 4, 5],
        vec![
            "S+".into(),
            "I+".into(),
            "R+".into(),
            "S-".into(),
            "I-".into(),
            "R-".into(),
        ],
        vec![1],
        vec![(0, 1), (1, 2), (3, 4), (4, 5)],
        Arc::new(rate),
        Arc::new(bound),
    )
}

/// Entrenched-majority voter model: undecided (0) adopts the strict
/// majority opinion of its neighborhood; ±1 are absorbing.
fn voter() -> Result<ModelSpec> {
    let majority = |nb: &[Mark]| -> (usize, usize) {
        (count_state(nb, 1), count_state(nb, -1))
    };
    let spec = ModelSpec::new(
        "voter",
        vec![-1, 0, 1],
        vec!["-1".into(), "0".into(), "1".into()],
        vec![1, -1],
        vec![(0, 1), (0, -1)],
        Arc::new(move |j, _t, a, nb| {
            if a != 0 {
                return 0.0;
            }
            let (blue, red) = majority(nb);
            match j {
                1 if blue > red => 1.0,
                -1 if red > blue => 1.0,
                _ => 0.0,
            }
        }),
        Arc::new(|_d, _t| 1.0),
    )?;
    // Complete-graph limit: the majority is decided by the population
    // composition itself (state indices: 0 ↦ -1, 1 ↦ 0, 2 ↦ +1).
    Ok(spec.with_complete_rate(Arc::new(|j, _t, a, mu: &[f64]| {
        if a != 0 {
            return 0.0;
        }
        match j {
            1 if mu[2] > mu[0] => 1.0,
            -1 if mu[0] > mu[2] => 1.0,
            _ => 0.0,
        }
    })))
}

/// Counts-based Markov variant of the thresholded Hawkes process:
/// intensity `max(0, u + alpha * sum of neighbor counts)` until the
/// threshold M is reached.
fn hawkes_threshold(params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let m_thresh = param(params, "M")?;
    if m_thresh < 1.0 || m_thresh.fract() != 0.0 {
        return Err(Error::Config("hawkes_threshold: M must be a positive integer".into()));
    }
    let m_thresh = m_thresh as i32;
    let alpha = param(params, "alpha")?;
    let u = param(params, "u")?;
    if alpha < 0.0 {
        return Err(Error::Config("hawkes_threshold: alpha must be non-negative".into()));
    }
    let states: Vec<i32> = (0..=m_thresh).collect();
    let labels: Vec<String> = states.iter().map(|s| s.to_string()).collect();
    let edges: Vec<(i32, i32)> = (0..m_thresh).map(|s| (s, s + 1)).collect();
    ModelSpec::new(
        "hawkes_threshold",
        states,
        labels,
        vec![1],
        edges,
        Arc::new(move |j, _t, a, nb| {
            if j != 1 || a >= m_thresh {
                return 0.0;
            }
            let excitation: f64 = nb
                .iter()
                .filter_map(|m| m.state())
                .map(|w| w as f64)
                .sum();
            (u + alpha * excitation).max(0.0)
        }),
        Arc::new(move |d, _t| {
            (u + alpha * m_thresh as f64 * (d.saturating_sub(1)) as f64).max(0.0)
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn missing_parameter_is_named() {
        let err = builtin("sir", &params(&[("beta", 1.0)])).unwrap_err();
        assert!(err.to_string().contains("gamma"));
    }

    #[test]
    fn sir_rates() {
        let m = builtin("sir", &params(&[("beta", 1.0), ("gamma", 0.5)])).unwrap();
        let nb = [Mark::State(1), Mark::State(1), Mark::State(0)];
        assert_eq!(m.rate(1, 0.0, Mark::State(0), &nb), 2.0);
        assert_eq!(m.rate(1, 0.0, Mark::State(1), &nb), 0.5);
        assert_eq!(m.rate(1, 0.0, Mark::State(2), &nb), 0.0);
        assert_eq!(m.rate(1, 0.0, Mark::Star, &nb), 0.0);
    }

    #[test]
    fn seizure_hand_values() {
        let m = builtin(
            "seizure",
            &params(&[("beta", 2.0), ("alpha_plus", 1.0), ("alpha_minus", 1.0)]),
        )
        .unwrap();
        // Root susceptible with excitability +1, one seizing neighbor,
        // beta = 2, no susceptible inhibitors: 0 ∨ (1 + 2) = 3.
        assert_eq!(m.rate(1, 0.0, Mark::State(0), &[Mark::State(1)]), 3.0);
        // Root seizing, degree 3, no susceptible inhibitory neighbors:
        // (1) / (3 - 1) = 0.5.
        let nb = [Mark::State(2), Mark::State(2), Mark::State(1)];
        assert_eq!(m.rate(1, 0.0, Mark::State(1), &nb), 0.5);
    }

    #[test]
    fn seizure_blocked_recovery_convention() {
        let m = builtin(
            "seizure",
            &params(&[("beta", 1.0), ("alpha_plus", 1.0), ("alpha_minus", 1.0)]),
        )
        .unwrap();
        // Degree 1, no inhibitors: denominator 1 - 1 = 0 -> rate 0.
        assert_eq!(m.rate(1, 0.0, Mark::State(1), &[Mark::State(2)]), 0.0);
        // Degree 2 with one susceptible inhibitor: denominator 2-1-1 = 0.
        let nb = [Mark::State(3), Mark::State(2)];
        assert_eq!(m.rate(1, 0.0, Mark::State(1), &nb), 0.0);
    }

    #[test]
    fn voter_hand_values() {
        let m = builtin("voter", &BTreeMap::new()).unwrap();
        let nb = [Mark::State(1), Mark::State(1), Mark::State(-1)];
        assert_eq!(m.rate(1, 0.0, Mark::State(0), &nb), 1.0);
        assert_eq!(m.rate(-1, 0.0, Mark::State(0), &nb), 0.0);
        let tied = [Mark::State(1), Mark::State(-1)];
        assert_eq!(m.rate(1, 0.0, Mark::State(0), &tied), 0.0);
        assert_eq!(m.rate(-1, 0.0, Mark::State(0), &tied), 0.0);
        // decided vertices never move
        assert_eq!(m.rate(1, 0.0, Mark::State(1), &nb), 0.0);
    }

    #[test]
    fn hawkes_states_and_rates() {
        let m = builtin(
            "hawkes_threshold",
            &params(&[("M", 3.0), ("alpha", 1.0), ("u", 0.1)]),
        )
        .unwrap();
        assert_eq!(m.states(), &[0, 1, 2, 3]);
        let nb = [Mark::State(2), Mark::Star, Mark::State(1)];
        assert!((m.rate(1, 0.0, Mark::State(0), &nb) - 3.1).abs() < 1e-12);
        assert_eq!(m.rate(1, 0.0, Mark::State(3), &nb), 0.0);
    }

    #[test]
    fn star_neighbors_are_absent() {
        let m = builtin("sir", &params(&[("beta", 1.0), ("gamma", 0.5)])).unwrap();
        let nb = [Mark::Star, Mark::State(1), Mark::Star];
        assert_eq!(m.rate(1, 0.0, Mark::State(0), &nb), 1.0);
    }
}
