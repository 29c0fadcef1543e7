//! Cross-validation of the reduced law ODE against independent routes:
//! the brute-force ordered solver, the master equation (exact for a
//! two-vertex system), and the local-field ensemble.

use std::collections::BTreeMap;

use netdyn::graphs::{DegreeDistribution, Graph};
use netdyn::integrate::OdeOptions;
use netdyn::lfode::{ConfigSpace, LfOde, OrderedSolver};
use netdyn::models::{builtin, ModelSpec};
use netdyn::rng::stream;
use netdyn::sim::MasterEquation;
use rand::Rng;

fn sir(beta: f64, gamma: f64) -> ModelSpec {
    let mut p = BTreeMap::new();
    p.insert("beta".to_string(), beta);
    p.insert("gamma".to_string(), gamma);
    builtin("sir", &p).unwrap()
}

fn voter() -> ModelSpec {
    builtin("voter", &BTreeMap::new()).unwrap()
}

/// Random probability law in the canonical basis (representative
/// values), normalized to unit total mass.
fn random_law(space: &ConfigSpace, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 0);
    let mut p: Vec<f64> = (0..space.len()).map(|_| rng.random::<f64>()).collect();
    let mass = space.mass(&p);
    for v in p.iter_mut() {
        *v /= mass;
    }
    p
}

/// Lifts a canonical law to the ordered basis of `solver`.
fn lift(space: &ConfigSpace, solver: &OrderedSolver, p: &[f64]) -> Vec<f64> {
    solver.lift(space, p)
}

#[test]
fn reduced_rhs_agrees_with_the_ordered_rhs_on_every_configuration() {
    let thetas = [
        DegreeDistribution::delta(2),
        DegreeDistribution::new([(1, 0.5), (3, 0.5)]).unwrap(),
    ];
    for (mi, model) in [sir(1.3, 0.6), voter()].iter().enumerate() {
        for (ti, theta) in thetas.iter().enumerate() {
            let space = ConfigSpace::enumerate(theta, model.m());
            let ode = LfOde::new(&space, model).unwrap();
            let solver = OrderedSolver::new(model, theta);
            for seed in 0..5u64 {
                let p = random_law(&space, 1000 + seed * 10 + mi as u64 * 100 + ti as u64);
                let f = lift(&space, &solver, &p);
                let t = seed as f64 * 0.3;

                let mut dp = vec![0.0; space.len()];
                ode.rhs(t, &p, &mut dp);
                let mut df = vec![0.0; f.len()];
                solver.rhs(t, &f, &mut df);

                // Every ordered configuration must evolve exactly like
                // its class representative: this is simultaneously the
                // reduction identity and permutation invariance.
                let df_by_class = solver.to_class_law(&space, &df);
                let spread = solver.class_spread(&space, &df);
                assert!(spread < 1e-12, "ordered rhs not exchangeable: {spread}");
                for i in 0..space.len() {
                    assert!(
                        (dp[i] - df_by_class[i]).abs() < 1e-11,
                        "class {i}: reduced {} vs ordered {}",
                        dp[i],
                        df_by_class[i]
                    );
                }

                // Total mass is conserved by the flow.
                let total: f64 = (0..space.len())
                    .map(|i| dp[i] * space.multiplicity(i))
                    .sum();
                assert!(total.abs() < 1e-11, "mass leak {total}");
            }
        }
    }
}

#[test]
fn reduced_and_unreduced_trajectories_agree_to_1e9() {
    let opts = OdeOptions {
        fixed_step: Some(1e-3),
        ..OdeOptions::default()
    };
    let grid = [0.0, 0.5, 1.0, 2.0];
    for model in [sir(1.0, 0.5), voter()] {
        let theta = DegreeDistribution::delta(2);
        let space = ConfigSpace::enumerate(&theta, model.m());
        let q = match model.m() {
            3 => vec![0.7, 0.3, 0.0],
            _ => vec![0.2, 0.5, 0.3],
        };
        let p0 = space.build_initial_law(&q).unwrap();
        let ode = LfOde::new(&space, &model).unwrap();
        let sol = ode.integrate(&p0, &grid, &opts).unwrap();

        let solver = OrderedSolver::new(&model, &theta);
        let f0 = solver.initial_law(&q).unwrap();
        let osol = solver.solve(&f0, &grid, &opts).unwrap();

        for (k, (_, f)) in osol.iter().enumerate() {
            let by_class = solver.to_class_law(&space, f);
            assert!(solver.class_spread(&space, f) < 1e-9);
            for i in 0..space.len() {
                assert!(
                    (sol.laws[k][i] - by_class[i]).abs() < 1e-9,
                    "t = {}, class {i}",
                    grid[k]
                );
            }
        }
    }
}

#[test]
fn delta1_law_equals_the_two_vertex_master_equation() {
    // Under θ = δ_1 the limit tree is a single edge, the neighborhood is
    // the entire system, and the law ODE must coincide with the exact
    // forward equation of the two-vertex chain.
    let model = sir(1.2, 0.4);
    let theta = DegreeDistribution::delta(1);
    let space = ConfigSpace::enumerate(&theta, model.m());
    let q = [0.8, 0.2, 0.0];
    let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
    let opts = OdeOptions::default();

    let ode = LfOde::new(&space, &model).unwrap();
    let p0 = space.build_initial_law(&q).unwrap();
    let sol = ode.integrate(&p0, &grid, &opts).unwrap();

    let graph = Graph::from_edges(2, &[(0, 1)]).unwrap();
    let me = MasterEquation::new(&model, &graph).unwrap();
    let j0 = me.product_law(&q).unwrap();
    let msol = me.solve(&j0, &grid, &opts).unwrap();

    for (k, (_, joint)) in msol.iter().enumerate() {
        // Joint law of (vertex 0, vertex 1) is the neighborhood law.
        for (i, cfg) in space.configs().iter().enumerate() {
            let z = cfg.root as usize + cfg.neighbors[0] as usize * model.m();
            assert!(
                (sol.laws[k][i] - joint[z]).abs() < 1e-6,
                "t = {}, config {i}: ode {} vs master {}",
                grid[k],
                sol.laws[k][i],
                joint[z]
            );
        }
    }
}

#[test]
fn psi_reference_matches_the_ordered_functional() {
    let model = sir(0.9, 0.7);
    let theta = DegreeDistribution::new([(1, 0.4), (2, 0.6)]).unwrap();
    let space = ConfigSpace::enumerate(&theta, model.m());
    let solver = OrderedSolver::new(&model, &theta);
    for seed in 0..10u64 {
        let p = random_law(&space, 2000 + seed);
        let f = lift(&space, &solver, &p);
        let t = 0.1 * seed as f64;
        for a in space.configs() {
            for v in 1..=a.degree() {
                for &j in model.jumps() {
                    for ell in [0, j] {
                        let got =
                            netdyn::lfode::psi_reference(&space, &model, t, &p, a, v, ell, j);
                        let want = solver.psi_oracle(t, &f, j, a, v, ell);
                        assert!(
                            (got - want).abs() < 1e-11,
                            "psi mismatch: v={v} ell={ell} j={j} a={a:?}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn ensemble_tracks_the_ode_for_sir() {
    use netdyn::sim::{mlfe_ensemble, MlfeOptions};
    let model = sir(1.0, 0.5);
    let theta = DegreeDistribution::delta(2);
    let space = ConfigSpace::enumerate(&theta, model.m());
    let q = [0.8, 0.2, 0.0];
    let grid = vec![0.0, 0.5, 1.0];

    let ode = LfOde::new(&space, &model).unwrap();
    let p0 = space.build_initial_law(&q).unwrap();
    let sol = ode.integrate(&p0, &grid, &OdeOptions::default()).unwrap();

    let out = mlfe_ensemble(
        &model,
        &theta,
        &q,
        Some(&space),
        &MlfeOptions {
            n_copies: 20_000,
            dt: 1e-3,
            t_end: 1.0,
            seed: 31,
            parallel: true,
            grid: grid.clone(),
        },
    )
    .unwrap();

    let laws = out.class_laws.unwrap();
    for k in 0..grid.len() {
        let tv = space.tv_distance(&sol.laws[k], &laws[k]);
        assert!(tv <= 0.03, "TV at t={} is {tv}", grid[k]);
    }
}
