//! The five command pipelines. Each writes UTF-8 CSV (and SVG for
//! `compare`) into the output directory and returns the emitted paths.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use netdyn::graphs::{sample_configuration_model, CmMode, Graph, DEFAULT_REJECTION_CAP};
use netdyn::integrate::{uniform_grid, OdeOptions};
use netdyn::lfode::{mean_field_complete, mean_field_ode, ConfigSpace, LfOde};
use netdyn::models::{
    check_acyclic, parse_model_config, transition_graph, ModelSpec, DEFAULT_PROBE_COUNT,
};
use netdyn::rng::stream;
use netdyn::sim::{
    mlfe_ensemble, neighborhood_empirical_measure, replicate, sample_initial, simulate,
    MlfeOptions, SimOptions,
};

use crate::csvio::{CsvCell, Table};
use crate::experiment::{ExperimentSpec, GraphSource};
use crate::svg::{line_chart, Series};

/// Global flag overrides applied on top of the experiment document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid_step: Option<f64>,
    pub out_dir: PathBuf,
}

/// RNG stream index reserved for graph sampling, far above any replica
/// index.
const GRAPH_STREAM: u64 = u64::MAX;

fn effective(spec: &ExperimentSpec, ov: &Overrides) -> (u64, f64) {
    (
        ov.seed.unwrap_or(spec.run.seed),
        ov.grid_step.unwrap_or(spec.run.grid_step),
    )
}

fn ode_options(spec: &ExperimentSpec) -> OdeOptions {
    let mut opts = OdeOptions::default();
    if let Some(a) = spec.solver.abs_tol {
        opts.abs_tol = a;
    }
    if let Some(r) = spec.solver.rel_tol {
        opts.rel_tol = r;
    }
    opts
}

fn realize_graph(source: &GraphSource, seed: u64) -> Result<Graph> {
    let mut rng = stream(seed, GRAPH_STREAM);
    Ok(match source {
        GraphSource::ConfigurationModel { theta, n, erase } => {
            let mode = if *erase { CmMode::Erase } else { CmMode::Reject };
            let degrees = netdyn::graphs::sample_degrees(theta, *n, &mut rng);
            sample_configuration_model(&degrees, &mut rng, mode, DEFAULT_REJECTION_CAP)?
        }
        GraphSource::DegreeSequence(degrees) => {
            sample_configuration_model(degrees, &mut rng, CmMode::Reject, DEFAULT_REJECTION_CAP)?
        }
        GraphSource::EdgeList(graph) => graph.clone(),
        GraphSource::ThetaOnly(_) => {
            bail!("this pipeline needs a finite graph: give graph.n, graph.degrees or graph.edge_list")
        }
    })
}

fn marginal_table(model: &ModelSpec, grid: &[f64], rows: &[Vec<f64>], value: &str) -> Table {
    let mut t = Table::new(&["time", "state", value]);
    for (k, &time) in grid.iter().enumerate() {
        for (si, label) in model.labels().iter().enumerate() {
            t.row(&[time.into(), label.as_str().into(), rows[k][si].into()]);
        }
    }
    t
}

fn law_table(grid: &[f64], laws: &[Vec<f64>]) -> Table {
    let mut t = Table::new(&["time", "class_index", "probability"]);
    for (k, &time) in grid.iter().enumerate() {
        for (ci, &p) in laws[k].iter().enumerate() {
            t.row(&[time.into(), ci.into(), p.into()]);
        }
    }
    t
}

fn class_sidecar(space: &ConfigSpace, model: &ModelSpec) -> Table {
    let mut t = Table::new(&["class_index", "configuration"]);
    for i in 0..space.len() {
        t.row(&[i.into(), space.config_string(i, model).as_str().into()]);
    }
    t
}

// ---------------------------------------------------------------------
// check
// ---------------------------------------------------------------------

/// Validates a model document: transition graph, acyclicity, rate-bound
/// audit via randomized probes. Returns the intended exit code.
pub fn run_check(model_path: &Path) -> Result<i32> {
    let text = std::fs::read_to_string(model_path)
        .with_context(|| format!("reading {}", model_path.display()))?;
    let model = match parse_model_config(&text) {
        Ok(m) => m,
        Err(e) => {
            println!("{{ \"error\": \"config\", \"detail\": \"{e}\" }}");
            return Ok(1);
        }
    };
    println!("model: {}", model.name);
    println!("states: {:?}", model.labels());
    println!("jumps: {:?}", model.jumps());
    println!(
        "transition graph edges: {:?}",
        model
            .declared_edges()
            .iter()
            .map(|&(a, b)| format!("{}->{}", model.label_of(a), model.label_of(b)))
            .collect::<Vec<_>>()
    );

    let mut rng = stream(0, 0);
    let probed = match transition_graph(&model, DEFAULT_PROBE_COUNT, 6, 5.0, &mut rng) {
        Ok(tg) => tg,
        Err(e) => {
            println!("{{ \"error\": \"probe\", \"detail\": \"{e}\" }}");
            return Ok(1);
        }
    };
    println!(
        "probe audit: {} probes ok, rates within declared bounds",
        DEFAULT_PROBE_COUNT
    );
    match check_acyclic(&probed) {
        Ok(order) => {
            let labels: Vec<&str> = order.iter().map(|&s| model.label_of(s)).collect();
            println!("topological order: {}", labels.join(","));
            println!("check: pass");
            Ok(0)
        }
        Err(e) => {
            println!("{{ \"error\": \"cycle\", \"detail\": \"{e}\" }}");
            Ok(1)
        }
    }
}

// ---------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------

struct SimData {
    grid: Vec<f64>,
    /// Mean state fractions per grid time.
    mean: Vec<Vec<f64>>,
    /// Standard error of the mean per grid time and state.
    stderr: Vec<Vec<f64>>,
    /// Mean neighborhood class law (representative values).
    nbhd: Vec<Vec<f64>>,
    space: ConfigSpace,
}

fn simulate_data(
    spec: &ExperimentSpec,
    base: &Path,
    ov: &Overrides,
) -> Result<(ModelSpec, SimData, Vec<String>)> {
    let (seed, grid_step) = effective(spec, ov);
    let model = spec.build_model()?;
    let q = spec
        .initial_marginal(&model)?
        .ok_or_else(|| anyhow!("simulation needs init.q (an i.i.d. initial marginal)"))?;
    let graph = realize_graph(&spec.graph_source(base)?, seed)?;
    let grid = uniform_grid(0.0, spec.run.t_end, grid_step);
    let space = ConfigSpace::enumerate(&graph.empirical_degree_distribution()?, model.m());
    let runs = spec.run.replicas;

    struct Replica {
        fractions: Vec<Vec<f64>>,
        nbhd: Vec<Vec<f64>>,
        log_csv: String,
    }
    let replicas: Vec<netdyn::Result<Replica>> = replicate(runs, seed, true, |_, rng| {
        let init = sample_initial(&model, &q, graph.n(), rng)?;
        let log = simulate(&model, &graph, &init, &SimOptions::new(spec.run.t_end), rng)?;
        let mut fractions = Vec::with_capacity(grid.len());
        let mut nbhd = Vec::with_capacity(grid.len());
        for &t in &grid {
            let states = log.states_at(t);
            let mut mu = vec![0.0; model.m()];
            for &s in &states {
                mu[model.state_index(s).unwrap()] += 1.0 / graph.n() as f64;
            }
            fractions.push(mu);
            nbhd.push(neighborhood_empirical_measure(&graph, &states, &model, &space));
        }
        Ok(Replica {
            fractions,
            nbhd,
            log_csv: log.to_csv(),
        })
    });
    let replicas: Vec<Replica> = replicas.into_iter().collect::<netdyn::Result<_>>()?;

    let m = model.m();
    let mut mean = vec![vec![0.0; m]; grid.len()];
    let mut stderr = vec![vec![0.0; m]; grid.len()];
    let mut nbhd = vec![vec![0.0; space.len()]; grid.len()];
    for r in &replicas {
        for k in 0..grid.len() {
            for s in 0..m {
                mean[k][s] += r.fractions[k][s] / runs as f64;
            }
            for c in 0..space.len() {
                nbhd[k][c] += r.nbhd[k][c] / runs as f64;
            }
        }
    }
    if runs > 1 {
        for r in &replicas {
            for k in 0..grid.len() {
                for s in 0..m {
                    let d = r.fractions[k][s] - mean[k][s];
                    stderr[k][s] += d * d;
                }
            }
        }
        for row in stderr.iter_mut() {
            for v in row.iter_mut() {
                *v = (*v / (runs as f64 * (runs - 1) as f64)).sqrt();
            }
        }
    }
    let logs = replicas.into_iter().map(|r| r.log_csv).collect();
    Ok((
        model,
        SimData {
            grid,
            mean,
            stderr,
            nbhd,
            space,
        },
        logs,
    ))
}

pub fn run_simulate(
    spec: &ExperimentSpec,
    base: &Path,
    ov: &Overrides,
    event_logs: bool,
) -> Result<Vec<PathBuf>> {
    let (model, data, logs) = simulate_data(spec, base, ov)?;
    std::fs::create_dir_all(&ov.out_dir)?;
    let stem = |suffix: &str| ov.out_dir.join(format!("{}_{suffix}", spec.name));
    let mut written = Vec::new();

    let p = stem("marginals.csv");
    marginal_table(&model, &data.grid, &data.mean, "probability").write(&p)?;
    written.push(p);
    let p = stem("marginals_stderr.csv");
    marginal_table(&model, &data.grid, &data.stderr, "stderr").write(&p)?;
    written.push(p);
    let p = stem("neighborhood.csv");
    law_table(&data.grid, &data.nbhd).write(&p)?;
    written.push(p);
    let p = stem("classes.csv");
    class_sidecar(&data.space, &model).write(&p)?;
    written.push(p);

    if event_logs {
        for (i, log) in logs.iter().enumerate() {
            let p = stem(&format!("events_{i}.csv"));
            std::fs::write(&p, log)?;
            written.push(p);
        }
    }
    Ok(written)
}

// ---------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------

struct SolveData {
    grid: Vec<f64>,
    laws: Vec<Vec<f64>>,
    marginals: Vec<Vec<f64>>,
    space: ConfigSpace,
}

fn solve_data(spec: &ExperimentSpec, base: &Path, ov: &Overrides) -> Result<(ModelSpec, SolveData)> {
    let (_, grid_step) = effective(spec, ov);
    let model = spec.build_model()?;
    let theta = spec.theta(base)?;
    let space = ConfigSpace::enumerate(&theta, model.m());
    let p0 = match (&spec.init.law, spec.initial_marginal(&model)?) {
        (Some(law), _) => {
            if law.len() != space.len() {
                bail!(
                    "init.law has {} entries; the configuration space has {}",
                    law.len(),
                    space.len()
                );
            }
            law.clone()
        }
        (None, Some(q)) => space.build_initial_law(&q)?,
        (None, None) => bail!("init needs either q or law"),
    };
    let grid = uniform_grid(0.0, spec.run.t_end, grid_step);
    let ode = LfOde::new(&space, &model)?;
    let sol = ode.integrate(&p0, &grid, &ode_options(spec))?;
    let marginals = sol.marginals(&space);
    Ok((
        model,
        SolveData {
            grid,
            laws: sol.laws,
            marginals,
            space,
        },
    ))
}

pub fn run_solve(
    spec: &ExperimentSpec,
    base: &Path,
    ov: &Overrides,
    mean_field: bool,
    mlfe: bool,
) -> Result<Vec<PathBuf>> {
    let (model, data) = solve_data(spec, base, ov)?;
    std::fs::create_dir_all(&ov.out_dir)?;
    let stem = |suffix: &str| ov.out_dir.join(format!("{}_{suffix}", spec.name));
    let mut written = Vec::new();

    let p = stem("law.csv");
    law_table(&data.grid, &data.laws).write(&p)?;
    written.push(p);
    let p = stem("classes.csv");
    class_sidecar(&data.space, &model).write(&p)?;
    written.push(p);
    let p = stem("ode_marginals.csv");
    marginal_table(&model, &data.grid, &data.marginals, "probability").write(&p)?;
    written.push(p);

    if mean_field {
        let mf = mean_field_trajectory(spec, base, ov, &model, false)?;
        let p = stem("meanfield_marginals.csv");
        marginal_table(&model, &data.grid, &mf, "probability").write(&p)?;
        written.push(p);
        if model.has_complete_rate() {
            let mfc = mean_field_trajectory(spec, base, ov, &model, true)?;
            let p = stem("meanfield_complete_marginals.csv");
            marginal_table(&model, &data.grid, &mfc, "probability").write(&p)?;
            written.push(p);
        }
    }
    if mlfe {
        let (_, out) = mlfe_data(spec, base, ov)?;
        let p = stem("mlfe_marginals.csv");
        marginal_table(&model, &data.grid, &out, "probability").write(&p)?;
        written.push(p);
    }
    Ok(written)
}

fn mean_field_trajectory(
    spec: &ExperimentSpec,
    base: &Path,
    ov: &Overrides,
    model: &ModelSpec,
    complete: bool,
) -> Result<Vec<Vec<f64>>> {
    let (_, grid_step) = effective(spec, ov);
    let q = spec
        .initial_marginal(model)?
        .ok_or_else(|| anyhow!("the mean-field baseline needs init.q"))?;
    let grid = uniform_grid(0.0, spec.run.t_end, grid_step);
    let sol = if complete {
        mean_field_complete(model, &q, &grid, &ode_options(spec))?
    } else {
        mean_field_ode(model, &spec.theta(base)?, &q, &grid, &ode_options(spec))?
    };
    Ok(sol.into_iter().map(|(_, mu)| mu).collect())
}

// ---------------------------------------------------------------------
// mlfe
// ---------------------------------------------------------------------

fn mlfe_data(
    spec: &ExperimentSpec,
    base: &Path,
    ov: &Overrides,
) -> Result<(ModelSpec, Vec<Vec<f64>>)> {
    let (seed, grid_step) = effective(spec, ov);
    let model = spec.build_model()?;
    let q = spec
        .initial_marginal(&model)?
        .ok_or_else(|| anyhow!("the mlfe pipeline needs init.q"))?;
    let theta = spec.theta(base)?;
    let grid = uniform_grid(0.0, spec.run.t_end, grid_step);
    let out = mlfe_ensemble(
        &model,
        &theta,
        &q,
        None,
        &MlfeOptions {
            n_copies: spec.solver.mlfe_copies.unwrap_or(10_000),
            dt: spec.solver.mlfe_dt.unwrap_or(1e-3),
            t_end: spec.run.t_end,
            seed,
            parallel: true,
            grid,
        },
    )?;
    Ok((model, out.marginals))
}

pub fn run_mlfe(spec: &ExperimentSpec, base: &Path, ov: &Overrides) -> Result<Vec<PathBuf>> {
    let (seed, grid_step) = effective(spec, ov);
    let _ = (seed, grid_step);
    let (model, marginals) = mlfe_data(spec, base, ov)?;
    let grid = uniform_grid(0.0, spec.run.t_end, ov.grid_step.unwrap_or(spec.run.grid_step));
    std::fs::create_dir_all(&ov.out_dir)?;
    let p = ov.out_dir.join(format!("{}_mlfe_marginals.csv", spec.name));
    marginal_table(&model, &grid, &marginals, "probability").write(&p)?;
    Ok(vec![p])
}

// ---------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum::<f64>()
}

pub fn run_compare(
    spec: &ExperimentSpec,
    base: &Path,
    ov: &Overrides,
    mean_field: bool,
) -> Result<Vec<PathBuf>> {
    let (model, sim, _) = simulate_data(spec, base, ov)?;
    let (_, ode) = solve_data(spec, base, ov)?;
    assert_eq!(sim.grid, ode.grid, "pipelines share one grid by construction");
    let mf = if mean_field {
        Some(mean_field_trajectory(spec, base, ov, &model, false)?)
    } else {
        None
    };

    std::fs::create_dir_all(&ov.out_dir)?;
    let stem = |suffix: &str| ov.out_dir.join(format!("{}_{suffix}", spec.name));
    let mut written = Vec::new();

    let header: Vec<&str> = if mf.is_some() {
        vec!["time", "tv_ode", "tv_meanfield"]
    } else {
        vec!["time", "tv_ode"]
    };
    let mut table = Table::new(&header);
    for (k, &t) in sim.grid.iter().enumerate() {
        let tv_ode = tv(&sim.mean[k], &ode.marginals[k]);
        let mut row: Vec<CsvCell> = vec![t.into(), tv_ode.into()];
        if let Some(mf) = &mf {
            row.push(tv(&sim.mean[k], &mf[k]).into());
        }
        table.row(&row);
    }
    let p = stem("tv.csv");
    table.write(&p)?;
    written.push(p);

    // State-fraction overlay: simulation solid, ODE dashed.
    let mut curves: Vec<(String, Vec<(f64, f64)>, bool)> = Vec::new();
    for (si, label) in model.labels().iter().enumerate() {
        curves.push((
            format!("sim {label}"),
            sim.grid.iter().enumerate().map(|(k, &t)| (t, sim.mean[k][si])).collect(),
            false,
        ));
        curves.push((
            format!("ode {label}"),
            sim.grid
                .iter()
                .enumerate()
                .map(|(k, &t)| (t, ode.marginals[k][si]))
                .collect(),
            true,
        ));
    }
    let series: Vec<Series> = curves
        .iter()
        .map(|(label, pts, dashed)| Series {
            label: label.clone(),
            points: pts,
            dashed: *dashed,
        })
        .collect();
    let svg = line_chart(&spec.name, "time", "fraction", &series);
    let p = stem("fractions.svg");
    std::fs::write(&p, svg)?;
    written.push(p);
    Ok(written)
}
