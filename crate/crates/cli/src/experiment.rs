//! The experiment document: one TOML file describing a model, a graph
//! source, an initial law and run parameters.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use netdyn::graphs::{DegreeDistribution, Graph};
use netdyn::models::{build_model, ModelDoc, ModelSpec};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema_version: u32,
    /// Stem for every emitted file.
    pub name: String,
    pub model: ModelDoc,
    pub graph: GraphSection,
    pub init: InitSection,
    pub run: RunSection,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    /// Degree distribution, keyed by degree. Combined with `n` this is
    /// a configuration-model source; alone it still defines θ for the
    /// ODE side.
    pub theta: Option<BTreeMap<String, f64>>,
    pub n: Option<usize>,
    /// Explicit degree sequence.
    pub degrees: Option<Vec<usize>>,
    /// Path to an edge-list file ("n m" then "u v" lines), relative to
    /// the experiment file.
    pub edge_list: Option<String>,
    /// Configuration-model matching mode: "reject" (default) or "erase".
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    /// I.i.d. marginal keyed by state label.
    pub q: Option<BTreeMap<String, f64>>,
    /// Explicit law in the canonical class basis (representative
    /// values), indexed like the enumerated configuration space.
    pub law: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    pub grid_step: f64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Seeds are always explicit; there is no wall-clock fallback.
    pub seed: u64,
}

fn default_replicas() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    /// Ensemble size for the `mlfe` pipeline.
    pub mlfe_copies: Option<usize>,
    /// Euler step for the `mlfe` pipeline.
    pub mlfe_dt: Option<f64>,
}

/// Where the finite graph comes from (the θ-only form supports solve
/// and mlfe but not simulation).
#[derive(Debug, Clone)]
pub enum GraphSource {
    ConfigurationModel {
        theta: DegreeDistribution,
        n: usize,
        erase: bool,
    },
    DegreeSequence(Vec<usize>),
    EdgeList(Graph),
    ThetaOnly(DegreeDistribution),
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<ExperimentSpec> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let spec: ExperimentSpec = toml::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        if spec.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (this build reads {})",
                spec.schema_version,
                SCHEMA_VERSION
            );
        }
        if spec.run.t_end <= 0.0 {
            bail!("run.t_end must be positive");
        }
        if spec.run.grid_step <= 0.0 {
            bail!("run.grid_step must be positive");
        }
        if spec.run.replicas == 0 {
            bail!("run.replicas must be at least 1");
        }
        Ok(spec)
    }

    pub fn build_model(&self) -> Result<ModelSpec> {
        Ok(build_model(&self.model)?)
    }

    fn parse_theta(&self) -> Result<Option<DegreeDistribution>> {
        let Some(raw) = &self.graph.theta else {
            return Ok(None);
        };
        let mut pairs = Vec::new();
        for (k, &p) in raw {
            let degree: usize = k
                .parse()
                .with_context(|| format!("graph.theta key `{k}` is not a degree"))?;
            pairs.push((degree, p));
        }
        Ok(Some(DegreeDistribution::new(pairs)?))
    }

    /// Resolves the graph section, loading edge-list files relative to
    /// `base` (the directory of the experiment file).
    pub fn graph_source(&self, base: &Path) -> Result<GraphSource> {
        let g = &self.graph;
        let theta = self.parse_theta()?;
        let given = [
            theta.is_some(),
            g.degrees.is_some(),
            g.edge_list.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            bail!("graph section needs exactly one of `theta`, `degrees`, `edge_list`");
        }
        let erase = match g.mode.as_deref() {
            None | Some("reject") => false,
            Some("erase") => true,
            Some(other) => bail!("graph.mode `{other}` is neither `reject` nor `erase`"),
        };
        if let Some(theta) = theta {
            return Ok(match g.n {
                Some(n) => GraphSource::ConfigurationModel { theta, n, erase },
                None => GraphSource::ThetaOnly(theta),
            });
        }
        if let Some(degrees) = &g.degrees {
            return Ok(GraphSource::DegreeSequence(degrees.clone()));
        }
        let rel = g.edge_list.as_ref().unwrap();
        let path = base.join(rel);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading edge list {}", path.display()))?;
        Ok(GraphSource::EdgeList(Graph::from_edge_list(&text)?))
    }

    /// θ for the ODE side, derived from whatever graph source is given.
    pub fn theta(&self, base: &Path) -> Result<DegreeDistribution> {
        Ok(match self.graph_source(base)? {
            GraphSource::ConfigurationModel { theta, .. } | GraphSource::ThetaOnly(theta) => theta,
            GraphSource::DegreeSequence(degrees) => {
                let n = degrees.len() as f64;
                let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
                for &d in &degrees {
                    *counts.entry(d).or_default() += 1.0 / n;
                }
                DegreeDistribution::new(counts)?
            }
            GraphSource::EdgeList(graph) => graph.empirical_degree_distribution()?,
        })
    }

    /// The i.i.d. initial marginal over `model.states()`, when given.
    pub fn initial_marginal(&self, model: &ModelSpec) -> Result<Option<Vec<f64>>> {
        let Some(q) = &self.init.q else {
            return Ok(None);
        };
        let mut out = vec![0.0; model.m()];
        for (label, &p) in q {
            let code = model
                .code_of_label(label)
                .with_context(|| format!("init.q has unknown state label `{label}`"))?;
            out[model.state_index(code).unwrap()] = p;
        }
        let mass: f64 = out.iter().sum();
        if (mass - 1.0).abs() > 1e-9 || out.iter().any(|&v| v < 0.0) {
            bail!("init.q must be a probability vector over the state labels");
        }
        Ok(Some(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"
schema_version = 1
name = "sir_3reg"

[model]
name = "sir"
[model.params]
beta = 1.0
gamma = 0.5

[graph]
n = 100
[graph.theta]
3 = 1.0

[init]
[init.q]
S = 0.9
I = 0.1

[run]
t_end = 5.0
grid_step = 0.25
replicas = 10
seed = 7
"#;

    #[test]
    fn parses_a_full_document() {
        let spec: ExperimentSpec = toml::from_str(DOC).unwrap();
        assert_eq!(spec.name, "sir_3reg");
        let model = spec.build_model().unwrap();
        let q = spec.initial_marginal(&model).unwrap().unwrap();
        assert_eq!(q, vec![0.9, 0.1, 0.0]);
        match spec.graph_source(Path::new(".")).unwrap() {
            GraphSource::ConfigurationModel { n, erase, .. } => {
                assert_eq!(n, 100);
                assert!(!erase);
            }
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let text = DOC.replace("schema_version = 1", "schema_version = 99");
        let dir = std::env::temp_dir().join("netdyn-spec-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.toml");
        std::fs::write(&path, text).unwrap();
        assert!(ExperimentSpec::load(&path).is_err());
    }

    #[test]
    fn rejects_ambiguous_graph_sources() {
        let text = DOC.replace("[graph]", "[graph]\ndegrees = [3, 3]");
        let spec: ExperimentSpec = toml::from_str(&text).unwrap();
        assert!(spec.graph_source(Path::new(".")).is_err());
    }
}
