use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::models::expr::{EvalCtx, Expr};
use crate::models::{builtin, Mark, ModelSpec};

/// Declarative model document: either a builtin selected by `name` with
/// `params`, or a `custom = true` model with explicit states, jumps and
/// per-(state, jump) rate expressions.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub name: Option<String>,
    #[serde(default)]
    pub custom: bool,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Intensity transfer function for `hawkes_threshold`; only
    /// "identity" is supported.
    pub f: Option<String>,
    pub states: Option<Vec<i32>>,
    pub labels: Option<Vec<String>>,
    pub jumps: Option<Vec<i32>>,
    pub rate: Option<Vec<RateEntry>>,
    pub rate_bound: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEntry {
    pub from: i32,
    pub jump: i32,
    pub expr: String,
}

/// Parses a model config document (TOML text with the [`ModelDoc`]
/// schema at top level).
pub fn parse_model_config(text: &str) -> Result<ModelSpec> {
    let doc: ModelDoc =
        toml::from_str(text).map_err(|e| Error::Config(format!("model config: {e}")))?;
    build_model(&doc)
}

pub fn build_model(doc: &ModelDoc) -> Result<ModelSpec> {
    if doc.custom {
        return build_custom(doc);
    }
    let name = doc
        .name
        .as_deref()
        .ok_or_else(|| Error::Config("model requires `name` or `custom = true`".into()))?;
    if name == "hawkes_threshold" {
        if let Some(f) = doc.f.as_deref() {
            if f != "identity" {
                return Err(Error::Config(format!(
                    "hawkes_threshold: unsupported transfer function `{f}`"
                )));
            }
        }
    }
    builtin(name, &doc.params)
}

fn build_custom(doc: &ModelDoc) -> Result<ModelSpec> {
    let states = doc
        .states
        .clone()
        .ok_or_else(|| Error::Config("custom model requires `states`".into()))?;
    let labels = match &doc.labels {
        Some(l) => l.clone(),
        None => states.iter().map(|s| s.to_string()).collect(),
    };
    let jumps = doc
        .jumps
        .clone()
        .ok_or_else(|| Error::Config("custom model requires `jumps`".into()))?;
    let entries = doc
        .rate
        .clone()
        .ok_or_else(|| Error::Config("custom model requires `[[rate]]` entries".into()))?;

    let mut table: HashMap<(i32, i32), Expr> = HashMap::new();
    let mut edges = Vec::new();
    for entry in &entries {
        if !states.contains(&entry.from) {
            return Err(Error::Config(format!(
                "rate entry references unknown state {}",
                entry.from
            )));
        }
        if !jumps.contains(&entry.jump) {
            return Err(Error::Config(format!(
                "rate entry references undeclared jump {}",
                entry.jump
            )));
        }
        if !states.contains(&(entry.from + entry.jump)) {
            return Err(Error::Config(format!(
                "rate entry ({}, jump {}) leaves the state space",
                entry.from, entry.jump
            )));
        }
        let expr = Expr::parse(&entry.expr)?;
        let mut counted = Vec::new();
        expr.counted_states(&mut counted);
        for s in counted {
            if !states.contains(&s) {
                return Err(Error::Config(format!(
                    "rate expression counts unknown state {s}"
                )));
            }
        }
        if table
            .insert((entry.from, entry.jump), expr)
            .is_some()
        {
            return Err(Error::Config(format!(
                "duplicate rate entry for state {} jump {}",
                entry.from, entry.jump
            )));
        }
        edges.push((entry.from, entry.from + entry.jump));
    }
    edges.sort_unstable();
    edges.dedup();

    let bound_src = doc
        .rate_bound
        .as_deref()
        .ok_or_else(|| Error::Config("custom model requires `rate_bound`".into()))?;
    let bound_expr = Expr::parse(bound_src)?;
    let mut counted = Vec::new();
    bound_expr.counted_states(&mut counted);
    if !counted.is_empty() {
        return Err(Error::Config(
            "rate_bound may only depend on d and t".into(),
        ));
    }

    let rate = Arc::new(move |j: i32, t: f64, a: i32, nb: &[Mark]| -> f64 {
        let Some(expr) = table.get(&(a, j)) else {
            return 0.0;
        };
        let d = nb.iter().filter(|m| m.state().is_some()).count() as f64;
        let count = |s: i32| nb.iter().filter(|&&m| m == Mark::State(s)).count() as f64;
        expr.eval(&EvalCtx {
            t,
            a: a as f64,
            d,
            count: &count,
        })
        .max(0.0)
    });
    // `rate_bound` declares a cap on the *total* jump rate of a vertex
    // with `d` neighbors; the envelope argument is the closed
    // neighborhood size, hence the shift.
    let rate_bound = Arc::new(move |d: usize, t: f64| -> f64 {
        bound_expr
            .eval(&EvalCtx {
                t,
                a: 0.0,
                d: (d.saturating_sub(1)) as f64,
                count: &|_| 0.0,
            })
            .max(0.0)
    });

    ModelSpec::new(
        doc.name.clone().unwrap_or_else(|| "custom".into()),
        states,
        labels,
        jumps,
        edges,
        rate,
        rate_bound,
    )
}
