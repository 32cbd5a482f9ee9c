//! Browser bindings for the selection, d-separation and recovery demos.
//! Each export wraps a plain function that returns JSON, so the same logic
//! is testable natively.

use auxsel_core::dsep::d_separated;
use auxsel_core::graph::classify_roles;
use auxsel_core::metrics::evaluate;
use auxsel_core::mixing::{forward, inverse, random_mixing, MixingKind};
use auxsel_core::scm::{random_spec, sample};
use auxsel_core::select::{select, SelectOptions, SelectionSummary};
use auxsel_core::{Dag, Error, SampleMatrix};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest sample count the recovery demo accepts.
pub const MAX_DEMO_ROWS: usize = 200_000;

#[derive(Serialize)]
struct NodeView {
    label: String,
    observed: bool,
    collider: bool,
    non_collider: bool,
}

#[derive(Serialize)]
struct SelectView {
    nodes: Vec<NodeView>,
    edges: Vec<[String; 2]>,
    selection: SelectionSummary,
}

#[derive(Serialize)]
struct RecoveryView {
    labels: Vec<String>,
    correlation: Vec<Vec<f64>>,
    permutation: Vec<usize>,
    mcc: f64,
    disentanglement: f64,
    completeness: f64,
}

fn labels(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// Roles of every node plus the explained selection.
pub fn select_json(graph_json: &str, prune: bool) -> Result<String, Error> {
    let dag = Dag::from_json(graph_json)?;
    let roles = classify_roles(&dag)?;
    let nodes = (0..dag.n())
        .map(|i| {
            let id = auxsel_core::NodeId(i);
            let r = roles.get(id);
            NodeView {
                label: dag.label(id).to_string(),
                observed: dag.is_observed(id),
                collider: r.collider,
                non_collider: r.non_collider,
            }
        })
        .collect();
    let edges = dag
        .edges()
        .iter()
        .map(|&(a, b)| [dag.labels()[a].clone(), dag.labels()[b].clone()])
        .collect();
    let report = select(&dag, SelectOptions { prune })?;
    let view = SelectView { nodes, edges, selection: report.summary(&dag, true) };
    Ok(serde_json::to_string(&view)?)
}

/// `a`, `b` and `given` are comma-separated labels.
pub fn dsep_query(graph_json: &str, a: &str, b: &str, given: &str) -> Result<bool, Error> {
    let dag = Dag::from_json(graph_json)?;
    d_separated(&dag, &dag.ids_of(&labels(a))?, &dag.ids_of(&labels(b))?, &dag.ids_of(&labels(given))?)
}

/// Simulates the graph, mixes it, and scores an estimate that blends the
/// exact inverse with the mixed observations: `(1 - alpha) * z_hat + alpha * x`.
pub fn recovery_json(graph_json: &str, seed: u64, rows: usize, alpha: f64) -> Result<String, Error> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidSpec(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !(2..=MAX_DEMO_ROWS).contains(&rows) {
        return Err(Error::InvalidSpec(format!("rows must lie in 2..={MAX_DEMO_ROWS}, got {rows}")));
    }
    let dag = Dag::from_json(graph_json)?;
    let z = sample(&random_spec(&dag, seed), rows)?;
    let kind = if dag.n() < 2 { MixingKind::SpecialOrthogonal } else { MixingKind::AdditiveCouplingStack };
    let mix = random_mixing(kind, dag.n(), seed, 3)?;
    let x = forward(&mix, &z)?;
    let z_hat = inverse(&mix, &x)?;
    let blend = z_hat.data.map(|v| (1.0 - alpha) * v) + x.data.map(|v| alpha * v);
    let estimate = SampleMatrix::new(z_hat.labels.clone(), blend)?;
    let r = evaluate(&z, &estimate)?;
    let view = RecoveryView {
        labels: r.row_labels,
        correlation: r.correlation,
        permutation: r.permutation,
        mcc: r.mcc,
        disentanglement: r.disentanglement,
        completeness: r.completeness,
    };
    Ok(serde_json::to_string(&view)?)
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = selectSources)]
pub fn select_sources(graph_json: &str, prune: bool) -> Result<String, JsError> {
    select_json(graph_json, prune).map_err(js)
}

#[wasm_bindgen(js_name = dSeparated)]
pub fn d_separated_js(graph_json: &str, a: &str, b: &str, given: &str) -> Result<bool, JsError> {
    dsep_query(graph_json, a, b, given).map_err(js)
}

#[wasm_bindgen(js_name = recoveryDemo)]
pub fn recovery_demo(graph_json: &str, seed: u32, rows: u32, alpha: f64) -> Result<String, JsError> {
    recovery_json(graph_json, seed as u64, rows as usize, alpha).map_err(js)
}
