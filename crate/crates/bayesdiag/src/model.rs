use crate::dataset::{discretize, encode_with_schema, Dataset, RawTable, VarId, VarKind, Variable};
use crate::error::{Error, Result};
use crate::inference::{evaluate, fit_cpts, Cpt, MetricsReport};
use crate::rootcause::{extract_root_cause, extract_root_cause_exhaustive, GaConfig};
use crate::structure::{explore_candidates, select_parents, CandidateList, Dag, ExplorationBudget};
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Scored parent candidates for one node, as persisted in the model file.
/// Exploration bookkeeping (frontier, explored set) is not kept.
pub type CandidateEntries = Vec<(Vec<VarId>, f64)>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalModel {
    pub dataset: Dataset,
    pub schema_hash: String,
    pub n_bins: usize,
    pub budget: ExplorationBudget,
    pub seed: u64,
    pub candidates: BTreeMap<VarId, CandidateEntries>,
    pub dag: Dag,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedModelFile {
    pub variables: Vec<Variable>,
    pub schema_hash: String,
    pub label: VarId,
    pub label_name: String,
    pub dag: Dag,
    pub cpts: Vec<Cpt>,
    pub fitness: f64,
    pub config: GaConfig,
    pub alpha: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub input_hashes: BTreeMap<String, String>,
    pub output_hashes: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, u64>,
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json_pretty<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn lists_from_entries(candidates: &BTreeMap<VarId, CandidateEntries>) -> BTreeMap<VarId, CandidateList> {
    candidates
        .iter()
        .map(|(&child, entries)| {
            (
                child,
                CandidateList {
                    child,
                    entries: entries.clone(),
                    explored: Default::default(),
                    frontier: Vec::new(),
                },
            )
        })
        .collect()
}

/// Discretizes a labeled table, explores parent candidates for every node and
/// assembles the global graph.
pub fn learn_global(
    table: &RawTable,
    n_bins: usize,
    budget: &ExplorationBudget,
    seed: u64,
) -> Result<GlobalModel> {
    budget.validate()?;
    let ds = discretize(table, n_bins)?;
    ds.validate()?;
    let labels = ds.label_ids();
    if labels.is_empty() {
        return Err(Error::invalid("no label columns marked in the data"));
    }

    let cache = crate::infoscore::ScoreCache::new();
    let lists: Vec<CandidateList> = (0..ds.n_vars())
        .into_par_iter()
        .map(|x| explore_candidates(&ds, x, budget, &cache))
        .collect::<Result<_>>()?;
    let full: BTreeMap<VarId, CandidateList> =
        lists.into_iter().map(|l| (l.child, l)).collect();
    let dag = select_parents(&full, &labels, seed)?;

    let candidates = full.into_iter().map(|(k, l)| (k, l.entries)).collect();
    Ok(GlobalModel {
        schema_hash: ds.schema_hash(),
        dataset: ds,
        n_bins,
        budget: *budget,
        seed,
        candidates,
        dag,
    })
}

/// Incremental label addition: only the new node is explored; all existing
/// candidate lists are reused verbatim and parent selection re-runs with the
/// extended label frontier.
pub fn add_label(model: &GlobalModel, table: &RawTable, new_label: &str) -> Result<GlobalModel> {
    if model.dataset.var_id(new_label).is_some() {
        return Err(Error::invalid(format!("label '{new_label}' is already in the model")));
    }
    let old_vars = &model.dataset.variables;

    // rebuild the table in model column order with the new label appended
    let mut column_names = Vec::with_capacity(old_vars.len() + 1);
    let mut columns = Vec::with_capacity(old_vars.len() + 1);
    let mut label_flags = Vec::with_capacity(old_vars.len() + 1);
    for var in old_vars {
        let ci = table
            .column_names
            .iter()
            .position(|n| n == &var.name)
            .ok_or_else(|| {
                Error::SchemaMismatch(format!("column '{}' missing from data", var.name))
            })?;
        column_names.push(var.name.clone());
        columns.push(table.columns[ci].clone());
        label_flags.push(var.kind == VarKind::Label);
    }
    let new_ci = table
        .column_names
        .iter()
        .position(|n| n == new_label)
        .ok_or_else(|| Error::invalid(format!("column '{new_label}' not found in the data")))?;
    column_names.push(new_label.to_string());
    columns.push(table.columns[new_ci].clone());
    label_flags.push(true);

    let reordered = RawTable { column_names, columns, n_rows: table.n_rows, label_flags };
    let ds = discretize(&reordered, model.n_bins)?;
    if ds.variables[..old_vars.len()] != old_vars[..] {
        return Err(Error::SchemaMismatch(
            "data re-encoding does not reproduce the model schema".into(),
        ));
    }

    let new_id: VarId = old_vars.len();
    let cache = crate::infoscore::ScoreCache::new();
    let new_list = explore_candidates(&ds, new_id, &model.budget, &cache)?;

    let mut candidates = model.candidates.clone();
    candidates.insert(new_id, new_list.entries);

    let mut labels = model.dag.labels.clone();
    labels.push(new_id);
    let dag = select_parents(&lists_from_entries(&candidates), &labels, model.seed)?;

    Ok(GlobalModel {
        schema_hash: ds.schema_hash(),
        dataset: ds,
        n_bins: model.n_bins,
        budget: model.budget,
        seed: model.seed,
        candidates,
        dag,
    })
}

pub fn reduce(
    model: &GlobalModel,
    label_name: &str,
    cfg: &GaConfig,
    exhaustive: bool,
    alpha: f64,
) -> Result<ReducedModelFile> {
    let label = model
        .dataset
        .var_id(label_name)
        .ok_or_else(|| Error::invalid(format!("label '{label_name}' not in the model")))?;
    if !model.dag.labels.contains(&label) {
        return Err(Error::invalid(format!("'{label_name}' is not a label of the model")));
    }
    let reduced = if exhaustive {
        extract_root_cause_exhaustive(&model.dataset, &model.dag, label, cfg)?
    } else {
        extract_root_cause(&model.dataset, &model.dag, label, cfg)?
    };
    let cpts = fit_cpts(&model.dataset, &reduced.dag, alpha)?;
    Ok(ReducedModelFile {
        variables: model.dataset.variables.clone(),
        schema_hash: model.schema_hash.clone(),
        label,
        label_name: label_name.to_string(),
        dag: reduced.dag,
        cpts,
        fitness: reduced.fitness,
        config: reduced.config,
        alpha,
    })
}

pub fn eval_reduced(
    file: &ReducedModelFile,
    test: &RawTable,
    threshold: f64,
    hide: &[String],
) -> Result<MetricsReport> {
    let ds = encode_with_schema(test, &file.variables)?;
    let mut hide_ids = Vec::with_capacity(hide.len());
    for name in hide {
        let id = ds
            .var_id(name)
            .ok_or_else(|| Error::invalid(format!("unknown column '{name}' in --hide")))?;
        hide_ids.push(id);
    }
    evaluate(&file.cpts, &file.dag, file.label, &ds, threshold, &hide_ids)
}

/// Deterministic DOT rendering; label nodes are drawn filled.
pub fn export_dot(dag: &Dag, variables: &[Variable]) -> String {
    let name_of = |v: VarId| -> String {
        variables
            .get(v)
            .map(|var| var.name.clone())
            .unwrap_or_else(|| format!("v{v}"))
    };
    let mut out = String::from("digraph model {\n  rankdir=LR;\n");
    for &n in &dag.nodes {
        let style = if dag.labels.contains(&n) {
            " [shape=box, style=filled, fillcolor=lightgoldenrod]"
        } else {
            ""
        };
        out.push_str(&format!("  \"{}\"{};\n", name_of(n), style));
    }
    for (from, to) in dag.edges() {
        out.push_str(&format!("  \"{}\" -> \"{}\";\n", name_of(from), name_of(to)));
    }
    out.push_str("}\n");
    out
}
