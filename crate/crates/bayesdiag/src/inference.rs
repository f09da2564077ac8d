//! CPT estimation, exact inference by variable elimination, classification
//! and diagnosis metrics.
//!
//! Hidden variables (the sequential-failure mechanism) are handled by the
//! elimination pass itself: any non-query variable without evidence is
//! summed out through its learned conditional distribution.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, VarId};
use crate::error::{Error, Result};
use crate::structure::Dag;

/// Conditional probability table for one node. Rows are indexed by the
/// mixed-radix joint state of `parents` (in stored order), each row a
/// probability vector over the node's states.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Cpt {
    pub node: VarId,
    pub parents: Vec<VarId>,
    pub parent_cards: Vec<usize>,
    pub cardinality: usize,
    pub table: Vec<Vec<f64>>,
    pub alpha: f64,
}

/// Observed states; unmapped variables are hidden.
pub type Evidence = BTreeMap<VarId, u32>;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MetricsReport {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub f1: f64,
}

impl MetricsReport {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| {
            if den == 0 { 0.0 } else { num as f64 / den as f64 }
        };
        let precision = ratio(tp, tp + fp);
        let sensitivity = ratio(tp, tp + fn_);
        let specificity = ratio(tn, tn + fp);
        let f1 = if precision + sensitivity == 0.0 {
            0.0
        } else {
            2.0 * precision * sensitivity / (precision + sensitivity)
        };
        Self { tp, fp, tn, fn_, precision, sensitivity, specificity, f1 }
    }

    pub fn render_table(&self) -> String {
        format!(
            "metric       value\n\
             precision    {:.4}\n\
             sensitivity  {:.4}\n\
             specificity  {:.4}\n\
             f1           {:.4}\n\
             tp/fp/tn/fn  {}/{}/{}/{}\n",
            self.precision, self.sensitivity, self.specificity, self.f1,
            self.tp, self.fp, self.tn, self.fn_
        )
    }
}

/// P(x | pi) = (N_{pi,x} + alpha) / (N_pi + alpha r); unseen parent
/// configurations fall back to the uniform vector.
pub fn fit_cpts(ds: &Dataset, g: &Dag, alpha: f64) -> Result<Vec<Cpt>> {
    if alpha < 0.0 {
        return Err(Error::invalid("alpha must be >= 0"));
    }
    g.nodes
        .iter()
        .map(|&node| {
            if node >= ds.n_vars() {
                return Err(Error::invalid(format!("graph node {node} not in dataset")));
            }
            let parents = g.parent_set(node).to_vec();
            let parent_cards: Vec<usize> =
                parents.iter().map(|&p| ds.cardinality(p)).collect();
            let r = ds.cardinality(node);
            let q: usize = parent_cards.iter().product::<usize>().max(1);

            let mut counts = vec![vec![0u64; r]; q];
            for row in 0..ds.n_rows {
                let mut pi = 0usize;
                for (&p, &card) in parents.iter().zip(&parent_cards) {
                    pi = pi * card + ds.data[p][row] as usize;
                }
                counts[pi][ds.data[node][row] as usize] += 1;
            }

            let table = counts
                .into_iter()
                .map(|row| {
                    let n_pi: u64 = row.iter().sum();
                    if n_pi == 0 && alpha == 0.0 {
                        return vec![1.0 / r as f64; r];
                    }
                    let denom = n_pi as f64 + alpha * r as f64;
                    row.iter().map(|&c| (c as f64 + alpha) / denom).collect()
                })
                .collect();

            Ok(Cpt { node, parents, parent_cards, cardinality: r, table, alpha })
        })
        .collect()
}

/// Discrete factor over a sorted variable scope, values row-major with the
/// last variable fastest.
#[derive(Clone, Debug)]
struct Factor {
    vars: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    fn from_cpt(cpt: &Cpt) -> Factor {
        let mut vars: Vec<VarId> = cpt.parents.iter().copied().chain([cpt.node]).collect();
        let mut cards: Vec<usize> =
            cpt.parent_cards.iter().copied().chain([cpt.cardinality]).collect();
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by_key(|&i| vars[i]);
        let sorted_vars: Vec<VarId> = order.iter().map(|&i| vars[i]).collect();
        let sorted_cards: Vec<usize> = order.iter().map(|&i| cards[i]).collect();

        let size: usize = sorted_cards.iter().product();
        let mut values = vec![0.0; size];
        let mut assignment = vec![0u32; sorted_vars.len()];
        for (flat, value) in values.iter_mut().enumerate() {
            let mut rem = flat;
            for i in (0..sorted_vars.len()).rev() {
                assignment[i] = (rem % sorted_cards[i]) as u32;
                rem /= sorted_cards[i];
            }
            let mut pi = 0usize;
            for (&p, &card) in cpt.parents.iter().zip(&cpt.parent_cards) {
                let pos = sorted_vars.binary_search(&p).unwrap();
                pi = pi * card + assignment[pos] as usize;
            }
            let node_pos = sorted_vars.binary_search(&cpt.node).unwrap();
            *value = cpt.table[pi][assignment[node_pos] as usize];
        }
        vars = sorted_vars;
        cards = sorted_cards;
        Factor { vars, cards, values }
    }

    fn stride_of(&self, var: VarId) -> Option<(usize, usize)> {
        let pos = self.vars.iter().position(|&v| v == var)?;
        let stride: usize = self.cards[pos + 1..].iter().product();
        Some((pos, stride))
    }

    fn restrict(&self, var: VarId, state: u32) -> Factor {
        let Some((pos, stride)) = self.stride_of(var) else {
            return self.clone();
        };
        let card = self.cards[pos];
        let block = stride * card;
        let mut values = Vec::with_capacity(self.values.len() / card);
        for (flat, &v) in self.values.iter().enumerate() {
            if (flat % block) / stride == state as usize {
                values.push(v);
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor { vars, cards, values }
    }

    fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (i, &v) in other.vars.iter().enumerate() {
            if let Err(at) = vars.binary_search(&v) {
                vars.insert(at, v);
                cards.insert(at, other.cards[i]);
            }
        }
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0u32; vars.len()];
        for flat in 0..size {
            let mut rem = flat;
            for i in (0..vars.len()).rev() {
                assignment[i] = (rem % cards[i]) as u32;
                rem /= cards[i];
            }
            values.push(self.lookup(&vars, &assignment) * other.lookup(&vars, &assignment));
        }
        Factor { vars, cards, values }
    }

    fn lookup(&self, outer_vars: &[VarId], assignment: &[u32]) -> f64 {
        let mut flat = 0usize;
        for (i, &v) in self.vars.iter().enumerate() {
            let pos = outer_vars.binary_search(&v).unwrap();
            flat = flat * self.cards[i] + assignment[pos] as usize;
        }
        self.values[flat]
    }

    fn sum_out(&self, var: VarId) -> Factor {
        let Some((pos, stride)) = self.stride_of(var) else {
            return self.clone();
        };
        let card = self.cards[pos];
        let block = stride * card;
        let mut values = vec![0.0; self.values.len() / card];
        for (flat, &v) in self.values.iter().enumerate() {
            let out = (flat / block) * stride + flat % stride;
            values[out] += v;
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor { vars, cards, values }
    }

    fn scalar(value: f64) -> Factor {
        Factor { vars: Vec::new(), cards: Vec::new(), values: vec![value] }
    }
}

/// Min-degree elimination order over the factor-scope graph, ties by node id.
fn elimination_order(scopes: &[Vec<VarId>], hidden: &BTreeSet<VarId>) -> Vec<VarId> {
    let mut adjacency: BTreeMap<VarId, BTreeSet<VarId>> = BTreeMap::new();
    for scope in scopes {
        for &a in scope {
            adjacency.entry(a).or_default();
            for &b in scope {
                if a != b {
                    adjacency.entry(a).or_default().insert(b);
                }
            }
        }
    }
    let mut remaining: BTreeSet<VarId> = hidden.clone();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let &next = remaining
            .iter()
            .min_by_key(|&&v| {
                (
                    adjacency.get(&v).map_or(0, |n| n.len()),
                    v,
                )
            })
            .unwrap();
        // connect neighbors before removal
        let neighbors: Vec<VarId> = adjacency
            .get(&next)
            .map_or(Vec::new(), |n| n.iter().copied().collect());
        for &a in &neighbors {
            for &b in &neighbors {
                if a != b {
                    adjacency.get_mut(&a).unwrap().insert(b);
                }
            }
        }
        for &a in &neighbors {
            adjacency.get_mut(&a).unwrap().remove(&next);
        }
        adjacency.remove(&next);
        remaining.remove(&next);
        order.push(next);
    }
    order
}

/// Exact P(query | evidence) by variable elimination over the factorized
/// joint; every hidden non-query variable is marginalized out.
pub fn posterior(cpts: &[Cpt], g: &Dag, query: VarId, ev: &Evidence) -> Result<Vec<f64>> {
    if ev.contains_key(&query) {
        return Err(Error::invalid(format!("evidence placed on the query variable {query}")));
    }
    if !g.nodes.contains(&query) {
        return Err(Error::invalid(format!("query variable {query} not in the graph")));
    }
    for &v in ev.keys() {
        if !g.nodes.contains(&v) {
            return Err(Error::invalid(format!("evidence references unknown variable {v}")));
        }
    }

    let mut factors: Vec<Factor> = cpts
        .iter()
        .map(|cpt| {
            let mut f = Factor::from_cpt(cpt);
            for (&v, &state) in ev {
                f = f.restrict(v, state);
            }
            f
        })
        .collect();

    let hidden: BTreeSet<VarId> = g
        .nodes
        .iter()
        .copied()
        .filter(|v| *v != query && !ev.contains_key(v))
        .collect();
    let scopes: Vec<Vec<VarId>> = factors.iter().map(|f| f.vars.clone()).collect();
    for v in elimination_order(&scopes, &hidden) {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&v));
        let product = touching
            .into_iter()
            .fold(Factor::scalar(1.0), |acc, f| acc.product(&f));
        factors = rest;
        factors.push(product.sum_out(v));
    }

    let joint = factors
        .into_iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(&f));
    debug_assert_eq!(joint.vars, vec![query]);
    let z: f64 = joint.values.iter().sum();
    if z <= 0.0 {
        return Err(Error::invalid(
            "evidence has zero probability under the model".to_string(),
        ));
    }
    Ok(joint.values.iter().map(|&v| v / z).collect())
}

/// Thresholded positive call for binary labels, argmax (ties toward the
/// lower state) otherwise.
pub fn classify(
    cpts: &[Cpt],
    g: &Dag,
    label: VarId,
    ev: &Evidence,
    threshold: f64,
) -> Result<u32> {
    let post = posterior(cpts, g, label, ev)?;
    if post.len() == 2 {
        if !(0.0 < threshold && threshold < 1.0) {
            return Err(Error::invalid("threshold must be in (0, 1)"));
        }
        return Ok((post[1] >= threshold) as u32);
    }
    let mut best = 0usize;
    for (i, &p) in post.iter().enumerate() {
        if p > post[best] {
            best = i;
        }
    }
    Ok(best as u32)
}

/// Per-row classification with the label hidden (plus any `hide` columns),
/// against the true labels of an encoded test set.
pub fn evaluate(
    cpts: &[Cpt],
    g: &Dag,
    label: VarId,
    test: &Dataset,
    threshold: f64,
    hide: &[VarId],
) -> Result<MetricsReport> {
    if !g.nodes.contains(&label) {
        return Err(Error::invalid(format!("label {label} not in the graph")));
    }
    for cpt in cpts {
        if cpt.node >= test.n_vars() || test.cardinality(cpt.node) != cpt.cardinality {
            return Err(Error::SchemaMismatch(format!(
                "test data does not match the model schema at node {}",
                cpt.node
            )));
        }
    }
    if test.cardinality(label) != 2 {
        return Err(Error::invalid("evaluation requires a binary label"));
    }

    let observed: Vec<VarId> = g
        .nodes
        .iter()
        .copied()
        .filter(|&v| v != label && !hide.contains(&v))
        .collect();

    let outcomes: Vec<(bool, bool)> = (0..test.n_rows)
        .into_par_iter()
        .map(|row| {
            let ev: Evidence = observed.iter().map(|&v| (v, test.data[v][row])).collect();
            let pred = classify(cpts, g, label, &ev, threshold)?;
            Ok((pred == 1, test.data[label][row] == 1))
        })
        .collect::<Result<_>>()?;

    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (pred, truth) in outcomes {
        match (pred, truth) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(MetricsReport::from_counts(tp, fp, tn, fn_))
}
