//! Information-theoretic and Bayesian scoring primitives.
//!
//! All quantities are in nats and estimated with maximum-likelihood
//! frequencies from the encoded dataset. BIC here is the local score
//! `sum N ln(N/N_pi) - (ln n / 2) q (r - 1)`, larger is better; BIC* is the
//! additive approximation used only to rank unexplored parent-set candidates.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use crate::dataset::{Dataset, VarId};
use crate::error::{Error, Result};

/// Joint counts of a child against the product state space of a parent set.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    pub child: VarId,
    /// Canonical (sorted) parent ids.
    pub parents: Vec<VarId>,
    /// (parent joint state, child state) -> count. Sparse: unseen
    /// configurations are absent. Ordered so float accumulations over the
    /// table are deterministic.
    pub counts: BTreeMap<(u64, u32), u64>,
    pub n: u64,
}

/// Mixed-radix joint index of `parents` values at `row`.
fn joint_state(ds: &Dataset, parents: &[VarId], row: usize) -> u64 {
    let mut idx = 0u64;
    for &p in parents {
        idx = idx * ds.cardinality(p) as u64 + ds.data[p][row] as u64;
    }
    idx
}

pub fn contingency(ds: &Dataset, child: VarId, parents: &[VarId]) -> ContingencyTable {
    let parents = canonical(parents);
    let mut counts: BTreeMap<(u64, u32), u64> = BTreeMap::new();
    let child_col = ds.column(child);
    for row in 0..ds.n_rows {
        let pi = joint_state(ds, &parents, row);
        *counts.entry((pi, child_col[row])).or_insert(0) += 1;
    }
    ContingencyTable { child, parents, counts, n: ds.n_rows as u64 }
}

fn canonical(vars: &[VarId]) -> Vec<VarId> {
    let mut v = vars.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// H(X) in nats, with 0 ln 0 := 0.
pub fn entropy(ds: &Dataset, x: VarId) -> f64 {
    conditional_entropy(ds, x, &[]).expect("empty conditioning set is always valid")
}

/// H(X|Y) = sum_y p(y) H(X|Y=y); the conditioning set enters as one joint
/// variable over its product state space. Empty set reduces to H(X).
pub fn conditional_entropy(ds: &Dataset, x: VarId, cond: &[VarId]) -> Result<f64> {
    if cond.contains(&x) {
        return Err(Error::invalid(format!(
            "variable {x} cannot appear in its own conditioning set"
        )));
    }
    let table = contingency(ds, x, cond);
    let n = table.n as f64;
    let mut group_totals: BTreeMap<u64, u64> = BTreeMap::new();
    for (&(pi, _), &c) in &table.counts {
        *group_totals.entry(pi).or_insert(0) += c;
    }
    let mut h = 0.0;
    for (&(pi, _), &c) in &table.counts {
        let n_pi = group_totals[&pi] as f64;
        let c = c as f64;
        h -= (c / n) * (c / n_pi).ln();
    }
    Ok(h.max(0.0))
}

/// I(X,Y) = H(X) - H(X|Y), tiny negative float residue clamped to 0.
pub fn mutual_information(ds: &Dataset, x: VarId, y: &[VarId]) -> Result<f64> {
    let mi = entropy(ds, x) - conditional_entropy(ds, x, y)?;
    if mi < 0.0 {
        if mi > -1e-12 {
            return Ok(0.0);
        }
        return Ok(0.0); // larger residue still means empirically zero information
    }
    Ok(mi)
}

/// U(D,E) = I(D,E)/H(D) in [0, 1]; a constant D is trivially explained (0).
pub fn uncertainty_coefficient(ds: &Dataset, d: VarId, e: &[VarId]) -> Result<f64> {
    let h = entropy(ds, d);
    if h == 0.0 {
        return Ok(0.0);
    }
    Ok((mutual_information(ds, d, e)? / h).clamp(0.0, 1.0))
}

/// Concurrent exact-BIC memo keyed by (child, canonical parent set).
/// Identical values make write races benign.
#[derive(Debug, Default)]
pub struct ScoreCache {
    map: RwLock<HashMap<(VarId, Vec<VarId>), f64>>,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, child: VarId, parents: &[VarId]) -> Option<f64> {
        let key = (child, canonical(parents));
        self.map.read().unwrap().get(&key).copied()
    }

    pub fn insert(&self, child: VarId, parents: &[VarId], score: f64) {
        let key = (child, canonical(parents));
        self.map.write().unwrap().insert(key, score);
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Exact local BIC of `x` given `parents`, cached.
pub fn bic(ds: &Dataset, x: VarId, parents: &[VarId], cache: &ScoreCache) -> Result<f64> {
    if parents.contains(&x) {
        return Err(Error::invalid(format!("variable {x} proposed as its own parent")));
    }
    if let Some(hit) = cache.get(x, parents) {
        return Ok(hit);
    }
    let table = contingency(ds, x, parents);
    let n = table.n as f64;
    let mut group_totals: BTreeMap<u64, u64> = BTreeMap::new();
    for (&(pi, _), &c) in &table.counts {
        *group_totals.entry(pi).or_insert(0) += c;
    }
    let mut log_likelihood = 0.0;
    for (&(pi, _), &c) in &table.counts {
        let c = c as f64;
        log_likelihood += c * (c / group_totals[&pi] as f64).ln();
    }
    let r = ds.cardinality(x) as f64;
    let q: f64 = table.parents.iter().map(|&p| ds.cardinality(p) as f64).product();
    let score = log_likelihood - (n.ln() / 2.0) * q * (r - 1.0);
    cache.insert(x, parents, score);
    Ok(score)
}

/// BIC*(x | s1 u s2) = BIC(x|s1) + BIC(x|s2) - BIC(x|empty), from cached
/// scores only. Ranks unexplored candidates; never stored as an exact score.
pub fn bic_star(x: VarId, s1: &[VarId], s2: &[VarId], cache: &ScoreCache) -> Result<f64> {
    if s1.iter().any(|v| s2.contains(v)) {
        return Err(Error::invalid("BIC* requires disjoint parent sets"));
    }
    let lookup = |parents: &[VarId]| {
        cache.get(x, parents).ok_or(Error::CacheMiss {
            child: x,
            parents: canonical(parents),
        })
    };
    Ok(lookup(s1)? + lookup(s2)? - lookup(&[])?)
}
