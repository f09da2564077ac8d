//! Global DAG learning: budgeted per-variable parent-set exploration and
//! label-centric acyclic parent assignment.
//!
//! Exploration keeps an explored list with exact BIC scores and a frontier
//! of unexplored unions ranked by the cheap additive BIC* estimate. Parent
//! assignment grows the graph outward from the label nodes so that variables
//! close to a label pick their parents first.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, VarId};
use crate::error::{Error, Result};
use crate::infoscore::{bic, bic_star, ScoreCache};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ExplorationBudget {
    pub max_parent_set_size: usize,
    pub max_candidates_per_node: usize,
    pub max_expansions_per_node: usize,
}

impl Default for ExplorationBudget {
    fn default() -> Self {
        Self {
            max_parent_set_size: 3,
            max_candidates_per_node: 20,
            max_expansions_per_node: 500,
        }
    }
}

impl ExplorationBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_parent_set_size < 1
            || self.max_candidates_per_node < 1
            || self.max_expansions_per_node < 1
        {
            return Err(Error::invalid("all exploration budget fields must be >= 1"));
        }
        Ok(())
    }
}

/// Scored parent-set candidates for one child variable.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CandidateList {
    pub child: VarId,
    /// (parent set, exact BIC), sorted descending by score.
    pub entries: Vec<(Vec<VarId>, f64)>,
    /// Canonical parent sets already scored exactly.
    pub explored: BTreeSet<Vec<VarId>>,
    /// Unexplored unions with their BIC* estimates, left over at budget
    /// exhaustion.
    pub frontier: Vec<(Vec<VarId>, f64)>,
}

struct FrontierEntry {
    estimate: f64,
    set: Vec<VarId>,
}

impl PartialEq for FrontierEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for FrontierEntry {}
impl PartialOrd for FrontierEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FrontierEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on estimate; smaller set breaks ties for determinism
        self.estimate
            .total_cmp(&other.estimate)
            .then_with(|| other.set.cmp(&self.set))
    }
}

fn union_sorted(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut u: Vec<VarId> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

fn disjoint(a: &[VarId], b: &[VarId]) -> bool {
    a.iter().all(|v| !b.contains(v))
}

/// Explores parent-set candidates for `x` under the given budget.
///
/// The frontier starts with every singleton scored by exact BIC. Each
/// expansion pops the best frontier element, scores it exactly, moves it to
/// the explored list and pushes its unions with previously explored sets
/// ranked by BIC*. The empty set is always available as a final fallback.
pub fn explore_candidates(
    ds: &Dataset,
    x: VarId,
    budget: &ExplorationBudget,
    cache: &ScoreCache,
) -> Result<CandidateList> {
    budget.validate()?;

    let empty_score = bic(ds, x, &[], cache)?;
    let mut explored: Vec<(Vec<VarId>, f64)> = vec![(Vec::new(), empty_score)];
    let mut explored_sets: BTreeSet<Vec<VarId>> = BTreeSet::new();
    explored_sets.insert(Vec::new());

    let mut frontier = BinaryHeap::new();
    for y in 0..ds.n_vars() {
        if y == x {
            continue;
        }
        let score = bic(ds, x, &[y], cache)?;
        frontier.push(FrontierEntry { estimate: score, set: vec![y] });
    }

    let mut expansions = 0;
    while expansions < budget.max_expansions_per_node {
        let Some(FrontierEntry { set, .. }) = frontier.pop() else {
            break;
        };
        if explored_sets.contains(&set) {
            continue;
        }
        let score = bic(ds, x, &set, cache)?;
        explored_sets.insert(set.clone());
        expansions += 1;

        for (other, _) in &explored {
            if other.is_empty() {
                continue;
            }
            if !disjoint(&set, other) {
                continue;
            }
            let u = union_sorted(&set, other);
            if u.len() > budget.max_parent_set_size || explored_sets.contains(&u) {
                continue;
            }
            let estimate = bic_star(x, &set, other, cache)?;
            frontier.push(FrontierEntry { estimate, set: u });
        }
        explored.push((set, score));
    }

    explored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut entries: Vec<(Vec<VarId>, f64)> = explored
        .iter()
        .take(budget.max_candidates_per_node)
        .cloned()
        .collect();
    if !entries.iter().any(|(s, _)| s.is_empty()) {
        entries.push((Vec::new(), empty_score));
    }

    let leftover: Vec<(Vec<VarId>, f64)> = frontier
        .into_sorted_vec()
        .into_iter()
        .rev()
        .filter(|e| !explored_sets.contains(&e.set))
        .map(|e| (e.set, e.estimate))
        .collect();

    Ok(CandidateList {
        child: x,
        entries,
        explored: explored_sets,
        frontier: leftover,
    })
}

/// Learned global network as per-node parent sets.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Dag {
    pub nodes: Vec<VarId>,
    pub parents: BTreeMap<VarId, Vec<VarId>>,
    pub labels: Vec<VarId>,
    pub seed: u64,
}

impl Dag {
    pub fn parent_set(&self, node: VarId) -> &[VarId] {
        self.parents.get(&node).map_or(&[], |p| p.as_slice())
    }

    /// True when `a` is an ancestor of `b` (directed path a -> ... -> b).
    pub fn is_ancestor(&self, a: VarId, b: VarId) -> bool {
        is_ancestor_in(&self.parents, a, b)
    }

    pub fn ancestors(&self, node: VarId) -> BTreeSet<VarId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<VarId> = self.parent_set(node).to_vec();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend_from_slice(self.parent_set(v));
            }
        }
        seen
    }

    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        let mut edges: Vec<(VarId, VarId)> = self
            .parents
            .iter()
            .flat_map(|(&child, ps)| ps.iter().map(move |&p| (p, child)))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Subgraph on `keep`, retaining only edges between kept nodes.
    pub fn induced(&self, keep: &BTreeSet<VarId>) -> Dag {
        let nodes: Vec<VarId> = self.nodes.iter().copied().filter(|n| keep.contains(n)).collect();
        let parents = nodes
            .iter()
            .map(|&n| {
                let ps = self
                    .parent_set(n)
                    .iter()
                    .copied()
                    .filter(|p| keep.contains(p))
                    .collect();
                (n, ps)
            })
            .collect();
        let labels = self.labels.iter().copied().filter(|l| keep.contains(l)).collect();
        Dag { nodes, parents, labels, seed: self.seed }
    }
}

fn is_ancestor_in(parents: &BTreeMap<VarId, Vec<VarId>>, a: VarId, b: VarId) -> bool {
    // walk up from b through assigned parent edges
    let mut seen = HashSet::new();
    let mut stack = vec![b];
    while let Some(v) = stack.pop() {
        if let Some(ps) = parents.get(&v) {
            for &p in ps {
                if p == a {
                    return true;
                }
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
    }
    false
}

/// One parent-set assignment, in order, with the node's BFS distance from
/// the label frontier (`None` for nodes unreached from any label).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentEvent {
    pub node: VarId,
    pub depth: Option<usize>,
    pub parents: Vec<VarId>,
}

/// Label-centric acyclic parent assignment with an assignment trace.
pub fn select_parents_traced(
    candidates: &BTreeMap<VarId, CandidateList>,
    labels: &[VarId],
    seed: u64,
) -> Result<(Dag, Vec<AssignmentEvent>)> {
    for list in candidates.values() {
        for (set, _) in &list.entries {
            for node in set {
                if !candidates.contains_key(node) {
                    return Err(Error::invalid(format!(
                        "candidate for {} references node {node} without a candidate list",
                        list.child
                    )));
                }
            }
        }
    }
    for label in labels {
        if !candidates.contains_key(label) {
            return Err(Error::invalid(format!("label {label} has no candidate list")));
        }
    }

    let mut assigned: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
    let mut depth: BTreeMap<VarId, usize> = BTreeMap::new();
    let mut open: VecDeque<VarId> = VecDeque::new();
    let mut queued: HashSet<VarId> = HashSet::new();
    let mut trace = Vec::new();

    for &label in labels {
        if queued.insert(label) {
            depth.insert(label, 0);
            open.push_back(label);
        }
    }

    let accept = |x: VarId,
                      assigned: &mut BTreeMap<VarId, Vec<VarId>>|
     -> Vec<VarId> {
        let list = &candidates[&x];
        for (set, _) in &list.entries {
            // acyclicity gate: x must not already be an ancestor of any
            // member of the candidate
            if set.iter().all(|&c| !is_ancestor_in(assigned, x, c)) {
                assigned.insert(x, set.clone());
                return set.clone();
            }
        }
        assigned.insert(x, Vec::new());
        Vec::new()
    };

    while let Some(x) = open.pop_front() {
        if assigned.contains_key(&x) {
            continue;
        }
        let chosen = accept(x, &mut assigned);
        let d = depth[&x];
        trace.push(AssignmentEvent { node: x, depth: Some(d), parents: chosen.clone() });
        // members of the accepted set join the open list in the set's
        // canonical order, forming the next BFS layer
        for &m in &chosen {
            if !assigned.contains_key(&m) && queued.insert(m) {
                depth.insert(m, d + 1);
                open.push_back(m);
            }
        }
    }

    // nodes never reached from a label pick in seeded-random order
    let mut remaining: Vec<VarId> = candidates
        .keys()
        .copied()
        .filter(|n| !assigned.contains_key(n))
        .collect();
    remaining.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for x in remaining {
        let chosen = accept(x, &mut assigned);
        trace.push(AssignmentEvent { node: x, depth: None, parents: chosen });
    }

    let dag = Dag {
        nodes: candidates.keys().copied().collect(),
        parents: assigned,
        labels: labels.to_vec(),
        seed,
    };
    debug_assert!(topological_order(&dag).is_ok());
    Ok((dag, trace))
}

pub fn select_parents(
    candidates: &BTreeMap<VarId, CandidateList>,
    labels: &[VarId],
    seed: u64,
) -> Result<Dag> {
    select_parents_traced(candidates, labels, seed).map(|(dag, _)| dag)
}

/// Kahn's algorithm with min-id tie-breaking; errors on a cycle.
pub fn topological_order(g: &Dag) -> Result<Vec<VarId>> {
    let mut missing: BTreeMap<VarId, usize> = g
        .nodes
        .iter()
        .map(|&n| (n, g.parent_set(n).len()))
        .collect();
    let mut children: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
    for (&child, ps) in &g.parents {
        for &p in ps {
            children.entry(p).or_default().push(child);
        }
    }
    let mut ready: BTreeSet<VarId> = missing
        .iter()
        .filter(|(_, &m)| m == 0)
        .map(|(&n, _)| n)
        .collect();
    let mut order = Vec::with_capacity(g.nodes.len());
    while let Some(&n) = ready.iter().next() {
        ready.remove(&n);
        order.push(n);
        for &c in children.get(&n).map_or(&[][..], |v| v) {
            let m = missing.get_mut(&c).unwrap();
            *m -= 1;
            if *m == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() != g.nodes.len() {
        return Err(Error::CycleDetected);
    }
    Ok(order)
}
