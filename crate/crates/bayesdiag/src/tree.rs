use crate::dataset::{Dataset, VarId};
use crate::error::{Error, Result};
use crate::inference::MetricsReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub enum TreeNode {
    Leaf {
        prediction: u32,
    },
    Split {
        var: VarId,
        // one child per state of `var`; unseen states fall back to `majority`
        children: Vec<TreeNode>,
        majority: u32,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub label: VarId,
    pub features: Vec<VarId>,
    pub max_depth: usize,
}

fn entropy_of_counts(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / nf;
            -p * p.ln()
        })
        .sum()
}

fn label_counts(ds: &Dataset, label: VarId, rows: &[usize]) -> Vec<u64> {
    let col = ds.column(label);
    let mut counts = vec![0u64; ds.cardinality(label) as usize];
    for &r in rows {
        counts[col[r] as usize] += 1;
    }
    counts
}

fn majority_state(counts: &[u64]) -> u32 {
    let mut best = 0usize;
    for (s, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = s;
        }
    }
    best as u32
}

fn build(
    ds: &Dataset,
    features: &[VarId],
    label: VarId,
    rows: &[usize],
    depth: usize,
    max_depth: usize,
) -> TreeNode {
    let counts = label_counts(ds, label, rows);
    let majority = majority_state(&counts);
    let h = entropy_of_counts(&counts);
    if depth >= max_depth || h <= 0.0 || rows.is_empty() {
        return TreeNode::Leaf { prediction: majority };
    }

    let n = rows.len() as f64;
    let mut best: Option<(VarId, f64)> = None;
    for &f in features {
        let col = ds.column(f);
        let card = ds.cardinality(f) as usize;
        let lcard = ds.cardinality(label) as usize;
        let mut branch = vec![vec![0u64; lcard]; card];
        for &r in rows {
            branch[col[r] as usize][ds.column(label)[r] as usize] += 1;
        }
        let cond: f64 = branch
            .iter()
            .map(|b| {
                let nb: u64 = b.iter().sum();
                (nb as f64 / n) * entropy_of_counts(b)
            })
            .sum();
        let gain = h - cond;
        let better = match best {
            None => true,
            Some((bf, bg)) => gain > bg + 1e-12 || (gain > bg - 1e-12 && f < bf),
        };
        if better {
            best = Some((f, gain));
        }
    }

    let (var, gain) = match best {
        Some(b) => b,
        None => return TreeNode::Leaf { prediction: majority },
    };
    if gain <= 1e-12 {
        return TreeNode::Leaf { prediction: majority };
    }

    let col = ds.column(var);
    let card = ds.cardinality(var) as usize;
    let mut partitions: Vec<Vec<usize>> = vec![Vec::new(); card];
    for &r in rows {
        partitions[col[r] as usize].push(r);
    }
    let remaining: Vec<VarId> = features.iter().copied().filter(|&f| f != var).collect();
    let children = partitions
        .iter()
        .map(|part| {
            if part.is_empty() {
                TreeNode::Leaf { prediction: majority }
            } else {
                build(ds, &remaining, label, part, depth + 1, max_depth)
            }
        })
        .collect();
    TreeNode::Split {
        var,
        children,
        majority,
    }
}

pub fn fit_constrained_tree(
    ds: &Dataset,
    features: &[VarId],
    label: VarId,
    max_depth: usize,
) -> Result<DecisionTree> {
    if features.is_empty() {
        return Err(Error::invalid("decision tree requires a non-empty feature set"));
    }
    if max_depth == 0 {
        return Err(Error::invalid("max_depth must be at least 1"));
    }
    if features.contains(&label) {
        return Err(Error::invalid("label cannot appear in the feature set"));
    }
    let mut feats: Vec<VarId> = features.to_vec();
    feats.sort_unstable();
    feats.dedup();
    for &f in &feats {
        if f >= ds.variables.len() {
            return Err(Error::invalid(format!("unknown feature node {f}")));
        }
    }
    let rows: Vec<usize> = (0..ds.n_rows).collect();
    let root = build(ds, &feats, label, &rows, 0, max_depth);
    Ok(DecisionTree {
        root,
        label,
        features: feats,
        max_depth,
    })
}

impl DecisionTree {
    /// `row` holds one value per dataset variable, indexed by VarId.
    pub fn predict(&self, row: &[u32]) -> u32 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { prediction } => return *prediction,
                TreeNode::Split {
                    var,
                    children,
                    majority,
                } => {
                    let v = row[*var] as usize;
                    if v < children.len() {
                        node = &children[v];
                    } else {
                        return *majority;
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { children, .. } => {
                    1 + children.iter().map(d).max().unwrap_or(0)
                }
            }
        }
        d(&self.root)
    }

    pub fn training_accuracy(&self, ds: &Dataset) -> f64 {
        if ds.n_rows == 0 {
            return 0.0;
        }
        let mut correct = 0usize;
        let mut row = vec![0u32; ds.variables.len()];
        for r in 0..ds.n_rows {
            for (i, col) in ds.data.iter().enumerate() {
                row[i] = col[r];
            }
            if self.predict(&row) == ds.column(self.label)[r] {
                correct += 1;
            }
        }
        correct as f64 / ds.n_rows as f64
    }

    pub fn evaluate(&self, test: &Dataset) -> Result<MetricsReport> {
        if test.cardinality(self.label) != 2 {
            return Err(Error::invalid(
                "tree evaluation requires a binary label",
            ));
        }
        let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
        let mut row = vec![0u32; test.variables.len()];
        for r in 0..test.n_rows {
            for (i, col) in test.data.iter().enumerate() {
                row[i] = col[r];
            }
            let pred = self.predict(&row);
            let truth = test.column(self.label)[r];
            match (pred, truth) {
                (1, 1) => tp += 1,
                (1, 0) => fp += 1,
                (0, 0) => tn += 1,
                (0, 1) => fn_ += 1,
                _ => return Err(Error::invalid("non-binary prediction or label value")),
            }
        }
        Ok(MetricsReport::from_counts(tp, fp, tn, fn_))
    }
}
