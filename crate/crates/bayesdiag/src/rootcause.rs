//! Reduction of the global network to a minimal label-explaining subgraph.
//!
//! A genetic algorithm searches subsets of the label's ancestors, scored by
//! `F(G) = U(D,E) + L(G) - R(E)`: global explainability of the label, mean
//! local parent retention, and a hinge-squared state-count regularizer.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, VarId};
use crate::error::{Error, Result};
use crate::infoscore::uncertainty_coefficient;
use crate::structure::Dag;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GaConfig {
    /// Population survivors per generation.
    pub k: usize,
    pub max_gen: usize,
    pub patience: usize,
    /// Minimal best-fitness improvement between consecutive generations.
    pub plateau: f64,
    /// Characteristic state number: summed cardinalities below it go
    /// unpenalized.
    pub tau: f64,
    /// Regularization intensity.
    pub c: f64,
    /// Per-gene flip probability while breeding.
    pub mutation_rate: f64,
    pub seed: u64,
}

impl GaConfig {
    pub fn defaults_for_label(label_cardinality: usize, seed: u64) -> Self {
        Self {
            k: 20,
            max_gen: 100,
            patience: 10,
            plateau: 1e-6,
            tau: (3 * label_cardinality) as f64,
            c: 1e-3,
            mutation_rate: 0.05,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid("K must be >= 2"));
        }
        if self.patience < 1 {
            return Err(Error::invalid("patience must be >= 1"));
        }
        if self.plateau < 0.0 {
            return Err(Error::invalid("plateau must be >= 0"));
        }
        if self.tau < 1.0 {
            return Err(Error::invalid("tau must be >= 1"));
        }
        if self.c < 0.0 {
            return Err(Error::invalid("C must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::invalid("mutation rate must be in [0, 1]"));
        }
        Ok(())
    }
}

/// GA individual: a subset of the label's ancestor set.
#[derive(Clone, Debug, PartialEq)]
pub struct Chromosome {
    pub selected: BTreeSet<VarId>,
    pub fitness: f64,
}

/// Final label-specific subgraph.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReducedModel {
    pub dag: Dag,
    pub fitness: f64,
    pub config: GaConfig,
    /// Hash of the global model this reduction came from.
    pub provenance: String,
}

/// Summed cardinalities of the selected nodes.
pub fn state_count(ds: &Dataset, e: &BTreeSet<VarId>) -> usize {
    e.iter().map(|&v| ds.cardinality(v)).sum()
}

/// R(E) = C max(0, (states - tau) / tau)^2.
pub fn regularization(ds: &Dataset, e: &BTreeSet<VarId>, cfg: &GaConfig) -> f64 {
    let hinge = ((state_count(ds, e) as f64 - cfg.tau) / cfg.tau).max(0.0);
    cfg.c * hinge * hinge
}

/// L(G): mean over kept nodes Y of U(Y, Pi(Y) ∩ E) with Pi taken from the
/// global graph; U(Y, ∅) := 0 and empty E yields 0.
pub fn local_term(ds: &Dataset, global: &Dag, e: &BTreeSet<VarId>) -> Result<f64> {
    if e.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &y in e {
        let kept: Vec<VarId> = global
            .parent_set(y)
            .iter()
            .copied()
            .filter(|p| e.contains(p))
            .collect();
        if !kept.is_empty() {
            total += uncertainty_coefficient(ds, y, &kept)?;
        }
    }
    Ok(total / e.len() as f64)
}

/// The three fitness components (U, L, R).
pub fn fitness_components(
    ds: &Dataset,
    label: VarId,
    e: &BTreeSet<VarId>,
    global: &Dag,
    cfg: &GaConfig,
) -> Result<(f64, f64, f64)> {
    if e.is_empty() {
        return Ok((0.0, 0.0, 0.0));
    }
    let evars: Vec<VarId> = e.iter().copied().collect();
    let u = uncertainty_coefficient(ds, label, &evars)?;
    let l = local_term(ds, global, e)?;
    let r = regularization(ds, e, cfg);
    Ok((u, l, r))
}

/// F(G) = U(D,E) + L(G) - R(E); the empty selection scores 0.
pub fn fitness(
    ds: &Dataset,
    label: VarId,
    e: &BTreeSet<VarId>,
    global: &Dag,
    cfg: &GaConfig,
) -> Result<f64> {
    let (u, l, r) = fitness_components(ds, label, e, global, cfg)?;
    Ok(u + l - r)
}

/// GA run summary; `best_history` holds the best fitness per generation
/// (index 0 is the initial exhaustive-parents generation).
#[derive(Clone, Debug)]
pub struct GaReport {
    pub best: BTreeSet<VarId>,
    pub best_fitness: f64,
    pub best_history: Vec<f64>,
    pub breeding_generations: usize,
}

type Mask = Vec<bool>;

struct GaContext<'a> {
    ds: &'a Dataset,
    global: &'a Dag,
    label: VarId,
    cfg: &'a GaConfig,
    /// Sorted ancestor ids; genes index into this.
    genes: Vec<VarId>,
    memo: HashMap<Mask, f64>,
}

impl<'a> GaContext<'a> {
    fn to_set(&self, mask: &Mask) -> BTreeSet<VarId> {
        self.genes
            .iter()
            .zip(mask)
            .filter(|(_, &on)| on)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Evaluates any unseen masks in parallel and memoizes the results.
    fn score_all(&mut self, masks: &[Mask]) -> Result<()> {
        let fresh: Vec<Mask> = {
            let mut seen = BTreeSet::new();
            masks
                .iter()
                .filter(|m| !self.memo.contains_key(*m) && seen.insert((*m).clone()))
                .cloned()
                .collect()
        };
        let scored: Vec<(Mask, Result<f64>)> = fresh
            .into_par_iter()
            .map(|m| {
                let set = self
                    .genes
                    .iter()
                    .zip(&m)
                    .filter(|(_, &on)| on)
                    .map(|(&v, _)| v)
                    .collect();
                let f = fitness(self.ds, self.label, &set, self.global, self.cfg);
                (m, f)
            })
            .collect();
        for (m, f) in scored {
            self.memo.insert(m, f?);
        }
        Ok(())
    }

    fn select_fittest(&self, pool: &[Mask], k: usize) -> Vec<Mask> {
        let mut unique: Vec<Mask> = pool.to_vec();
        unique.sort();
        unique.dedup();
        unique.sort_by(|a, b| {
            self.memo[b]
                .total_cmp(&self.memo[a])
                .then_with(|| a.cmp(b))
        });
        unique.truncate(k);
        unique
    }
}

/// Runs the genetic search and returns the winning ancestor subset with the
/// per-generation history needed by the monotonicity checks.
pub fn run_ga(ds: &Dataset, global: &Dag, label: VarId, cfg: &GaConfig) -> Result<GaReport> {
    cfg.validate()?;
    if !global.labels.contains(&label) {
        return Err(Error::invalid(format!("label {label} is not a label of the model")));
    }
    let ancestors = global.ancestors(label);
    if ancestors.is_empty() {
        return Ok(GaReport {
            best: BTreeSet::new(),
            best_fitness: 0.0,
            best_history: vec![0.0],
            breeding_generations: 0,
        });
    }

    let genes: Vec<VarId> = ancestors.iter().copied().collect();
    let mut ctx = GaContext { ds, global, label, cfg, genes, memo: HashMap::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // generation 0: all nonempty combinations of the label's direct parents,
    // sampled instead of enumerated when the parent count is large
    let direct: Vec<usize> = global
        .parent_set(label)
        .iter()
        .map(|p| ctx.genes.binary_search(p).expect("parent is an ancestor"))
        .collect();
    let mut generation: Vec<Mask> = Vec::new();
    if direct.len() <= 12 {
        for combo in 1u64..(1 << direct.len()) {
            let mut mask = vec![false; ctx.genes.len()];
            for (bit, &g) in direct.iter().enumerate() {
                if combo & (1 << bit) != 0 {
                    mask[g] = true;
                }
            }
            generation.push(mask);
        }
    } else {
        while generation.len() < 1 << 12 {
            let mut mask = vec![false; ctx.genes.len()];
            let mut any = false;
            for &g in &direct {
                if rng.gen_bool(0.5) {
                    mask[g] = true;
                    any = true;
                }
            }
            if any {
                generation.push(mask);
            }
        }
    }
    ctx.score_all(&generation)?;
    let mut best = ctx.select_fittest(&generation, cfg.k);
    let mut best_fitness = ctx.memo[&best[0]];
    let mut history = vec![best_fitness];

    let mut stagnation = 0usize;
    let mut gen_number = 1usize;
    while stagnation < cfg.patience && gen_number < cfg.max_gen {
        // generation RNG split from the master seed keeps parallel fitness
        // evaluation out of the random stream
        let mut gen_rng = ChaCha8Rng::seed_from_u64(
            cfg.seed ^ (gen_number as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let mut pool = best.clone();
        for _ in 0..3 * cfg.k {
            let pa = &best[gen_rng.gen_range(0..best.len())];
            let pb = &best[gen_rng.gen_range(0..best.len())];
            pool.push(breed(pa, pb, cfg.mutation_rate, &mut gen_rng));
        }
        ctx.score_all(&pool)?;
        best = ctx.select_fittest(&pool, cfg.k);
        let new_best = ctx.memo[&best[0]];
        if new_best - best_fitness < cfg.plateau {
            stagnation += 1;
        } else {
            stagnation = 1;
        }
        best_fitness = new_best;
        history.push(best_fitness);
        gen_number += 1;
    }

    Ok(GaReport {
        best: ctx.to_set(&best[0]),
        best_fitness,
        best_history: history,
        breeding_generations: gen_number - 1,
    })
}

/// Uniform crossover plus per-gene mutation, with one guaranteed flip so a
/// child never duplicates the plain crossover. Mutation is what walks the
/// search from direct parents up into higher-order ancestors.
fn breed(pa: &Mask, pb: &Mask, mutation_rate: f64, rng: &mut ChaCha8Rng) -> Mask {
    let mut child: Mask = pa
        .iter()
        .zip(pb)
        .map(|(&a, &b)| if rng.gen_bool(0.5) { a } else { b })
        .collect();
    let mut mutated = false;
    for gene in child.iter_mut() {
        if rng.gen_bool(mutation_rate) {
            *gene = !*gene;
            mutated = true;
        }
    }
    if !mutated {
        let g = rng.gen_range(0..child.len());
        child[g] = !child[g];
    }
    child
}

/// Exhaustive-search oracle over every nonempty ancestor subset; usable when
/// the ancestor set is small.
pub fn exhaustive_best(
    ds: &Dataset,
    global: &Dag,
    label: VarId,
    cfg: &GaConfig,
) -> Result<(BTreeSet<VarId>, f64)> {
    let genes: Vec<VarId> = global.ancestors(label).iter().copied().collect();
    if genes.len() > 20 {
        return Err(Error::invalid(format!(
            "exhaustive search over {} ancestors is infeasible",
            genes.len()
        )));
    }
    let mut best = (BTreeSet::new(), 0.0f64);
    let subsets: Vec<BTreeSet<VarId>> = (1u64..(1 << genes.len()))
        .map(|combo| {
            genes
                .iter()
                .enumerate()
                .filter(|(bit, _)| combo & (1 << bit) != 0)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect();
    let scored: Vec<(BTreeSet<VarId>, f64)> = subsets
        .into_par_iter()
        .map(|set| {
            let f = fitness(ds, label, &set, global, cfg)?;
            Ok((set, f))
        })
        .collect::<Result<_>>()?;
    for (set, f) in scored {
        if f > best.1 + 1e-15 {
            best = (set, f);
        }
    }
    Ok(best)
}

fn reduced_from_selection(
    global: &Dag,
    label: VarId,
    selection: &BTreeSet<VarId>,
    fitness: f64,
    cfg: &GaConfig,
) -> ReducedModel {
    let mut keep = selection.clone();
    keep.insert(label);
    ReducedModel {
        dag: global.induced(&keep),
        fitness,
        config: cfg.clone(),
        provenance: String::new(),
    }
}

/// Runs the GA and materializes the fittest individual's induced subgraph.
/// A label without ancestors (or without any positive-fitness subset) yields
/// the trivial label-only model.
pub fn extract_root_cause(
    ds: &Dataset,
    global: &Dag,
    label: VarId,
    cfg: &GaConfig,
) -> Result<ReducedModel> {
    let report = run_ga(ds, global, label, cfg)?;
    if report.best_fitness <= 0.0 {
        return Ok(reduced_from_selection(global, label, &BTreeSet::new(), 0.0, cfg));
    }
    Ok(reduced_from_selection(global, label, &report.best, report.best_fitness, cfg))
}

/// Exhaustive variant behind the `--exhaustive` flag.
pub fn extract_root_cause_exhaustive(
    ds: &Dataset,
    global: &Dag,
    label: VarId,
    cfg: &GaConfig,
) -> Result<ReducedModel> {
    if !global.labels.contains(&label) {
        return Err(Error::invalid(format!("label {label} is not a label of the model")));
    }
    let (best, f) = exhaustive_best(ds, global, label, cfg)?;
    Ok(reduced_from_selection(global, label, &best, f, cfg))
}
