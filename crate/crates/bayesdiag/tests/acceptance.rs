//! End-to-end acceptance suite. Each test prints one pass/fail line for its
//! criterion before asserting, so the verdicts survive in the output either way.

use bayesdiag::dataset::{encode_with_schema, load_csv, Dataset, VarId, VarKind, Variable};
use bayesdiag::infoscore::{
    bic, conditional_entropy, entropy, mutual_information, uncertainty_coefficient, ScoreCache,
};
use bayesdiag::inference::{posterior, Cpt, Evidence, MetricsReport};
use bayesdiag::model::{read_json, GlobalModel, ReducedModelFile};
use bayesdiag::rootcause::{
    extract_root_cause, extract_root_cause_exhaustive, fitness, fitness_components, run_ga,
    GaConfig,
};
use bayesdiag::structure::{
    explore_candidates, select_parents_traced, topological_order, CandidateList,
    Dag, ExplorationBudget,
};
use bayesdiag::synthgen::builtin_medical_spec;
use bayesdiag::tree::fit_constrained_tree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const BIN: &str = env!("CARGO_BIN_EXE_bayesdiag");

fn run_cli(args: &[&str]) {
    let out = Command::new(BIN).args(args).output().expect("spawn CLI");
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {detail}");
}

fn make_dataset(cols: Vec<Vec<u32>>) -> Dataset {
    let n_rows = cols[0].len();
    let variables = cols
        .iter()
        .enumerate()
        .map(|(i, col)| Variable {
            name: format!("v{i}"),
            cardinality: col.iter().max().map_or(1, |&m| m as usize + 1),
            kind: VarKind::Feature,
            bin_edges: None,
            categories: None,
            missing_code: None,
        })
        .collect();
    Dataset { variables, data: cols, n_rows }
}

// ---------------------------------------------------------------------------
// Shared medical pipeline for criteria 1 and 2
// ---------------------------------------------------------------------------

struct Pipeline {
    dir: PathBuf,
    elapsed_jaundice: Duration,
    model: GlobalModel,
    model2: GlobalModel,
    reduced_j: ReducedModelFile,
    reduced_g: ReducedModelFile,
    metrics_j: MetricsReport,
    metrics_g_hidden: MetricsReport,
}

static PIPELINE: OnceLock<Pipeline> = OnceLock::new();

fn pipeline() -> &'static Pipeline {
    PIPELINE.get_or_init(|| {
        let dir = std::env::temp_dir().join(format!("bayesdiag-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = |name: &str| dir.join(name).display().to_string();

        let t0 = Instant::now();
        run_cli(&["generate", "--out", &p("med.csv")]);
        run_cli(&[
            "learn",
            "--data", &p("med.csv"),
            "--label", "jaundice",
            "--exclude", "gilbert_syndrome",
            "--holdout", "0.2",
            "--holdout-out", &p("test.csv"),
            "--train-out", &p("train.csv"),
            "--seed", "42",
            "--out", &p("model.json"),
        ]);
        run_cli(&[
            "reduce",
            "--model", &p("model.json"),
            "--label", "jaundice",
            "--seed", "43",
            "--out", &p("reduced_j.json"),
        ]);
        run_cli(&[
            "eval",
            "--model", &p("reduced_j.json"),
            "--test", &p("test.csv"),
            "--out", &p("metrics_j.json"),
        ]);
        let elapsed_jaundice = t0.elapsed();

        run_cli(&[
            "add-label",
            "--model", &p("model.json"),
            "--data", &p("train.csv"),
            "--label", "gilbert_syndrome",
            "--out", &p("model2.json"),
        ]);
        run_cli(&[
            "reduce",
            "--model", &p("model2.json"),
            "--label", "gilbert_syndrome",
            "--seed", "44",
            "--C", "0.05",
            "--out", &p("reduced_g.json"),
        ]);
        run_cli(&[
            "eval",
            "--model", &p("reduced_g.json"),
            "--test", &p("test.csv"),
            "--hide", "jaundice",
            "--out", &p("metrics_g.json"),
        ]);

        Pipeline {
            elapsed_jaundice,
            model: read_json(dir.join("model.json")).unwrap(),
            model2: read_json(dir.join("model2.json")).unwrap(),
            reduced_j: read_json(dir.join("reduced_j.json")).unwrap(),
            reduced_g: read_json(dir.join("reduced_g.json")).unwrap(),
            metrics_j: read_json(dir.join("metrics_j.json")).unwrap(),
            metrics_g_hidden: read_json(dir.join("metrics_g.json")).unwrap(),
            dir,
        }
    })
}

#[test]
fn criterion_1_jaundice_end_to_end() {
    let p = pipeline();

    let global_ok = p.model.dag.nodes.len() >= 133 && topological_order(&p.model.dag).is_ok();
    let reduced_nodes = p.reduced_j.dag.nodes.len();

    let spec = builtin_medical_spec();
    let true_symptoms: BTreeSet<&String> = spec
        .pathologies
        .iter()
        .find(|pt| pt.name == "jaundice")
        .unwrap()
        .symptom_probs
        .keys()
        .collect();
    let features: Vec<&String> = p
        .reduced_j
        .dag
        .nodes
        .iter()
        .filter(|&&n| n != p.reduced_j.label)
        .map(|&n| &p.reduced_j.variables[n].name)
        .collect();
    let hit = features.iter().filter(|n| true_symptoms.contains(**n)).count();
    let frac = hit as f64 / features.len().max(1) as f64;

    let m = &p.metrics_j;
    let pass = global_ok
        && reduced_nodes <= 10
        && frac >= 0.80
        && m.f1 >= 0.60
        && m.specificity >= 0.97
        && p.elapsed_jaundice < Duration::from_secs(600);
    verdict(
        "CRITERION 1 (jaundice end-to-end)",
        pass,
        &format!(
            "global_nodes={}, acyclic={}, reduced_nodes={reduced_nodes}, true_symptom_frac={frac:.2}, f1={:.3}, specificity={:.4}, elapsed={:.1}s",
            p.model.dag.nodes.len(),
            global_ok,
            m.f1,
            m.specificity,
            p.elapsed_jaundice.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_sequential_failure() {
    let p = pipeline();

    let jid = p.model2.dataset.var_id("jaundice").unwrap();
    let gid = p.model2.dataset.var_id("gilbert_syndrome").unwrap();
    let ancestor_ok =
        p.reduced_g.dag.nodes.contains(&jid) && p.reduced_g.dag.is_ancestor(jid, gid);

    let bayes_f1 = p.metrics_g_hidden.f1;

    // depth-5 decision tree on the reduced features (without the hidden node)
    let train = load_csv(p.dir.join("train.csv"), &[]).unwrap();
    let test = load_csv(p.dir.join("test.csv"), &[]).unwrap();
    let train_ds = encode_with_schema(&train, &p.model2.dataset.variables).unwrap();
    let test_ds = encode_with_schema(&test, &p.model2.dataset.variables).unwrap();
    let features: Vec<VarId> = p
        .reduced_g
        .dag
        .nodes
        .iter()
        .copied()
        .filter(|&n| n != gid && n != jid)
        .collect();
    let tree = fit_constrained_tree(&train_ds, &features, gid, 5).unwrap();
    let tree_f1 = tree.evaluate(&test_ds).unwrap().f1;

    let pass = ancestor_ok && bayes_f1 >= 0.30 && (tree_f1 - bayes_f1).abs() <= 0.15;
    verdict(
        "CRITERION 2 (sequential failure)",
        pass,
        &format!(
            "jaundice_ancestor_of_gilbert={ancestor_ok}, hidden_jaundice_f1={bayes_f1:.3}, tree_f1={tree_f1:.3}"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: inference vs full-joint enumeration
// ---------------------------------------------------------------------------

fn random_network(
    n_nodes: usize,
    max_card: usize,
    rng: &mut impl Rng,
) -> (Dag, Vec<Cpt>, BTreeMap<VarId, usize>) {
    let cards: BTreeMap<VarId, usize> =
        (0..n_nodes).map(|v| (v, rng.gen_range(2..=max_card))).collect();
    let mut parents: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
    for v in 0..n_nodes {
        let mut ps = Vec::new();
        for p in 0..v {
            if ps.len() < 3 && rng.gen_bool(0.35) {
                ps.push(p);
            }
        }
        parents.insert(v, ps);
    }
    let dag = Dag { nodes: (0..n_nodes).collect(), parents, labels: vec![], seed: 0 };
    let cpts = dag
        .nodes
        .iter()
        .map(|&node| {
            let ps = dag.parent_set(node).to_vec();
            let parent_cards: Vec<usize> = ps.iter().map(|p| cards[p]).collect();
            let r = cards[&node];
            let q: usize = parent_cards.iter().product::<usize>().max(1);
            let table = (0..q)
                .map(|_| {
                    let raw: Vec<f64> = (0..r).map(|_| rng.gen_range(0.05..1.0f64)).collect();
                    let z: f64 = raw.iter().sum();
                    raw.into_iter().map(|v| v / z).collect()
                })
                .collect();
            Cpt { node, parents: ps, parent_cards, cardinality: r, table, alpha: 0.0 }
        })
        .collect();
    (dag, cpts, cards)
}

fn enumeration_posterior(
    cpts: &[Cpt],
    g: &Dag,
    query: VarId,
    ev: &Evidence,
    cards: &BTreeMap<VarId, usize>,
) -> Vec<f64> {
    let mut result = vec![0.0; cards[&query]];
    let total: usize = g.nodes.iter().map(|n| cards[n]).product();
    for flat in 0..total {
        let mut rem = flat;
        let mut assignment: BTreeMap<VarId, u32> = BTreeMap::new();
        for &n in g.nodes.iter().rev() {
            assignment.insert(n, (rem % cards[&n]) as u32);
            rem /= cards[&n];
        }
        if ev.iter().any(|(&v, &s)| assignment[&v] != s) {
            continue;
        }
        let mut p = 1.0;
        for cpt in cpts {
            let mut pi = 0usize;
            for (&par, &card) in cpt.parents.iter().zip(&cpt.parent_cards) {
                pi = pi * card + assignment[&par] as usize;
            }
            p *= cpt.table[pi][assignment[&cpt.node] as usize];
        }
        result[assignment[&query] as usize] += p;
    }
    let z: f64 = result.iter().sum();
    result.iter().map(|&v| v / z).collect()
}

#[test]
fn criterion_3_inference_oracle_suite() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0003);
    let mut max_err = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(2..=10);
        let (g, cpts, cards) = random_network(n, 4, &mut rng);
        let query = rng.gen_range(0..n);
        let mut ev = Evidence::new();
        for v in 0..n {
            if v != query && rng.gen_bool(0.3) {
                ev.insert(v, rng.gen_range(0..cards[&v]) as u32);
            }
        }
        let got = posterior(&cpts, &g, query, &ev).unwrap();
        let want = enumeration_posterior(&cpts, &g, query, &ev, &cards);
        for (a, b) in got.iter().zip(&want) {
            max_err = max_err.max((a - b).abs());
        }
    }
    let elapsed = t0.elapsed();
    let pass = max_err < 1e-9 && elapsed < Duration::from_secs(60);
    verdict(
        "CRITERION 3 (inference oracle suite)",
        pass,
        &format!("200 networks, max_abs_err={max_err:.2e}, elapsed={:.1}s", elapsed.as_secs_f64()),
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: structure-learning oracles
// ---------------------------------------------------------------------------

fn subsets_up_to(n_vars: usize, x: VarId, max_size: usize) -> Vec<Vec<VarId>> {
    let others: Vec<VarId> = (0..n_vars).filter(|&v| v != x).collect();
    let mut sets = vec![Vec::new()];
    for combo in 1u32..(1 << others.len()) {
        if (combo.count_ones() as usize) <= max_size {
            sets.push(
                others
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| combo & (1 << bit) != 0)
                    .map(|(_, &v)| v)
                    .collect(),
            );
        }
    }
    sets
}

fn random_candidates(n: usize, rng: &mut impl Rng) -> BTreeMap<VarId, CandidateList> {
    (0..n)
        .map(|x| {
            let mut entries: Vec<(Vec<VarId>, f64)> = Vec::new();
            for _ in 0..rng.gen_range(1..4) {
                let size = rng.gen_range(1..=3.min(n - 1));
                let mut set: Vec<VarId> = Vec::new();
                while set.len() < size {
                    let v = rng.gen_range(0..n);
                    if v != x && !set.contains(&v) {
                        set.push(v);
                    }
                }
                set.sort_unstable();
                entries.push((set, -rng.gen_range(0.0..10.0f64)));
            }
            entries.sort_by(|a, b| b.1.total_cmp(&a.1));
            entries.push((Vec::new(), -100.0));
            (x, CandidateList { child: x, entries, explored: BTreeSet::new(), frontier: vec![] })
        })
        .collect()
}

#[test]
fn criterion_4_structure_oracle_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);

    // exhaustive BIC agreement on 50 random 4-variable datasets
    let budget = ExplorationBudget {
        max_parent_set_size: 2,
        max_candidates_per_node: 50,
        max_expansions_per_node: 500,
    };
    let mut explore_matches = 0;
    for _ in 0..50 {
        let n_rows = rng.gen_range(30..80);
        let cols: Vec<Vec<u32>> = (0..4)
            .map(|_| {
                let card = rng.gen_range(2..=3);
                (0..n_rows).map(|_| rng.gen_range(0..card)).collect()
            })
            .collect();
        let ds = make_dataset(cols);
        let x = rng.gen_range(0..4);
        let cache = ScoreCache::new();
        let list = explore_candidates(&ds, x, &budget, &cache).unwrap();
        let mut best: Option<(Vec<VarId>, f64)> = None;
        for set in subsets_up_to(4, x, 2) {
            let score = bic(&ds, x, &set, &cache).unwrap();
            let better = match &best {
                None => true,
                Some((bs, bv)) => {
                    score > *bv || (score == *bv && set < *bs)
                }
            };
            if better {
                best = Some((set, score));
            }
        }
        let best = best.unwrap();
        if list.entries[0].0 == best.0 && (list.entries[0].1 - best.1).abs() < 1e-9 {
            explore_matches += 1;
        }
    }

    // acyclicity on 1000 random candidate-list fixtures, plus the BFS-layer
    // ordering property on every trace
    let mut acyclic = 0;
    let mut layered = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..12);
        let candidates = random_candidates(n, &mut rng);
        let labels: Vec<VarId> = vec![rng.gen_range(0..n)];
        let (dag, trace) = select_parents_traced(&candidates, &labels, rng.gen()).unwrap();
        if topological_order(&dag).is_ok() {
            acyclic += 1;
        }
        let depths: Vec<usize> = trace.iter().filter_map(|e| e.depth).collect();
        if depths.windows(2).all(|w| w[0] <= w[1]) {
            layered += 1;
        }
    }

    let pass = explore_matches == 50 && acyclic == 1000 && layered == 1000;
    verdict(
        "CRITERION 4 (structure oracle suite)",
        pass,
        &format!(
            "exhaustive_bic_matches={explore_matches}/50, acyclic={acyclic}/1000, bfs_layered={layered}/1000"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: GA optimality
// ---------------------------------------------------------------------------

fn random_ga_fixture(rng: &mut impl Rng) -> (Dataset, Dag, VarId) {
    let n_vars = rng.gen_range(5..=9);
    let n_rows = 80;
    // chain-flavored data so subsets genuinely differ in fitness
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(n_vars);
    let base: Vec<u32> = (0..n_rows).map(|_| rng.gen_range(0..2)).collect();
    cols.push(base);
    for i in 1..n_vars {
        let src = rng.gen_range(0..i);
        let noise = rng.gen_range(0.1..0.5);
        let col = (0..n_rows)
            .map(|r| {
                if rng.gen_bool(noise) {
                    rng.gen_range(0..2)
                } else {
                    cols[src][r]
                }
            })
            .collect();
        cols.push(col);
    }
    let ds = make_dataset(cols);

    // label is node 0; parents point to higher ids so every ancestor set is small
    let mut parents: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
    for v in 0..n_vars {
        let mut ps = Vec::new();
        for p in (v + 1)..n_vars {
            if ps.len() < 2 && rng.gen_bool(0.4) {
                ps.push(p);
            }
        }
        parents.insert(v, ps);
    }
    if parents[&0].is_empty() {
        parents.insert(0, vec![1]);
    }
    let dag = Dag { nodes: (0..n_vars).collect(), parents, labels: vec![0], seed: 0 };
    (ds, dag, 0)
}

#[test]
fn criterion_5_ga_optimality_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0005);
    let mut optimal = 0;
    let mut monotonic = true;
    let mut decomposition_ok = true;

    for i in 0..30 {
        let (ds, dag, label) = random_ga_fixture(&mut rng);
        let cfg = GaConfig::defaults_for_label(ds.cardinality(label), 1000 + i);

        let ga = extract_root_cause(&ds, &dag, label, &cfg).unwrap();
        let exact = extract_root_cause_exhaustive(&ds, &dag, label, &cfg).unwrap();
        if (ga.fitness - exact.fitness).abs() < 1e-9 {
            optimal += 1;
        }

        let report = run_ga(&ds, &dag, label, &cfg).unwrap();
        monotonic &= report.best_history.windows(2).all(|w| w[1] >= w[0]);

        // fitness decomposition on random subsets of the label's ancestors
        let ancestors: Vec<VarId> = dag.ancestors(label).into_iter().collect();
        for _ in 0..5 {
            let e: BTreeSet<VarId> = ancestors
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            if e.is_empty() {
                continue;
            }
            let f = fitness(&ds, label, &e, &dag, &cfg).unwrap();
            let (u, l, r) = fitness_components(&ds, label, &e, &dag, &cfg).unwrap();
            decomposition_ok &= (f - (u + l - r)).abs() < 1e-12;
        }
    }

    let pass = optimal >= 29 && monotonic && decomposition_ok;
    verdict(
        "CRITERION 5 (GA optimality suite)",
        pass,
        &format!(
            "optimal={optimal}/30, elitism_monotonic={monotonic}, decomposition_1e-12={decomposition_ok}"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: information-theory properties
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_information_theory_suite() {
    let mut ok = true;
    let mut detail = String::new();

    // exact identity/independence cases
    let ds = make_dataset(vec![
        vec![0, 0, 0, 0],             // constant
        vec![0, 1, 0, 1],             // uniform binary
        vec![0, 0, 1, 1],             // exactly independent of v1
        vec![0, 1, 2, 3],             // distinct per row
    ]);
    ok &= entropy(&ds, 0).abs() < 1e-12;
    ok &= (entropy(&ds, 1) - (2.0f64).ln()).abs() < 1e-12;
    ok &= (entropy(&ds, 3) - (4.0f64).ln()).abs() < 1e-12;
    ok &= mutual_information(&ds, 1, &[2]).unwrap().abs() < 1e-12;
    // v3 is distinct per row, so it determines v1 exactly: U must be 1.
    ok &= (uncertainty_coefficient(&ds, 1, &[3]).unwrap() - 1.0).abs() < 1e-12;
    ok &= uncertainty_coefficient(&ds, 1, &[1]).is_err();
    ok &= uncertainty_coefficient(&ds, 0, &[1]).unwrap().abs() < 1e-12;
    if !ok {
        detail.push_str("exact cases failed; ");
    }

    // bounds + superset monotonicity on 100 random tables
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    let mut bounds_ok = true;
    let mut monotone_ok = true;
    for _ in 0..100 {
        let n_rows = rng.gen_range(20..100);
        let n_vars = rng.gen_range(3..6);
        let cols: Vec<Vec<u32>> = (0..n_vars)
            .map(|_| {
                let card = rng.gen_range(2..4);
                (0..n_rows).map(|_| rng.gen_range(0..card)).collect()
            })
            .collect();
        let ds = make_dataset(cols);
        let d = 0;
        let e1 = vec![1];
        let e2 = vec![1, 2];

        for x in 0..n_vars {
            let h = entropy(&ds, x);
            bounds_ok &= h >= 0.0 && h <= (ds.cardinality(x) as f64).ln() + 1e-12;
            if x != d {
                let u = uncertainty_coefficient(&ds, d, &[x]).unwrap();
                bounds_ok &= (0.0..=1.0 + 1e-12).contains(&u);
                bounds_ok &= mutual_information(&ds, d, &[x]).unwrap() >= -1e-12;
                bounds_ok &=
                    conditional_entropy(&ds, d, &[x]).unwrap() <= entropy(&ds, d) + 1e-12;
            }
        }
        let u1 = uncertainty_coefficient(&ds, d, &e1).unwrap();
        let u2 = uncertainty_coefficient(&ds, d, &e2).unwrap();
        monotone_ok &= u2 >= u1 - 1e-12;
    }
    ok &= bounds_ok && monotone_ok;

    verdict(
        "CRITERION 6 (information-theory suite)",
        ok,
        &format!("{detail}bounds_ok={bounds_ok}, superset_monotone={monotone_ok}"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: reproducibility
// ---------------------------------------------------------------------------

fn small_spec_json() -> String {
    serde_json::json!({
        "symptoms": (1..=10).map(|i| format!("s{i}")).collect::<Vec<_>>(),
        "pathologies": [
            {"name": "alpha", "patients_per_pathology": 120,
             "symptom_probs": {"s1": 0.8, "s2": 0.7, "s3": 0.6}},
            {"name": "beta", "patients_per_pathology": 120,
             "symptom_probs": {"s4": 0.8, "s5": 0.7}},
            {"name": "gamma", "patients_per_pathology": 120,
             "symptom_probs": {"s6": 0.7, "s7": 0.6},
             "depends_on": {"pathology": "alpha",
                            "prob_given_present": 0.6, "prob_given_absent": 0.05}}
        ],
        "labels": ["alpha", "gamma"],
        "baseline_noise": 0.02,
        "seed": 77
    })
    .to_string()
}

fn run_small_pipeline(dir: &Path, spec_path: &Path) -> BTreeMap<String, String> {
    std::fs::create_dir_all(dir).unwrap();
    let p = |name: &str| dir.join(name).display().to_string();
    let sp = spec_path.display().to_string();
    run_cli(&["generate", "--spec", &sp, "--out", &p("data.csv")]);
    run_cli(&[
        "learn",
        "--data", &p("data.csv"),
        "--label", "alpha",
        "--exclude", "gamma",
        "--seed", "5",
        "--out", &p("model.json"),
    ]);
    run_cli(&[
        "reduce",
        "--model", &p("model.json"),
        "--label", "alpha",
        "--seed", "6",
        "--out", &p("reduced.json"),
    ]);
    run_cli(&[
        "add-label",
        "--model", &p("model.json"),
        "--data", &p("data.csv"),
        "--label", "gamma",
        "--out", &p("model2.json"),
    ]);
    run_cli(&["export-dot", "--model", &p("model2.json"), "--out", &p("graph.dot")]);

    ["data.csv", "model.json", "reduced.json", "model2.json", "graph.dot"]
        .iter()
        .map(|name| {
            (name.to_string(), bayesdiag::model::sha256_file(dir.join(name)).unwrap())
        })
        .collect()
}

#[test]
fn criterion_7_reproducibility() {
    let base = std::env::temp_dir().join(format!("bayesdiag-repro-{}", std::process::id()));
    std::fs::create_dir_all(&base).unwrap();
    let spec_path = base.join("spec.json");
    std::fs::write(&spec_path, small_spec_json()).unwrap();

    let hashes_a = run_small_pipeline(&base.join("a"), &spec_path);
    let hashes_b = run_small_pipeline(&base.join("b"), &spec_path);
    let identical = hashes_a == hashes_b;

    // add-label must leave the pre-existing candidate caches untouched
    let before: GlobalModel = read_json(base.join("a/model.json")).unwrap();
    let after: GlobalModel = read_json(base.join("a/model2.json")).unwrap();
    let caches_intact = before.candidates.iter().all(|(child, entries)| {
        serde_json::to_string(&after.candidates[child]).unwrap()
            == serde_json::to_string(entries).unwrap()
    });

    let pass = identical && caches_intact;
    verdict(
        "CRITERION 7 (reproducibility)",
        pass,
        &format!("artifacts_byte_identical={identical}, candidate_caches_intact={caches_intact}"),
    );
    let _ = std::fs::remove_dir_all(&base);
}
