use bayesdiag::dataset::{load_csv, stratified_split};
use bayesdiag::error::{Error, Result};
use bayesdiag::model::{
    add_label, eval_reduced, export_dot, learn_global, read_json, reduce, sha256_file, write_json,
    write_json_pretty, GlobalModel, ReducedModelFile, RunManifest,
};
use bayesdiag::rootcause::GaConfig;
use bayesdiag::structure::ExplorationBudget;
use bayesdiag::synthgen::{builtin_medical_spec, generate, load_spec};
use clap::{Args, Parser, Subcommand};
use rand::RngCore;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "bayesdiag", version, about = "Bayesian network diagnosis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic diagnosis dataset as CSV
    Generate(GenerateArgs),
    /// Learn a global network from a labeled CSV
    Learn(LearnArgs),
    /// Extract a reduced root-cause model for one label
    Reduce(ReduceArgs),
    /// Evaluate a reduced model on a test CSV
    Eval(EvalArgs),
    /// Render a model as a DOT graph
    ExportDot(ExportDotArgs),
    /// Add a new label to an existing model incrementally
    AddLabel(AddLabelArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec JSON; the built-in medical spec when omitted
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    data: PathBuf,
    /// Label column(s); repeatable
    #[arg(long = "label", required = true)]
    labels: Vec<String>,
    /// Column(s) to drop before learning; repeatable
    #[arg(long = "exclude")]
    excludes: Vec<String>,
    /// Quantile bins for numeric columns
    #[arg(long, default_value_t = 3)]
    bins: usize,
    #[arg(long, default_value_t = 3)]
    max_parents: usize,
    #[arg(long, default_value_t = 20)]
    max_candidates: usize,
    #[arg(long, default_value_t = 500)]
    max_expansions: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Held-out test fraction (stratified by the joint labels)
    #[arg(long)]
    holdout: Option<f64>,
    /// Where to write the held-out rows as CSV
    #[arg(long)]
    holdout_out: Option<PathBuf>,
    /// Where to write the training rows as CSV (all columns, before --exclude)
    #[arg(long)]
    train_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    label: String,
    /// Elite population size
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    max_gen: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    plateau: Option<f64>,
    /// State-count budget before regularization kicks in
    #[arg(long)]
    tau: Option<f64>,
    /// Regularization strength
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    /// Exhaustive subset search instead of the genetic algorithm
    #[arg(long)]
    exhaustive: bool,
    /// Laplace smoothing for the fitted CPTs
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Column(s) treated as unobservable during inference; repeatable
    #[arg(long = "hide")]
    hide: Vec<String>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Optional metrics JSON output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportDotArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AddLabelArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label: String,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s = rand::thread_rng().next_u64();
            println!("seed: {s}");
            s
        }
    }
}

fn init_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<()> {
    write_json_pretty(manifest_path(out), manifest)
}

fn base_manifest(config: serde_json::Value) -> RunManifest {
    RunManifest { command: std::env::args().collect(), config, ..Default::default() }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let t0 = Instant::now();
    let spec = match &args.spec {
        Some(path) => load_spec(path)?,
        None => builtin_medical_spec(),
    };
    let generated = generate(&spec)?;
    generated.table.write_csv(&args.out)?;

    let mut manifest = base_manifest(serde_json::to_value(&spec)?);
    manifest.seeds.insert("generator".into(), spec.seed);
    if let Some(path) = &args.spec {
        manifest.input_hashes.insert(path.display().to_string(), sha256_file(path)?);
    }
    manifest.input_hashes.insert("generator_spec".into(), generated.spec_hash.clone());
    manifest
        .output_hashes
        .insert(args.out.display().to_string(), sha256_file(&args.out)?);
    manifest.timings_ms.insert("total".into(), t0.elapsed().as_millis() as u64);
    write_manifest(&args.out, &manifest)?;
    println!("wrote {} ({} rows)", args.out.display(), generated.table.n_rows);
    Ok(())
}

fn cmd_learn(args: LearnArgs) -> Result<()> {
    let t0 = Instant::now();
    init_jobs(args.jobs);
    let seed = resolve_seed(args.seed);
    let budget = ExplorationBudget {
        max_parent_set_size: args.max_parents,
        max_candidates_per_node: args.max_candidates,
        max_expansions_per_node: args.max_expansions,
    };

    let table = load_csv(&args.data, &args.labels)?;
    let mut table = match args.holdout {
        Some(frac) => {
            let out = args.holdout_out.as_ref().ok_or_else(|| {
                Error::invalid("--holdout requires --holdout-out for the test rows")
            })?;
            let (train, test) = stratified_split(&table, frac, seed)?;
            test.write_csv(out)?;
            if let Some(train_out) = &args.train_out {
                train.write_csv(train_out)?;
            }
            train
        }
        None => table,
    };
    if !args.excludes.is_empty() {
        table.drop_columns(&args.excludes)?;
    }

    let t_learn = Instant::now();
    let model = learn_global(&table, args.bins, &budget, seed)?;
    let learn_ms = t_learn.elapsed().as_millis() as u64;
    write_json(&args.out, &model)?;

    let mut manifest = base_manifest(serde_json::json!({
        "labels": args.labels,
        "excludes": args.excludes,
        "bins": args.bins,
        "budget": budget,
        "holdout": args.holdout,
    }));
    manifest.seeds.insert("learn".into(), seed);
    manifest.input_hashes.insert(args.data.display().to_string(), sha256_file(&args.data)?);
    manifest.output_hashes.insert(args.out.display().to_string(), sha256_file(&args.out)?);
    if let Some(out) = &args.holdout_out {
        manifest.output_hashes.insert(out.display().to_string(), sha256_file(out)?);
    }
    if let Some(out) = &args.train_out {
        manifest.output_hashes.insert(out.display().to_string(), sha256_file(out)?);
    }
    manifest.timings_ms.insert("learn".into(), learn_ms);
    manifest.timings_ms.insert("total".into(), t0.elapsed().as_millis() as u64);
    write_manifest(&args.out, &manifest)?;
    println!(
        "learned {} nodes, {} edges -> {}",
        model.dag.nodes.len(),
        model.dag.edges().len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_reduce(args: ReduceArgs) -> Result<()> {
    let t0 = Instant::now();
    init_jobs(args.jobs);
    let seed = resolve_seed(args.seed);
    let model: GlobalModel = read_json(&args.model)?;

    let label_card = model
        .dataset
        .var_id(&args.label)
        .map(|id| model.dataset.cardinality(id))
        .ok_or_else(|| Error::invalid(format!("label '{}' not in the model", args.label)))?;
    let mut cfg = GaConfig::defaults_for_label(label_card, seed);
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.max_gen {
        cfg.max_gen = v;
    }
    if let Some(v) = args.patience {
        cfg.patience = v;
    }
    if let Some(v) = args.plateau {
        cfg.plateau = v;
    }
    if let Some(v) = args.tau {
        cfg.tau = v;
    }
    if let Some(v) = args.c {
        cfg.c = v;
    }
    if let Some(v) = args.mutation_rate {
        cfg.mutation_rate = v;
    }
    cfg.validate()?;

    let reduced = reduce(&model, &args.label, &cfg, args.exhaustive, args.alpha)?;
    write_json(&args.out, &reduced)?;

    let mut manifest = base_manifest(serde_json::json!({
        "label": args.label,
        "ga": cfg,
        "exhaustive": args.exhaustive,
        "alpha": args.alpha,
    }));
    manifest.seeds.insert("ga".into(), seed);
    manifest.input_hashes.insert(args.model.display().to_string(), sha256_file(&args.model)?);
    manifest.output_hashes.insert(args.out.display().to_string(), sha256_file(&args.out)?);
    manifest.timings_ms.insert("total".into(), t0.elapsed().as_millis() as u64);
    write_manifest(&args.out, &manifest)?;
    println!(
        "reduced model: {} nodes, fitness {:.6} -> {}",
        reduced.dag.nodes.len(),
        reduced.fitness,
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let t0 = Instant::now();
    init_jobs(args.jobs);
    let model: ReducedModelFile = read_json(&args.model)?;
    let table = load_csv(&args.test, &[])?;
    let metrics = eval_reduced(&model, &table, args.threshold, &args.hide)?;
    print!("{}", metrics.render_table());

    if let Some(out) = &args.out {
        write_json_pretty(out, &metrics)?;
        let mut manifest = base_manifest(serde_json::json!({
            "threshold": args.threshold,
            "hide": args.hide,
        }));
        manifest.input_hashes.insert(args.model.display().to_string(), sha256_file(&args.model)?);
        manifest.input_hashes.insert(args.test.display().to_string(), sha256_file(&args.test)?);
        manifest.output_hashes.insert(out.display().to_string(), sha256_file(out)?);
        manifest.timings_ms.insert("total".into(), t0.elapsed().as_millis() as u64);
        write_manifest(out, &manifest)?;
    }
    Ok(())
}

fn cmd_export_dot(args: ExportDotArgs) -> Result<()> {
    let dot = match read_json::<GlobalModel>(&args.model) {
        Ok(model) => export_dot(&model.dag, &model.dataset.variables),
        Err(_) => {
            let model: ReducedModelFile = read_json(&args.model)?;
            export_dot(&model.dag, &model.variables)
        }
    };
    std::fs::write(&args.out, &dot).map_err(|e| Error::io(&args.out, e))?;

    let mut manifest = base_manifest(serde_json::Value::Null);
    manifest.input_hashes.insert(args.model.display().to_string(), sha256_file(&args.model)?);
    manifest.output_hashes.insert(args.out.display().to_string(), sha256_file(&args.out)?);
    write_manifest(&args.out, &manifest)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_add_label(args: AddLabelArgs) -> Result<()> {
    let t0 = Instant::now();
    init_jobs(args.jobs);
    let model: GlobalModel = read_json(&args.model)?;
    let table = load_csv(&args.data, &[args.label.clone()])?;
    let updated = add_label(&model, &table, &args.label)?;
    write_json(&args.out, &updated)?;

    let mut manifest = base_manifest(serde_json::json!({ "label": args.label }));
    manifest.seeds.insert("learn".into(), updated.seed);
    manifest.input_hashes.insert(args.model.display().to_string(), sha256_file(&args.model)?);
    manifest.input_hashes.insert(args.data.display().to_string(), sha256_file(&args.data)?);
    manifest.output_hashes.insert(args.out.display().to_string(), sha256_file(&args.out)?);
    manifest.timings_ms.insert("total".into(), t0.elapsed().as_millis() as u64);
    write_manifest(&args.out, &manifest)?;
    println!(
        "added '{}': {} nodes -> {}",
        args.label,
        updated.dag.nodes.len(),
        args.out.display()
    );
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => cmd_generate(args),
        Command::Learn(args) => cmd_learn(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Eval(args) => cmd_eval(args),
        Command::ExportDot(args) => cmd_export_dot(args),
        Command::AddLabel(args) => cmd_add_label(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
