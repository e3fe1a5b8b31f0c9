//! Command-line front end: ingestion, synthetic data, single runs, method
//! comparison, sweeps and embedding dumps. Machine-readable outputs land in
//! the chosen output directory; a short summary goes to stdout.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dylink2vec::autoenc::write_model_file;
use dylink2vec::classify::write_ensemble_file;
use dylink2vec::dyngraph::{ingest, read_edge_list, write_snapshots_file, IngestSpec};
use dylink2vec::evalmetrics::{write_metrics_json, MethodReport};
use dylink2vec::pairfeat::{build_dataset, write_dataset_file};
use dylink2vec::pipeline::config::{load_config_file, Experiment};
use dylink2vec::pipeline::{
    compare, imbalance_sweep, run_method, window_sweep, Method, MethodRun, SweepRow,
};
use dylink2vec::Real;

#[derive(Parser)]
#[command(
    name = "dylink2vec",
    version,
    about = "Link forecasting on temporal graphs via node-pair embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every experiment subcommand.
#[derive(Args, Clone)]
struct ExperimentArgs {
    /// Experiment configuration file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Override the master seed; stage seeds re-derive from it.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Force single-threaded bitwise-reproducible execution. Execution is
    /// already single-threaded and seeded; the flag pins the contract.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a `u<TAB>v<TAB>time` edge list into a snapshot file.
    Ingest {
        /// Edge-list file; `#` comment lines are ignored.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Raw time units per snapshot.
        #[arg(long, value_name = "DT")]
        window_length: f64,
        /// Drop vertices active in fewer snapshots than this.
        #[arg(long, value_name = "N", default_value_t = 0)]
        min_active_snapshots: usize,
        /// Drop vertices whose collapsed-network degree is below this.
        #[arg(long, value_name = "N", default_value_t = 0)]
        min_degree: usize,
        /// Canonical snapshot file to write.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Generate a synthetic dynamic network into a snapshot file.
    Synth {
        /// Configuration file with a [synth] section.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Override the master seed.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// Snapshot file to write.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Run one scoring method; write scores, metrics and model artifacts.
    Run {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Method to run.
        #[arg(long, value_name = "NAME", default_value = "dylink2vec")]
        method: String,
    },
    /// Run a method suite and write one metric report per method.
    Compare {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Comma-separated method list; defaults to the config's list.
        #[arg(long, value_name = "NAME[,NAME...]")]
        method: Option<String>,
    },
    /// Sweep the training-window length (most recent snapshots first).
    WindowSweep {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Comma-separated window sizes, e.g. 1,2,4.
        #[arg(long, value_name = "S[,S...]")]
        sizes: String,
    },
    /// Sweep the negatives-per-positive sampling ratio.
    ImbalanceSweep {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Comma-separated ratios, e.g. 1,2,5,10.
        #[arg(long, value_name = "R[,R...]")]
        ratios: String,
    },
    /// Dump the embedding matrix of the training pairs.
    Embed {
        #[command(flatten)]
        common: ExperimentArgs,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest {
            input,
            window_length,
            min_active_snapshots,
            min_degree,
            out,
        } => cmd_ingest(&input, window_length, min_active_snapshots, min_degree, &out),
        Command::Synth { config, seed, out } => cmd_synth(&config, seed, &out),
        Command::Run { common, method } => cmd_run(&common, &method),
        Command::Compare { common, method } => cmd_compare(&common, method.as_deref()),
        Command::WindowSweep { common, sizes } => cmd_window_sweep(&common, &sizes),
        Command::ImbalanceSweep { common, ratios } => cmd_imbalance_sweep(&common, &ratios),
        Command::Embed { common } => cmd_embed(&common),
    }
}

fn cmd_ingest(
    input: &Path,
    window_length: f64,
    min_active_snapshots: usize,
    min_degree: usize,
    out: &Path,
) -> Result<()> {
    let records = read_edge_list(input).with_context(|| format!("reading {}", input.display()))?;
    let spec = IngestSpec::new(window_length, min_active_snapshots, min_degree)?;
    let net = ingest(&records, &spec)?;
    write_snapshots_file(&net, out)?;
    println!(
        "ingested {} records -> n={} t={} ({} edges collapsed) -> {}",
        records.len(),
        net.n(),
        net.t(),
        dylink2vec::dyngraph::collapse(&net, 1, net.t())?.edge_count(),
        out.display()
    );
    Ok(())
}

fn cmd_synth(config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let cfg = load_config_file(config)?;
    let exp = resolve(config, &cfg, seed)?;
    // regenerate without holdout so the file carries every snapshot
    let full = if cfg.dataset.holdout {
        let mut no_holdout = cfg.clone();
        no_holdout.dataset.holdout = false;
        resolve(config, &no_holdout, seed)?.net
    } else {
        exp.net
    };
    write_snapshots_file(&full, out)?;
    println!("synthesized n={} t={} -> {}", full.n(), full.t(), out.display());
    Ok(())
}

fn resolve(
    config_path: &Path,
    cfg: &dylink2vec::pipeline::config::FileConfig,
    seed: Option<u64>,
) -> Result<Experiment> {
    let base = config_path.parent().unwrap_or(Path::new("."));
    Ok(cfg.resolve(base, seed)?)
}

fn load_experiment(common: &ExperimentArgs) -> Result<Experiment> {
    let cfg = load_config_file(&common.config)
        .with_context(|| format!("loading {}", common.config.display()))?;
    let exp = resolve(&common.config, &cfg, common.seed)?;
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    Ok(exp)
}

fn write_method_outputs(
    out_dir: &Path,
    method: Method,
    run: &MethodRun<Real>,
    per_method_suffix: bool,
) -> Result<()> {
    let name = |stem: &str, ext: &str| {
        if per_method_suffix {
            out_dir.join(format!("{stem}_{}.{ext}", method.name().replace('-', "_")))
        } else {
            out_dir.join(format!("{stem}.{ext}"))
        }
    };
    let labels: Option<Vec<u8>> = run
        .ranked()
        .map(|r| r.entries().iter().map(|e| e.label).collect());
    dylink2vec::pipeline::write_scores_csv(
        run.prediction_pairs(),
        run.scores(),
        labels.as_deref(),
        File::create(name("scores", "csv"))?,
    )?;
    if let MethodRun::DyLink(dl) = run {
        dylink2vec::pipeline::write_loss_trace_csv(
            &dl.loss_trace,
            File::create(name("loss_trace", "csv"))?,
        )?;
        write_model_file(&dl.model, &name("model", "txt"))?;
        write_ensemble_file(&dl.ensemble, &name("ensemble", "txt"))?;
    }
    Ok(())
}

fn report_line(r: &MethodReport) {
    println!(
        "{:<12} prauc={:.4} ndcg@{}={:.4} (pos={}, neg={})",
        r.method, r.prauc, r.k, r.ndcg_k, r.n_pos, r.n_neg
    );
}

fn cmd_run(common: &ExperimentArgs, method: &str) -> Result<()> {
    let method: Method = method.parse::<Method>()?;
    let exp = load_experiment(common)?;
    let run = run_method::<Real>(&exp.net, method, &exp.run, exp.eval.as_ref())?;
    write_method_outputs(&common.out, method, &run, false)?;
    if let Some(ranked) = run.ranked() {
        let report = MethodReport::evaluate(method.name(), ranked, exp.run.ndcg_k)?;
        std::fs::write(
            common.out.join("metrics.json"),
            write_metrics_json(std::slice::from_ref(&report))?,
        )?;
        report_line(&report);
    } else {
        println!(
            "{method}: scored {} pairs (no held-out snapshot, metrics skipped)",
            run.prediction_pairs().len()
        );
    }
    Ok(())
}

fn cmd_compare(common: &ExperimentArgs, method_override: Option<&str>) -> Result<()> {
    let exp = load_experiment(common)?;
    let methods: Vec<Method> = match method_override {
        Some(list) => list
            .split(',')
            .map(|m| m.parse::<Method>())
            .collect::<dylink2vec::Result<_>>()?,
        None => exp.methods.clone(),
    };
    let Some(eval) = exp.eval.as_ref() else {
        bail!("compare needs a held-out snapshot; set dataset.holdout = true");
    };
    let outcome = compare::<Real>(&exp.net, &exp.run, eval, &methods)?;
    std::fs::write(
        common.out.join("metrics.json"),
        write_metrics_json(&outcome.reports)?,
    )?;
    // combined baseline score table, one row per (pair, method)
    let mut baseline_rows: Vec<((usize, usize), &str, Real)> = Vec::new();
    for (method, run) in &outcome.runs {
        write_method_outputs(&common.out, *method, run, true)?;
        if !matches!(run, MethodRun::DyLink(_)) {
            for (&pair, &score) in run.prediction_pairs().iter().zip(run.scores()) {
                baseline_rows.push((pair, method.name(), score));
            }
        }
    }
    dylink2vec::baselines::write_baseline_scores_csv(
        &baseline_rows,
        File::create(common.out.join("baseline_scores.csv"))?,
    )?;
    for r in &outcome.reports {
        report_line(r);
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} `{tok}`: {e}"))
        })
        .collect()
}

fn write_sweep_csv(path: &Path, param_name: &str, rows: &[SweepRow]) -> Result<()> {
    use std::io::Write;
    let mut f = File::create(path)?;
    writeln!(f, "{param_name},prauc,ndcg")?;
    for r in rows {
        writeln!(f, "{},{},{}", r.param, r.prauc, r.ndcg)?;
    }
    Ok(())
}

fn cmd_window_sweep(common: &ExperimentArgs, sizes: &str) -> Result<()> {
    let exp = load_experiment(common)?;
    let sizes: Vec<usize> = parse_list(sizes, "window size")?;
    let Some(eval) = exp.eval.as_ref() else {
        bail!("window-sweep needs a held-out snapshot; set dataset.holdout = true");
    };
    let rows = window_sweep::<Real>(&exp.net, &exp.run, &sizes, eval)?;
    write_sweep_csv(&common.out.join("window_sweep.csv"), "window_size", &rows)?;
    for r in &rows {
        println!("window={} prauc={:.4} ndcg={:.4}", r.param, r.prauc, r.ndcg);
    }
    Ok(())
}

fn cmd_imbalance_sweep(common: &ExperimentArgs, ratios: &str) -> Result<()> {
    let exp = load_experiment(common)?;
    let ratios: Vec<f64> = parse_list(ratios, "ratio")?;
    let Some(eval) = exp.eval.as_ref() else {
        bail!("imbalance-sweep needs a held-out snapshot; set dataset.holdout = true");
    };
    let rows = imbalance_sweep::<Real>(&exp.net, &exp.run, &ratios, eval)?;
    write_sweep_csv(&common.out.join("imbalance_sweep.csv"), "ratio", &rows)?;
    for r in &rows {
        println!("ratio={} prauc={:.4} ndcg={:.4}", r.param, r.prauc, r.ndcg);
    }
    Ok(())
}

fn cmd_embed(common: &ExperimentArgs) -> Result<()> {
    let exp = load_experiment(common)?;
    let run = run_method::<Real>(&exp.net, Method::DyLink2Vec, &exp.run, exp.eval.as_ref())?;
    let MethodRun::DyLink(dl) = run else {
        unreachable!()
    };
    let pairs: Vec<(usize, usize)> = dl.training_pairs.iter().map(|&(p, _)| p).collect();
    let e_hat = build_dataset::<Real>(&exp.net, dl.train_window, &pairs)?;
    let alpha = dl.model.embed(&e_hat)?;
    write_dataset_file(&alpha, &common.out.join("embeddings.txt"))?;
    write_model_file(&dl.model, &common.out.join("model.txt"))?;
    dylink2vec::pipeline::write_loss_trace_csv(
        &dl.loss_trace,
        File::create(common.out.join("loss_trace.csv"))?,
    )?;
    println!(
        "embedded {} training pairs into {} dimensions -> {}",
        alpha.rows(),
        alpha.cols(),
        common.out.join("embeddings.txt").display()
    );
    Ok(())
}
