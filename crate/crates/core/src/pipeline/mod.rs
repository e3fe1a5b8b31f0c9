//! End-to-end orchestration: the windowed embedding pipeline, baseline
//! runners, method comparison, and the window/imbalance sweeps.
//!
//! The forecasting discipline: models are trained on snapshots 1..t only;
//! the held-out target snapshot is given to the evaluation side alone, which
//! attaches labels (and keeps every target positive in the prediction set).

pub mod config;
pub mod synth;

use std::collections::BTreeSet;
use std::io::{BufWriter, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autoenc::{self, clamp_code_length, EmbeddingModel, TrainConfig};
use crate::baselines::{
    self, forecast_score, jack_features, similarity_series, SimilarityMetric,
};
use crate::classify::{self, LabeledDataset, StumpEnsemble};
use crate::dyngraph::{collapse, DynamicNetwork, Pair, Snapshot};
use crate::error::{Error, Result};
use crate::evalmetrics::{sample_training_pairs, MethodReport, RankedScores, SamplerConfig};
use crate::pairfeat::{build_dataset, Window};
use crate::scalar::Scalar;

/// Every scoring method the toolkit can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    DyLink2Vec,
    Cn,
    Aa,
    J,
    Katz,
    Jack,
    TsCnAdj,
    TsAaAdj,
    TsJAdj,
    TsPaAdj,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::DyLink2Vec,
        Method::Cn,
        Method::Aa,
        Method::J,
        Method::Katz,
        Method::Jack,
        Method::TsCnAdj,
        Method::TsAaAdj,
        Method::TsJAdj,
        Method::TsPaAdj,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::DyLink2Vec => "dylink2vec",
            Method::Cn => "cn",
            Method::Aa => "aa",
            Method::J => "j",
            Method::Katz => "katz",
            Method::Jack => "jack",
            Method::TsCnAdj => "ts-cn-adj",
            Method::TsAaAdj => "ts-aa-adj",
            Method::TsJAdj => "ts-j-adj",
            Method::TsPaAdj => "ts-pa-adj",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Runtime knobs shared by every run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Embedding code length, clamped below the feature length when needed.
    pub code_length: usize,
    pub lambda: f64,
    pub train: TrainConfig,
    /// AdaBoost rounds.
    pub rounds: usize,
    pub sampler: SamplerConfig,
    /// Training window starts here; it always ends at t-1.
    pub train_from: usize,
    /// Collapse range start for the static topological baselines.
    pub collapse_from: usize,
    pub katz_beta: f64,
    pub katz_max_len: usize,
    pub ndcg_k: usize,
    /// Score every pair when n is at most this; otherwise sample.
    pub prediction_n_threshold: usize,
    pub prediction_max_pairs: usize,
    pub prediction_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            code_length: autoenc::DEFAULT_CODE_LENGTH,
            lambda: autoenc::DEFAULT_LAMBDA,
            train: TrainConfig::default(),
            rounds: classify::DEFAULT_ROUNDS,
            sampler: SamplerConfig { ratio: 1.0, seed: 43 },
            train_from: 1,
            collapse_from: 2,
            katz_beta: baselines::DEFAULT_KATZ_BETA,
            katz_max_len: baselines::DEFAULT_KATZ_MAX_LEN,
            ndcg_k: crate::evalmetrics::DEFAULT_NDCG_K,
            prediction_n_threshold: 2000,
            prediction_max_pairs: 200_000,
            prediction_seed: 44,
        }
    }
}

impl RunConfig {
    /// Derive the per-stage seeds from one master seed.
    pub fn with_master_seed(mut self, seed: u64) -> Self {
        self.train.seed = seed.wrapping_add(1);
        self.sampler.seed = seed.wrapping_add(2);
        self.prediction_seed = seed.wrapping_add(3);
        self
    }
}

/// The pair set scored for the forecast: every canonical pair when the
/// vertex count is small, otherwise a seeded uniform sample. Positives of
/// the held-out target are always retained so evaluation sees them.
pub fn prediction_pairs(
    n: usize,
    eval: Option<&Snapshot>,
    cfg: &RunConfig,
) -> Vec<Pair> {
    if n <= cfg.prediction_n_threshold {
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in (u + 1)..n {
                pairs.push((u, v));
            }
        }
        return pairs;
    }
    let total = n * (n - 1) / 2;
    let want = cfg.prediction_max_pairs.min(total);
    let mut set: BTreeSet<Pair> = BTreeSet::new();
    if let Some(snap) = eval {
        set.extend(snap.edges());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.prediction_seed);
    while set.len() < want {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            set.insert(crate::dyngraph::canonical(u, v));
        }
    }
    set.into_iter().collect()
}

fn attach_labels<F: Scalar>(
    pairs: &[Pair],
    scores: &[F],
    eval: Option<&Snapshot>,
) -> Result<Option<RankedScores<F>>> {
    match eval {
        None => Ok(None),
        Some(snap) => {
            let labels: Vec<u8> = pairs
                .iter()
                .map(|&(u, v)| snap.has_edge(u, v) as u8)
                .collect();
            Ok(Some(RankedScores::from_parts(pairs, scores, &labels)?))
        }
    }
}

/// Everything produced by one embedding-pipeline run.
#[derive(Debug, Clone)]
pub struct DyLinkRun<F> {
    pub train_window: Window,
    pub predict_window: Window,
    pub training_pairs: Vec<(Pair, u8)>,
    pub model: EmbeddingModel<F>,
    pub loss_trace: Vec<F>,
    pub ensemble: StumpEnsemble<F>,
    pub round_errors: Vec<F>,
    pub training_error: F,
    pub prediction_pairs: Vec<Pair>,
    pub scores: Vec<F>,
    pub ranked: Option<RankedScores<F>>,
}

fn check_eval(net: &DynamicNetwork, eval: Option<&Snapshot>) -> Result<()> {
    if let Some(snap) = eval {
        if snap.n() != net.n() {
            return Err(Error::InvalidParameter(format!(
                "evaluation snapshot has n={}, network has n={}",
                snap.n(),
                net.n()
            )));
        }
    }
    Ok(())
}

fn pipeline_windows(net: &DynamicNetwork, cfg: &RunConfig) -> Result<(Window, Window)> {
    let t = net.t();
    if t < 3 {
        return Err(Error::InvalidParameter(format!(
            "pipeline needs at least 3 snapshots (train window, label snapshot, predict window); got t={t}"
        )));
    }
    let from = cfg.train_from;
    if from < 1 || from > t - 1 {
        return Err(Error::InvalidRange {
            from,
            to: t - 1,
            t,
        });
    }
    Ok((Window::new(from, t - 1), Window::new(from + 1, t)))
}

/// The windowed link-forecasting pipeline: features over the training
/// window, labels from the last snapshot, an embedding learned on the
/// training features alone (labels never reach it), a stump ensemble over
/// the embeddings, and scores for every prediction pair over the shifted
/// window. The held-out target snapshot is used only to keep its positives
/// in the prediction set and to label the output for evaluation.
pub fn run_dylink2vec<F: Scalar>(
    net: &DynamicNetwork,
    cfg: &RunConfig,
    eval: Option<&Snapshot>,
) -> Result<DyLinkRun<F>> {
    check_eval(net, eval)?;
    let (train_window, predict_window) = pipeline_windows(net, cfg)?;
    let t = net.t();

    let training_pairs = sample_training_pairs(net, t, &cfg.sampler)?;
    let pairs_only: Vec<Pair> = training_pairs.iter().map(|&(p, _)| p).collect();
    let labels: Vec<u8> = training_pairs.iter().map(|&(_, l)| l).collect();

    let e_hat = build_dataset::<F>(net, train_window, &pairs_only)?;
    let l_eff = clamp_code_length(cfg.code_length, e_hat.cols());
    let lambda = F::from_f64_lossy(cfg.lambda);
    let trained = autoenc::train(&e_hat, l_eff, lambda, &cfg.train)?;

    let alpha_hat = trained.model.embed(&e_hat)?;
    let fit = classify::train_adaboost(
        &LabeledDataset::new(alpha_hat, labels, pairs_only)?,
        cfg.rounds,
    )?;

    let prediction = prediction_pairs(net.n(), eval, cfg);
    let e_bar = build_dataset::<F>(net, predict_window, &prediction)?;
    let alpha_bar = trained.model.embed(&e_bar)?;
    let scores = classify::score(&fit.ensemble, &alpha_bar)?;
    let ranked = attach_labels(&prediction, &scores, eval)?;

    Ok(DyLinkRun {
        train_window,
        predict_window,
        training_pairs,
        model: trained.model,
        loss_trace: trained.loss_trace,
        ensemble: fit.ensemble,
        round_errors: fit.round_errors,
        training_error: fit.training_error,
        prediction_pairs: prediction,
        scores,
        ranked,
    })
}

/// A baseline run: the prediction pair set, its scores, and labeled scores
/// when a target snapshot was supplied.
#[derive(Debug, Clone)]
pub struct BaselineRun<F> {
    pub prediction_pairs: Vec<Pair>,
    pub scores: Vec<F>,
    pub ranked: Option<RankedScores<F>>,
}

fn topo_scores<F: Scalar>(
    g: &Snapshot,
    pairs: &[Pair],
    method: Method,
    cfg: &RunConfig,
) -> Result<Vec<F>> {
    let beta = F::from_f64_lossy(cfg.katz_beta);
    match method {
        Method::Cn => pairs
            .iter()
            .map(|&(u, v)| {
                baselines::common_neighbors(g, u, v).map(F::from_usize_lossy)
            })
            .collect(),
        Method::Aa => pairs
            .iter()
            .map(|&(u, v)| baselines::adamic_adar(g, u, v))
            .collect(),
        Method::J => pairs
            .iter()
            .map(|&(u, v)| baselines::jaccard(g, u, v))
            .collect(),
        Method::Katz => {
            // group by source vertex so each propagation is shared
            let mut out = vec![F::zero(); pairs.len()];
            let mut cache: Option<(usize, Vec<F>)> = None;
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            order.sort_by_key(|&r| pairs[r].0);
            for r in order {
                let (u, v) = pairs[r];
                let stale = !matches!(&cache, Some((src, _)) if *src == u);
                if stale {
                    cache = Some((u, baselines::katz_from_source(g, u, beta, cfg.katz_max_len)?));
                }
                out[r] = cache.as_ref().unwrap().1[v];
            }
            Ok(out)
        }
        _ => unreachable!("not a topological method"),
    }
}

/// Score the prediction pairs with one competing method.
///
/// Static topological scores run on the collapsed window starting at
/// `collapse_from` (mirroring the prediction-side window); JACK trains on
/// collapsed-window features with last-snapshot labels; TS-* forecasts the
/// per-snapshot similarity plus connectivity series.
pub fn run_baseline<F: Scalar>(
    net: &DynamicNetwork,
    method: Method,
    cfg: &RunConfig,
    eval: Option<&Snapshot>,
) -> Result<BaselineRun<F>> {
    check_eval(net, eval)?;
    let t = net.t();
    let pairs = prediction_pairs(net.n(), eval, cfg);
    let scores: Vec<F> = match method {
        Method::DyLink2Vec => {
            return Err(Error::InvalidParameter(
                "run_baseline does not handle the embedding pipeline; call run_dylink2vec".into(),
            ))
        }
        Method::Cn | Method::Aa | Method::J | Method::Katz => {
            let from = cfg.collapse_from.clamp(1, t);
            let g = collapse(net, from, t)?;
            topo_scores(&g, &pairs, method, cfg)?
        }
        Method::Jack => {
            let (train_window, predict_window) = pipeline_windows(net, cfg)?;
            let training = sample_training_pairs(net, t, &cfg.sampler)?;
            let tr_pairs: Vec<Pair> = training.iter().map(|&(p, _)| p).collect();
            let tr_labels: Vec<u8> = training.iter().map(|&(_, l)| l).collect();
            let beta = F::from_f64_lossy(cfg.katz_beta);
            let g_train = collapse(net, train_window.from, train_window.to)?;
            let feats = jack_features(&g_train, &tr_pairs, beta, cfg.katz_max_len)?;
            let fit = classify::train_adaboost(
                &LabeledDataset::new(feats, tr_labels, tr_pairs)?,
                cfg.rounds,
            )?;
            let g_pred = collapse(net, predict_window.from, predict_window.to)?;
            let pred_feats = jack_features(&g_pred, &pairs, beta, cfg.katz_max_len)?;
            classify::score(&fit.ensemble, &pred_feats)?
        }
        Method::TsCnAdj | Method::TsAaAdj | Method::TsJAdj | Method::TsPaAdj => {
            let metric = match method {
                Method::TsCnAdj => SimilarityMetric::Cn,
                Method::TsAaAdj => SimilarityMetric::Aa,
                Method::TsJAdj => SimilarityMetric::J,
                _ => SimilarityMetric::Pa,
            };
            let series = similarity_series::<F>(net, metric, &pairs)?;
            series
                .iter()
                .map(forecast_score)
                .collect::<Result<Vec<F>>>()?
        }
    };
    let ranked = attach_labels(&pairs, &scores, eval)?;
    Ok(BaselineRun {
        prediction_pairs: pairs,
        scores,
        ranked,
    })
}

/// One method's outcome inside a comparison.
#[derive(Debug, Clone)]
pub enum MethodRun<F> {
    DyLink(Box<DyLinkRun<F>>),
    Baseline(BaselineRun<F>),
}

impl<F: Scalar> MethodRun<F> {
    pub fn prediction_pairs(&self) -> &[Pair] {
        match self {
            MethodRun::DyLink(r) => &r.prediction_pairs,
            MethodRun::Baseline(r) => &r.prediction_pairs,
        }
    }

    pub fn scores(&self) -> &[F] {
        match self {
            MethodRun::DyLink(r) => &r.scores,
            MethodRun::Baseline(r) => &r.scores,
        }
    }

    pub fn ranked(&self) -> Option<&RankedScores<F>> {
        match self {
            MethodRun::DyLink(r) => r.ranked.as_ref(),
            MethodRun::Baseline(r) => r.ranked.as_ref(),
        }
    }
}

pub fn run_method<F: Scalar>(
    net: &DynamicNetwork,
    method: Method,
    cfg: &RunConfig,
    eval: Option<&Snapshot>,
) -> Result<MethodRun<F>> {
    Ok(match method {
        Method::DyLink2Vec => MethodRun::DyLink(Box::new(run_dylink2vec(net, cfg, eval)?)),
        _ => MethodRun::Baseline(run_baseline(net, method, cfg, eval)?),
    })
}

/// Comparison across methods on one network with a held-out target.
#[derive(Debug, Clone)]
pub struct CompareOutcome<F> {
    pub runs: Vec<(Method, MethodRun<F>)>,
    pub reports: Vec<MethodReport>,
}

pub fn compare<F: Scalar>(
    net: &DynamicNetwork,
    cfg: &RunConfig,
    eval: &Snapshot,
    methods: &[Method],
) -> Result<CompareOutcome<F>> {
    if methods.is_empty() {
        return Err(Error::EmptyInput("method list"));
    }
    let mut runs = Vec::new();
    let mut reports = Vec::new();
    for &method in methods {
        let run = run_method::<F>(net, method, cfg, Some(eval))?;
        let ranked = run.ranked().expect("labels attached when eval supplied");
        reports.push(MethodReport::evaluate(method.name(), ranked, cfg.ndcg_k)?);
        runs.push((method, run));
    }
    Ok(CompareOutcome { runs, reports })
}

/// One sweep observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub prauc: f64,
    pub ndcg: f64,
}

/// Re-run the pipeline with training windows of the given sizes (most recent
/// `size` snapshots before the label snapshot).
pub fn window_sweep<F: Scalar>(
    net: &DynamicNetwork,
    cfg: &RunConfig,
    sizes: &[usize],
    eval: &Snapshot,
) -> Result<Vec<SweepRow>> {
    let t = net.t();
    let max = t.saturating_sub(1);
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        if size < 1 || size > max {
            return Err(Error::WindowTooLarge { size, max });
        }
        let sub = RunConfig {
            train_from: t - size,
            ..*cfg
        };
        let run = run_dylink2vec::<F>(net, &sub, Some(eval))?;
        let ranked = run.ranked.as_ref().expect("eval supplied");
        rows.push(SweepRow {
            param: size as f64,
            prauc: crate::evalmetrics::prauc(ranked)?.to_f64_lossy(),
            ndcg: crate::evalmetrics::ndcg_at_k(ranked, cfg.ndcg_k)?.to_f64_lossy(),
        });
    }
    Ok(rows)
}

/// Re-run the pipeline varying only the negative-sampling ratio.
pub fn imbalance_sweep<F: Scalar>(
    net: &DynamicNetwork,
    cfg: &RunConfig,
    ratios: &[f64],
    eval: &Snapshot,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let sub = RunConfig {
            sampler: SamplerConfig {
                ratio,
                seed: cfg.sampler.seed,
            },
            ..*cfg
        };
        let run = run_dylink2vec::<F>(net, &sub, Some(eval))?;
        let ranked = run.ranked.as_ref().expect("eval supplied");
        rows.push(SweepRow {
            param: ratio,
            prauc: crate::evalmetrics::prauc(ranked)?.to_f64_lossy(),
            ndcg: crate::evalmetrics::ndcg_at_k(ranked, cfg.ndcg_k)?.to_f64_lossy(),
        });
    }
    Ok(rows)
}

/// `u,v,score[,label]` rows for one method's scored pairs.
pub fn write_scores_csv<F: Scalar, W: Write>(
    pairs: &[Pair],
    scores: &[F],
    labels: Option<&[u8]>,
    out: W,
) -> Result<()> {
    let mut w = BufWriter::new(out);
    match labels {
        Some(labels) => {
            writeln!(w, "u,v,score,label")?;
            for ((&(u, v), s), l) in pairs.iter().zip(scores.iter()).zip(labels.iter()) {
                writeln!(w, "{u},{v},{s},{l}")?;
            }
        }
        None => {
            writeln!(w, "u,v,score")?;
            for (&(u, v), s) in pairs.iter().zip(scores.iter()) {
                writeln!(w, "{u},{v},{s}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `iteration,loss` rows; iteration 0 is the pre-training loss.
pub fn write_loss_trace_csv<F: Scalar, W: Write>(trace: &[F], out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "iteration,loss")?;
    for (i, l) in trace.iter().enumerate() {
        writeln!(w, "{i},{l:.16e}")?;
    }
    w.flush()?;
    Ok(())
}
