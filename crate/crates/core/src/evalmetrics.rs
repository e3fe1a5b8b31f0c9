//! Ranking-quality metrics (PR curve / PRAUC, NDCG@k) and training-pair
//! sampling with negative under-sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyngraph::{DynamicNetwork, Pair};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_NDCG_K: usize = 50;

/// One scored node-pair with its ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair<F> {
    pub pair: Pair,
    pub score: F,
    pub label: u8,
}

/// Scored pairs ready for ranking metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedScores<F> {
    entries: Vec<ScoredPair<F>>,
}

impl<F: Scalar> RankedScores<F> {
    pub fn new(entries: Vec<ScoredPair<F>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("ranked scores"));
        }
        for e in &entries {
            if !e.score.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite score for pair ({},{})",
                    e.pair.0, e.pair.1
                )));
            }
            if e.label > 1 {
                return Err(Error::InvalidParameter(format!(
                    "label must be 0 or 1, got {}",
                    e.label
                )));
            }
        }
        Ok(RankedScores { entries })
    }

    pub fn from_parts(pairs: &[Pair], scores: &[F], labels: &[u8]) -> Result<Self> {
        if pairs.len() != scores.len() || pairs.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                what: "scores/labels length",
                expected: pairs.len(),
                got: scores.len().min(labels.len()),
            });
        }
        Self::new(
            pairs
                .iter()
                .zip(scores.iter().zip(labels.iter()))
                .map(|(&pair, (&score, &label))| ScoredPair { pair, score, label })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[ScoredPair<F>] {
        &self.entries
    }

    pub fn positives(&self) -> usize {
        self.entries.iter().filter(|e| e.label == 1).count()
    }

    pub fn negatives(&self) -> usize {
        self.entries.len() - self.positives()
    }

    /// Entries sorted by descending score, ties broken by canonical pair id.
    fn sorted_desc(&self) -> Vec<ScoredPair<F>> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("finite scores")
                .then_with(|| a.pair.cmp(&b.pair))
        });
        v
    }
}

/// Precision-recall points at every distinct score threshold (descending),
/// ties grouped, with a leading (0, precision-of-top-group) anchor.
///
/// Thresholds before the first positive pin recall to zero at precision 0
/// and carry no area; the curve starts at the first threshold that captures
/// a positive, which keeps every precision in (0,1]. The walk stops once
/// recall reaches 1: later thresholds only repeat full recall at lower
/// precision.
pub fn pr_curve<F: Scalar>(scores: &RankedScores<F>) -> Result<Vec<(F, F)>> {
    let pos = scores.positives();
    let neg = scores.negatives();
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateRanking);
    }
    let sorted = scores.sorted_desc();
    let posf = F::from_usize_lossy(pos);
    let mut points = Vec::new();
    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        // group entries sharing one score: a single threshold
        let mut j = i;
        while j < sorted.len() && sorted[j].score == sorted[i].score {
            if sorted[j].label == 1 {
                tp += 1;
            }
            seen += 1;
            j += 1;
        }
        if tp > 0 {
            let recall = F::from_usize_lossy(tp) / posf;
            let precision = F::from_usize_lossy(tp) / F::from_usize_lossy(seen);
            if points.is_empty() {
                points.push((F::zero(), precision));
            }
            points.push((recall, precision));
            if tp == pos {
                break;
            }
        }
        i = j;
    }
    Ok(points)
}

/// Area under the PR curve by the trapezoidal rule over recall.
pub fn prauc<F: Scalar>(scores: &RankedScores<F>) -> Result<F> {
    let points = pr_curve(scores)?;
    let mut area = F::zero();
    let half = F::from_f64_lossy(0.5);
    for w in points.windows(2) {
        let (r0, p0) = w[0];
        let (r1, p1) = w[1];
        area += (r1 - r0) * (p0 + p1) * half;
    }
    Ok(area)
}

/// Binary-relevance NDCG at cutoff k over the descending-score order, ties
/// broken by pair id. k values beyond the list length truncate to it.
pub fn ndcg_at_k<F: Scalar>(scores: &RankedScores<F>, k: usize) -> Result<F> {
    let pos = scores.positives();
    if pos == 0 {
        return Err(Error::DegenerateRanking);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("ndcg cutoff k must be >= 1".into()));
    }
    let sorted = scores.sorted_desc();
    let k = k.min(sorted.len());
    let two = F::from_f64_lossy(2.0);
    let discount = |rank: usize| F::from_usize_lossy(rank + 1).log(two);
    let mut dcg = F::zero();
    for (rank, e) in sorted.iter().take(k).enumerate() {
        if e.label == 1 {
            dcg += F::one() / discount(rank + 1);
        }
    }
    let mut idcg = F::zero();
    for rank in 1..=k.min(pos) {
        idcg += F::one() / discount(rank);
    }
    Ok(dcg / idcg)
}

/// Negative under-sampling configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Negatives drawn per positive (>= 1).
    pub ratio: f64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(ratio: f64, seed: u64) -> Result<Self> {
        if !ratio.is_finite() || ratio < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sampler ratio must be >= 1, got {ratio}"
            )));
        }
        Ok(SamplerConfig { ratio, seed })
    }
}

/// All positive pairs of the label snapshot plus `ceil(ratio * positives)`
/// negatives drawn uniformly without replacement from the non-edges.
/// Deterministic for a given seed.
pub fn sample_training_pairs(
    net: &DynamicNetwork,
    label_snapshot: usize,
    cfg: &SamplerConfig,
) -> Result<Vec<(Pair, u8)>> {
    SamplerConfig::new(cfg.ratio, cfg.seed)?;
    let snap = net.snapshot(label_snapshot)?;
    let positives: Vec<Pair> = snap.edges().collect();
    if positives.is_empty() {
        return Err(Error::EmptyInput("label snapshot has no edges"));
    }
    let mut negatives: Vec<Pair> = Vec::new();
    for u in 0..net.n() {
        for v in (u + 1)..net.n() {
            if !snap.has_edge(u, v) {
                negatives.push((u, v));
            }
        }
    }
    let want = (cfg.ratio * positives.len() as f64).ceil() as usize;
    if want > negatives.len() {
        return Err(Error::NotEnoughNegatives {
            requested: want,
            available: negatives.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // partial Fisher-Yates: the first `want` slots are a uniform sample
    for i in 0..want {
        let j = i + rng.gen_range(0..negatives.len() - i);
        negatives.swap(i, j);
    }
    let mut out: Vec<(Pair, u8)> = positives.into_iter().map(|p| (p, 1)).collect();
    out.extend(negatives.into_iter().take(want).map(|p| (p, 0)));
    Ok(out)
}

/// Per-method metric report, serialized into `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub prauc: f64,
    pub ndcg_k: f64,
    pub k: usize,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl MethodReport {
    pub fn evaluate<F: Scalar>(method: &str, scores: &RankedScores<F>, k: usize) -> Result<Self> {
        Ok(MethodReport {
            method: method.to_string(),
            prauc: prauc(scores)?.to_f64_lossy(),
            ndcg_k: ndcg_at_k(scores, k)?.to_f64_lossy(),
            k,
            n_pos: scores.positives(),
            n_neg: scores.negatives(),
        })
    }
}

pub fn write_metrics_json(reports: &[MethodReport]) -> Result<String> {
    serde_json::to_string_pretty(reports)
        .map_err(|e| Error::Format(format!("metrics serialization: {e}")))
}
