//! Competing predictors: collapsed-network topological scores (CN, AA, J,
//! Katz), the 4-feature JACK combination, and one-step time-series forecasts
//! of per-snapshot similarity plus connectivity.

use std::io::{BufWriter, Write};

use crate::dense::Matrix;
use crate::dyngraph::{DynamicNetwork, Pair, Snapshot};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_KATZ_BETA: f64 = 0.005;
pub const DEFAULT_KATZ_MAX_LEN: usize = 5;

fn check_pair(g: &Snapshot, u: usize, v: usize) -> Result<()> {
    if u == v {
        return Err(Error::SelfPair(u));
    }
    for id in [u, v] {
        if id >= g.n() {
            return Err(Error::VertexOutOfRange { id, n: g.n() });
        }
    }
    Ok(())
}

fn intersection_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// |Gamma(u) intersect Gamma(v)|.
pub fn common_neighbors(g: &Snapshot, u: usize, v: usize) -> Result<usize> {
    check_pair(g, u, v)?;
    Ok(intersection_count(g.neighbors(u), g.neighbors(v)))
}

/// Sum over common neighbors w of 1/ln(deg(w)). A common neighbor always has
/// degree >= 2, so every term is finite.
pub fn adamic_adar<F: Scalar>(g: &Snapshot, u: usize, v: usize) -> Result<F> {
    check_pair(g, u, v)?;
    let (a, b) = (g.neighbors(u), g.neighbors(v));
    let (mut i, mut j) = (0, 0);
    let mut total = F::zero();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let deg = g.degree(a[i]);
                debug_assert!(deg >= 2, "common neighbor must touch both endpoints");
                total += F::one() / F::from_usize_lossy(deg).ln();
                i += 1;
                j += 1;
            }
        }
    }
    Ok(total)
}

/// |intersection| / |union| of the neighborhoods; 0 when both are empty.
pub fn jaccard<F: Scalar>(g: &Snapshot, u: usize, v: usize) -> Result<F> {
    check_pair(g, u, v)?;
    let inter = intersection_count(g.neighbors(u), g.neighbors(v));
    let union = g.degree(u) + g.degree(v) - inter;
    if union == 0 {
        return Ok(F::zero());
    }
    Ok(F::from_usize_lossy(inter) / F::from_usize_lossy(union))
}

/// Truncated Katz score: sum over walk lengths p = 2..=max_len of
/// beta^p * (#walks of length p from u to v), via repeated adjacency
/// matrix-vector products.
pub fn katz<F: Scalar>(g: &Snapshot, u: usize, v: usize, beta: F, max_len: usize) -> Result<F> {
    check_pair(g, u, v)?;
    Ok(katz_from_source(g, u, beta, max_len)?[v])
}

/// Katz scores from `u` to every vertex at once (amortizes all-pairs use).
pub fn katz_from_source<F: Scalar>(
    g: &Snapshot,
    u: usize,
    beta: F,
    max_len: usize,
) -> Result<Vec<F>> {
    if u >= g.n() {
        return Err(Error::VertexOutOfRange { id: u, n: g.n() });
    }
    let n = g.n();
    let mut walks = vec![F::zero(); n];
    walks[u] = F::one();
    let mut acc = vec![F::zero(); n];
    let mut beta_pow = F::one();
    for p in 1..=max_len {
        let mut next = vec![F::zero(); n];
        for w in 0..n {
            let mut s = F::zero();
            for &z in g.neighbors(w) {
                s += walks[z];
            }
            next[w] = s;
        }
        walks = next;
        beta_pow *= beta;
        if p >= 2 {
            for (a, &x) in acc.iter_mut().zip(walks.iter()) {
                *a += beta_pow * x;
            }
        }
    }
    Ok(acc)
}

/// Per-pair topological feature rows in the fixed column order
/// [J, AA, CN, Katz].
pub fn jack_features<F: Scalar>(
    g: &Snapshot,
    pairs: &[Pair],
    katz_beta: F,
    katz_max_len: usize,
) -> Result<Matrix<F>> {
    let mut m = Matrix::zeros(pairs.len(), 4);
    // group by source vertex so each Katz propagation is reused
    let mut katz_cache: Option<(usize, Vec<F>)> = None;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&r| pairs[r].0);
    for r in order {
        let (u, v) = pairs[r];
        let kz = match &katz_cache {
            Some((src, vec)) if *src == u => vec[v],
            _ => {
                let vec = katz_from_source(g, u, katz_beta, katz_max_len)?;
                let x = vec[v];
                katz_cache = Some((u, vec));
                x
            }
        };
        check_pair(g, u, v)?;
        let row = m.row_mut(r);
        row[0] = jaccard(g, u, v)?;
        row[1] = adamic_adar(g, u, v)?;
        row[2] = F::from_usize_lossy(common_neighbors(g, u, v)?);
        row[3] = kz;
    }
    Ok(m)
}

/// Per-snapshot similarity metric for the time-series baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityMetric {
    Cn,
    Aa,
    J,
    /// Preferential attachment, deg(u)*deg(v).
    Pa,
}

impl SimilarityMetric {
    fn raw<F: Scalar>(&self, g: &Snapshot, u: usize, v: usize) -> Result<F> {
        Ok(match self {
            SimilarityMetric::Cn => F::from_usize_lossy(common_neighbors(g, u, v)?),
            SimilarityMetric::Aa => adamic_adar(g, u, v)?,
            SimilarityMetric::J => jaccard(g, u, v)?,
            SimilarityMetric::Pa => {
                check_pair(g, u, v)?;
                F::from_usize_lossy(g.degree(u) * g.degree(v))
            }
        })
    }
}

/// Similarity and connectivity series of one pair over all snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilaritySeries<F> {
    pub pair: Pair,
    pub metric: SimilarityMetric,
    /// Per-snapshot scores, min-max normalized within each snapshot over the
    /// evaluated pair population.
    pub values: Vec<F>,
    /// Per-snapshot connectivity bits of the pair.
    pub adj: Vec<u8>,
}

/// Build similarity series for a pair population. Scores are normalized per
/// snapshot across the population; a snapshot where every pair ties carries
/// no ranking signal and normalizes to zero.
pub fn similarity_series<F: Scalar>(
    net: &DynamicNetwork,
    metric: SimilarityMetric,
    pairs: &[Pair],
) -> Result<Vec<SimilaritySeries<F>>> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("pair list"));
    }
    let t = net.t();
    let mut out: Vec<SimilaritySeries<F>> = pairs
        .iter()
        .map(|&pair| SimilaritySeries {
            pair,
            metric,
            values: Vec::with_capacity(t),
            adj: Vec::with_capacity(t),
        })
        .collect();
    for i in 1..=t {
        let g = net.snapshot(i)?;
        let raw: Vec<F> = pairs
            .iter()
            .map(|&(u, v)| metric.raw(g, u, v))
            .collect::<Result<_>>()?;
        let mut lo = F::infinity();
        let mut hi = F::neg_infinity();
        for &x in &raw {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        let span = hi - lo;
        for (series, &x) in out.iter_mut().zip(raw.iter()) {
            let norm = if span > F::zero() {
                (x - lo) / span
            } else {
                F::zero()
            };
            series.values.push(norm);
            series.adj.push(g.has_edge(series.pair.0, series.pair.1) as u8);
        }
    }
    Ok(out)
}

/// One-step-ahead forecast of a univariate series by least-squares AR(p),
/// p = min(2, t-2). Falls back to lower order when the normal equations are
/// singular, to the target mean at order 0, and to the last value when t < 3.
pub fn ar_forecast<F: Scalar>(xs: &[F]) -> Result<F> {
    let t = xs.len();
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "series too short for forecasting: length {t}"
        )));
    }
    if t == 2 {
        return Ok(xs[1]);
    }
    let mut p = 2.min(t - 2);
    while p >= 1 {
        if let Some(coef) = fit_ar(xs, p) {
            // prediction from the trailing p values
            let mut pred = coef[0];
            for lag in 1..=p {
                pred += coef[lag] * xs[t - lag];
            }
            return Ok(pred);
        }
        p -= 1;
    }
    // order 0: mean of the one-step targets
    let m = F::from_usize_lossy(t - 1);
    Ok(xs[1..].iter().copied().sum::<F>() / m)
}

/// Least-squares AR(p) with intercept via normal equations; None when the
/// system is singular.
fn fit_ar<F: Scalar>(xs: &[F], p: usize) -> Option<Vec<F>> {
    let t = xs.len();
    let dim = p + 1;
    let rows = t - p;
    if rows < dim {
        return None;
    }
    let mut g = vec![vec![F::zero(); dim]; dim];
    let mut rhs = vec![F::zero(); dim];
    for i in p..t {
        let mut x = Vec::with_capacity(dim);
        x.push(F::one());
        for lag in 1..=p {
            x.push(xs[i - lag]);
        }
        for a in 0..dim {
            for b in 0..dim {
                g[a][b] += x[a] * x[b];
            }
            rhs[a] += x[a] * xs[i];
        }
    }
    solve_spd(g, rhs)
}

/// Gaussian elimination with partial pivoting; None on (near-)singularity.
fn solve_spd<F: Scalar>(mut g: Vec<Vec<F>>, mut rhs: Vec<F>) -> Option<Vec<F>> {
    let dim = g.len();
    let scale = g
        .iter()
        .flat_map(|row| row.iter())
        .fold(F::zero(), |acc, &x| acc.max(x.abs()));
    let tol = scale * F::from_f64_lossy(1e-12);
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&a, &b| g[a][col].abs().partial_cmp(&g[b][col].abs()).unwrap())?;
        if g[pivot_row][col].abs() <= tol {
            return None;
        }
        g.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for r in (col + 1)..dim {
            let f = g[r][col] / g[col][col];
            for c in col..dim {
                let sub = f * g[col][c];
                g[r][c] -= sub;
            }
            let sub = f * rhs[col];
            rhs[r] -= sub;
        }
    }
    let mut x = vec![F::zero(); dim];
    for col in (0..dim).rev() {
        let mut s = rhs[col];
        for c in (col + 1)..dim {
            s -= g[col][c] * x[c];
        }
        x[col] = s / g[col][col];
    }
    Some(x)
}

/// Score of a TS-*-Adj predictor: one-step forecast of the similarity series
/// plus one-step forecast of the connectivity series.
pub fn forecast_score<F: Scalar>(series: &SimilaritySeries<F>) -> Result<F> {
    let adj: Vec<F> = series
        .adj
        .iter()
        .map(|&b| F::from_f64_lossy(b as f64))
        .collect();
    Ok(ar_forecast(&series.values)? + ar_forecast(&adj)?)
}

/// Emit baseline scores as CSV lines `u,v,method,score`.
pub fn write_baseline_scores_csv<F: Scalar, W: Write>(
    rows: &[(Pair, &str, F)],
    out: W,
) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "u,v,method,score")?;
    for ((u, v), method, score) in rows {
        writeln!(w, "{u},{v},{method},{score}")?;
    }
    w.flush()?;
    Ok(())
}
