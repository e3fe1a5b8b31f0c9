//! Node-pair input vectors over a snapshot window: per-snapshot adjacency-sum
//! blocks followed by the time-decayed cumulative link history, normalized
//! into [0,1].
//!
//! Layout for a window of T snapshots on an n-vertex network:
//! T blocks of length n (window order), then T history scalars, k = n*T + T.

use std::collections::BTreeSet;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::dense::Matrix;
use crate::dyngraph::{canonical, DynamicNetwork, Pair};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inclusive 1-based snapshot window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub from: usize,
    pub to: usize,
}

impl Window {
    pub fn new(from: usize, to: usize) -> Self {
        Window { from, to }
    }

    pub fn len(&self) -> usize {
        self.to - self.from + 1
    }

    pub fn is_empty(&self) -> bool {
        self.to < self.from
    }

    fn validate(&self, net: &DynamicNetwork) -> Result<()> {
        if self.from < 1 || self.to < self.from || self.to > net.t() {
            return Err(Error::InvalidRange {
                from: self.from,
                to: self.to,
                t: net.t(),
            });
        }
        Ok(())
    }
}

/// Feature vector length for a window: n*T adjacency entries plus T history
/// entries.
pub fn feature_len(n: usize, window: Window) -> usize {
    let t = window.len();
    n * t + t
}

/// The normalized feature vector of one node-pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeature<F> {
    pub u: usize,
    pub v: usize,
    pub window: Window,
    pub values: Vec<F>,
}

fn check_pair(net: &DynamicNetwork, u: usize, v: usize) -> Result<Pair> {
    if u == v {
        return Err(Error::SelfPair(u));
    }
    for id in [u, v] {
        if id >= net.n() {
            return Err(Error::VertexOutOfRange { id, n: net.n() });
        }
    }
    Ok(canonical(u, v))
}

/// Element-wise sum of the two endpoints' adjacency vectors at snapshot `i`;
/// entries are 0, 1 or 2.
pub fn pair_adjacency_block<F: Scalar>(
    net: &DynamicNetwork,
    i: usize,
    u: usize,
    v: usize,
) -> Result<Vec<F>> {
    check_pair(net, u, v)?;
    let au = net.adjacency_vector(i, u)?;
    let av = net.adjacency_vector(i, v)?;
    Ok(au
        .iter()
        .zip(av.iter())
        .map(|(&a, &b)| F::from_usize_lossy((a + b) as usize))
        .collect())
}

/// Link history of the pair over the window, weighted by the window-relative
/// linear decay j/T so the most recent snapshot always has weight 1.
pub fn weighted_link_history<F: Scalar>(
    net: &DynamicNetwork,
    window: Window,
    u: usize,
    v: usize,
) -> Result<Vec<F>> {
    window.validate(net)?;
    check_pair(net, u, v)?;
    let t = window.len();
    let tf = F::from_usize_lossy(t);
    let mut out = Vec::with_capacity(t);
    for j in 1..=t {
        let snap = net.snapshot(window.from + j - 1)?;
        let linked = if snap.has_edge(u, v) {
            F::one()
        } else {
            F::zero()
        };
        out.push(F::from_usize_lossy(j) / tf * linked);
    }
    Ok(out)
}

/// Running cumulative sum of a weighted link history.
pub fn weighted_cumulative_link_history<F: Scalar>(wlh: &[F]) -> Vec<F> {
    let mut acc = F::zero();
    wlh.iter()
        .map(|&w| {
            acc += w;
            acc
        })
        .collect()
}

/// Build the full normalized feature vector e for a pair: adjacency-sum
/// blocks divided by 2, cumulative history divided by its maximum attainable
/// value (T+1)/2, keeping every entry in [0,1].
pub fn build_pair_feature<F: Scalar>(
    net: &DynamicNetwork,
    window: Window,
    u: usize,
    v: usize,
) -> Result<PairFeature<F>> {
    window.validate(net)?;
    let (u, v) = check_pair(net, u, v)?;
    let t = window.len();
    let half = F::from_f64_lossy(0.5);
    let mut values = Vec::with_capacity(feature_len(net.n(), window));
    for i in window.from..=window.to {
        let block = pair_adjacency_block::<F>(net, i, u, v)?;
        values.extend(block.into_iter().map(|x| x * half));
    }
    let wlh = weighted_link_history::<F>(net, window, u, v)?;
    let wclh = weighted_cumulative_link_history(&wlh);
    let cap = F::from_usize_lossy(t + 1) * half;
    values.extend(wclh.into_iter().map(|x| x / cap));
    debug_assert_eq!(values.len(), feature_len(net.n(), window));
    Ok(PairFeature {
        u,
        v,
        window,
        values,
    })
}

/// Stack pair features into a dataset matrix, one row per pair in input
/// order. Pairs must be distinct.
pub fn build_dataset<F: Scalar>(
    net: &DynamicNetwork,
    window: Window,
    pairs: &[Pair],
) -> Result<Matrix<F>> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("pair list"));
    }
    let mut seen = BTreeSet::new();
    for &(u, v) in pairs {
        if !seen.insert(canonical(u, v)) {
            return Err(Error::DuplicatePair(u, v));
        }
    }
    let k = feature_len(net.n(), window);
    let mut m = Matrix::zeros(pairs.len(), k);
    for (r, &(u, v)) in pairs.iter().enumerate() {
        let feat = build_pair_feature::<F>(net, window, u, v)?;
        m.row_mut(r).copy_from_slice(&feat.values);
    }
    Ok(m)
}

/// Dump a dataset: header `rows k`, then one row per line of space-separated
/// decimals with fixed 9-digit precision.
pub fn write_dataset<F: Scalar, W: Write>(m: &Matrix<F>, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for row in m.iter_rows() {
        let mut first = true;
        for v in row {
            if !first {
                write!(w, " ")?;
            }
            write!(w, "{v:.9}")?;
            first = false;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset_file<F: Scalar>(m: &Matrix<F>, path: &Path) -> Result<()> {
    write_dataset(m, std::fs::File::create(path)?)
}

pub fn read_dataset<F: Scalar, R: BufRead>(reader: R) -> Result<Matrix<F>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or(Error::Format("missing `rows k` header".into()))??;
    let mut it = header.split_whitespace();
    let (rows, cols): (usize, usize) = match (it.next(), it.next()) {
        (Some(a), Some(b)) => (
            a.parse()
                .map_err(|e| Error::Format(format!("bad row count: {e}")))?,
            b.parse()
                .map_err(|e| Error::Format(format!("bad column count: {e}")))?,
        ),
        _ => return Err(Error::Format("header must be `rows k`".into())),
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split_whitespace() {
            let x: f64 = tok
                .parse()
                .map_err(|e| Error::Format(format!("line {}: bad value: {e}", lineno + 2)))?;
            data.push(F::from_f64_lossy(x));
        }
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn read_dataset_file<F: Scalar>(path: &Path) -> Result<Matrix<F>> {
    read_dataset(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyngraph::Snapshot;

    /// n=3, G1={(0,1)}, G2={(0,1),(1,2)} — the worked example network.
    fn worked_net() -> DynamicNetwork {
        let s1 = Snapshot::new(1, 3, vec![(0, 1)]).unwrap();
        let s2 = Snapshot::new(2, 3, vec![(0, 1), (1, 2)]).unwrap();
        DynamicNetwork::new(3, vec![s1, s2]).unwrap()
    }

    #[test]
    fn adjacency_block_sums_endpoints() {
        let net = worked_net();
        // G2 edges {(0,1),(1,2)}: a^0=[0,1,0], a^2=[0,1,0] -> [0,2,0]
        let b: Vec<f64> = pair_adjacency_block(&net, 2, 0, 2).unwrap();
        assert_eq!(b, vec![0.0, 2.0, 0.0]);
        // pair (0,1) in G2: a^0=[0,1,0], a^1=[1,0,1] -> [1,1,1]
        let b: Vec<f64> = pair_adjacency_block(&net, 2, 0, 1).unwrap();
        assert_eq!(b, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn adjacency_block_edgeless_is_zero() {
        let s1 = Snapshot::new(1, 3, Vec::new()).unwrap();
        let net = DynamicNetwork::new(3, vec![s1]).unwrap();
        let b: Vec<f64> = pair_adjacency_block(&net, 1, 0, 2).unwrap();
        assert_eq!(b, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn adjacency_block_rejects_self_pair() {
        let net = worked_net();
        assert!(matches!(
            pair_adjacency_block::<f64>(&net, 1, 1, 1),
            Err(Error::SelfPair(1))
        ));
        assert!(pair_adjacency_block::<f64>(&net, 1, 0, 7).is_err());
    }

    #[test]
    fn link_history_weights_are_window_relative() {
        let net = worked_net();
        // (0,1) linked in both of T=2 snapshots -> [1/2, 1]
        let wlh: Vec<f64> = weighted_link_history(&net, Window::new(1, 2), 0, 1).unwrap();
        assert_eq!(wlh, vec![0.5, 1.0]);
        // linked only in the last snapshot -> [0, 1]
        let wlh: Vec<f64> = weighted_link_history(&net, Window::new(1, 2), 1, 2).unwrap();
        assert_eq!(wlh, vec![0.0, 1.0]);
        // never linked -> zeros
        let wlh: Vec<f64> = weighted_link_history(&net, Window::new(1, 2), 0, 2).unwrap();
        assert_eq!(wlh, vec![0.0, 0.0]);
    }

    #[test]
    fn cumulative_history_is_running_sum() {
        assert_eq!(
            weighted_cumulative_link_history(&[0.5_f64, 1.0]),
            vec![0.5, 1.5]
        );
        assert_eq!(
            weighted_cumulative_link_history(&[0.0_f64, 1.0]),
            vec![0.0, 1.0]
        );
        assert_eq!(
            weighted_cumulative_link_history(&[0.0_f64, 0.0]),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn worked_example_pair_02() {
        let net = worked_net();
        let f: PairFeature<f64> = build_pair_feature(&net, Window::new(1, 2), 0, 2).unwrap();
        assert_eq!(f.values, vec![0.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn worked_example_pair_01_history_tail() {
        let net = worked_net();
        let f: PairFeature<f64> = build_pair_feature(&net, Window::new(1, 2), 0, 1).unwrap();
        // blocks: [1,1,0]/2, [1,1,1]/2; wclh [0.5,1.5]/1.5
        assert_eq!(f.values[..6], [0.5, 0.5, 0.0, 0.5, 0.5, 0.5]);
        assert!((f.values[6] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.values[7], 1.0);
    }

    #[test]
    fn edgeless_network_gives_zero_vector() {
        let s1 = Snapshot::new(1, 3, Vec::new()).unwrap();
        let s2 = Snapshot::new(2, 3, Vec::new()).unwrap();
        let net = DynamicNetwork::new(3, vec![s1, s2]).unwrap();
        let f: PairFeature<f64> = build_pair_feature(&net, Window::new(1, 2), 2, 0).unwrap();
        assert_eq!(f.values, vec![0.0; 8]);
    }

    #[test]
    fn feature_is_symmetric_in_pair_order() {
        let net = worked_net();
        for (u, v) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let a: PairFeature<f64> = build_pair_feature(&net, Window::new(1, 2), u, v).unwrap();
            let b: PairFeature<f64> = build_pair_feature(&net, Window::new(1, 2), v, u).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn feature_entries_stay_in_unit_interval_and_wclh_monotone() {
        // Random-ish dense little network exercised over all windows.
        let s1 = Snapshot::new(1, 4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let s2 = Snapshot::new(2, 4, vec![(0, 1), (0, 2), (1, 3)]).unwrap();
        let s3 = Snapshot::new(3, 4, vec![(0, 1), (1, 2)]).unwrap();
        let net = DynamicNetwork::new(4, vec![s1, s2, s3]).unwrap();
        for from in 1..=3 {
            for to in from..=3 {
                let w = Window::new(from, to);
                for u in 0..4 {
                    for v in (u + 1)..4 {
                        let f: PairFeature<f64> = build_pair_feature(&net, w, u, v).unwrap();
                        assert_eq!(f.values.len(), feature_len(4, w));
                        assert!(f.values.iter().all(|&x| (0.0..=1.0).contains(&x)));
                        let hist = &f.values[4 * w.len()..];
                        for pair in hist.windows(2) {
                            assert!(pair[1] >= pair[0]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn recency_raises_final_history_value() {
        // Pair linked exactly once: a later link must leave a strictly larger
        // final cumulative value.
        for t in 2..=10usize {
            let mut last = -1.0f64;
            for linked_at in 1..=t {
                let snaps: Vec<Snapshot> = (1..=t)
                    .map(|i| {
                        let edges = if i == linked_at { vec![(0, 1)] } else { vec![] };
                        Snapshot::new(i, 2, edges).unwrap()
                    })
                    .collect();
                let net = DynamicNetwork::new(2, snaps).unwrap();
                let f: PairFeature<f64> =
                    build_pair_feature(&net, Window::new(1, t), 0, 1).unwrap();
                let final_wclh = *f.values.last().unwrap();
                assert!(
                    final_wclh > last,
                    "t={t} linked_at={linked_at}: {final_wclh} <= {last}"
                );
                last = final_wclh;
            }
        }
    }

    #[test]
    fn dataset_rows_follow_input_order() {
        let net = worked_net();
        let w = Window::new(1, 2);
        let pairs = vec![(0, 2), (0, 1)];
        let m: Matrix<f64> = build_dataset(&net, w, &pairs).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 8);
        let f02: PairFeature<f64> = build_pair_feature(&net, w, 0, 2).unwrap();
        let f01: PairFeature<f64> = build_pair_feature(&net, w, 0, 1).unwrap();
        assert_eq!(m.row(0), f02.values.as_slice());
        assert_eq!(m.row(1), f01.values.as_slice());
        // permuting input pairs permutes rows
        let m2: Matrix<f64> = build_dataset(&net, w, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(m2.row(0), m.row(1));
        assert_eq!(m2.row(1), m.row(0));
    }

    #[test]
    fn dataset_rejects_duplicates() {
        let net = worked_net();
        let w = Window::new(1, 2);
        assert!(matches!(
            build_dataset::<f64>(&net, w, &[(0, 1), (1, 0)]),
            Err(Error::DuplicatePair(1, 0))
        ));
    }

    #[test]
    fn window_length_formula() {
        let snaps: Vec<Snapshot> = (1..=4)
            .map(|i| Snapshot::new(i, 5, vec![(0, 1)]).unwrap())
            .collect();
        let net = DynamicNetwork::new(5, snaps).unwrap();
        let m: Matrix<f64> = build_dataset(&net, Window::new(1, 3), &[(0, 1)]).unwrap();
        assert_eq!(m.cols(), 3 * 5 + 3);
    }

    #[test]
    fn dataset_dump_round_trip_is_stable() {
        let net = worked_net();
        let m: Matrix<f64> =
            build_dataset(&net, Window::new(1, 2), &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let mut buf = Vec::new();
        write_dataset(&m, &mut buf).unwrap();
        let m1: Matrix<f64> = read_dataset(std::io::BufReader::new(buf.as_slice())).unwrap();
        // The dump quantizes to 9 decimal digits; once a matrix has passed
        // through the format it round-trips bit-exactly.
        let mut buf2 = Vec::new();
        write_dataset(&m1, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
        let m2: Matrix<f64> = read_dataset(std::io::BufReader::new(buf2.as_slice())).unwrap();
        assert_eq!(m1, m2);
    }
}
