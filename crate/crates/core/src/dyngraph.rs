//! Dynamic-network data model: ordered snapshots over a fixed vertex set,
//! ingestion of timestamped edge lists, vertex filtering, and collapsing.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub type Pair = (usize, usize);

/// Put a pair in (min,max) order.
pub fn canonical(u: usize, v: usize) -> Pair {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// One time-stamped graph snapshot. Edges are unordered pairs stored in
/// canonical (min,max) order; no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    index: usize,
    n: usize,
    edges: BTreeSet<Pair>,
    neighbors: Vec<Vec<usize>>,
}

impl Snapshot {
    pub fn new(index: usize, n: usize, edges: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::SelfPair(u));
            }
            if u >= n {
                return Err(Error::VertexOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(Error::VertexOutOfRange { id: v, n });
            }
            set.insert(canonical(u, v));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &set {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for adj in &mut neighbors {
            adj.sort_unstable();
        }
        Ok(Snapshot {
            index,
            n,
            edges: set,
            neighbors,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&canonical(u, v))
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = Pair> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.neighbors[u].len()
    }

    fn check_vertex(&self, u: usize) -> Result<()> {
        if u >= self.n {
            return Err(Error::VertexOutOfRange { id: u, n: self.n });
        }
        Ok(())
    }

    /// 0/1 adjacency row for vertex `u`; entry `u` itself is always 0.
    pub fn adjacency_vector(&self, u: usize) -> Result<Vec<u8>> {
        self.check_vertex(u)?;
        let mut row = vec![0u8; self.n];
        for &v in self.neighbors(u) {
            row[v] = 1;
        }
        Ok(row)
    }
}

/// Ordered snapshot sequence over a fixed vertex set.
///
/// Snapshot ordinals are 1-based and consecutive. A single-snapshot network
/// is representable (ingestion can produce one); operations that need history
/// state their own minimum length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicNetwork {
    n: usize,
    snapshots: Vec<Snapshot>,
}

impl DynamicNetwork {
    pub fn new(n: usize, snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptyInput("snapshot list"));
        }
        for (i, s) in snapshots.iter().enumerate() {
            if s.n() != n {
                return Err(Error::InvalidParameter(format!(
                    "snapshot {} has n={}, expected {}",
                    i + 1,
                    s.n(),
                    n
                )));
            }
            if s.index() != i + 1 {
                return Err(Error::InvalidParameter(format!(
                    "snapshot at position {} has ordinal {}, expected consecutive 1-based ordinals",
                    i,
                    s.index()
                )));
            }
        }
        Ok(DynamicNetwork { n, snapshots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of snapshots, t.
    pub fn t(&self) -> usize {
        self.snapshots.len()
    }

    /// 1-based snapshot access.
    pub fn snapshot(&self, i: usize) -> Result<&Snapshot> {
        if i < 1 || i > self.t() {
            return Err(Error::SnapshotOutOfRange {
                index: i,
                max: self.t(),
            });
        }
        Ok(&self.snapshots[i - 1])
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Adjacency vector of vertex `u` at snapshot `i` (1-based).
    pub fn adjacency_vector(&self, i: usize, u: usize) -> Result<Vec<u8>> {
        self.snapshot(i)?.adjacency_vector(u)
    }

    /// Truncate to the first `t` snapshots (used to hold out trailing
    /// snapshots for evaluation).
    pub fn truncated(&self, t: usize) -> Result<DynamicNetwork> {
        if t < 1 || t > self.t() {
            return Err(Error::SnapshotOutOfRange {
                index: t,
                max: self.t(),
            });
        }
        DynamicNetwork::new(self.n, self.snapshots[..t].to_vec())
    }
}

/// Union of the edge sets of snapshots `from..=to`; the result keeps `n` and
/// carries ordinal `to`.
pub fn collapse(net: &DynamicNetwork, from: usize, to: usize) -> Result<Snapshot> {
    if from < 1 || to < from || to > net.t() {
        return Err(Error::InvalidRange {
            from,
            to,
            t: net.t(),
        });
    }
    let mut edges = BTreeSet::new();
    for i in from..=to {
        edges.extend(net.snapshot(i)?.edges());
    }
    Snapshot::new(to, net.n(), edges)
}

/// A raw timestamped interaction between two keyed nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub time: f64,
}

impl EdgeRecord {
    pub fn new(u: impl Into<String>, v: impl Into<String>, time: f64) -> Self {
        EdgeRecord {
            u: u.into(),
            v: v.into(),
            time,
        }
    }
}

/// Ingestion parameters: fixed-width window aggregation plus activity and
/// degree filtering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestSpec {
    /// Raw time units aggregated into one snapshot.
    pub window_length: f64,
    /// Keep vertices incident to >=1 edge in at least this many snapshots.
    pub min_active_snapshots: usize,
    /// Keep vertices whose degree in the collapsed network is at least this.
    pub min_degree: usize,
}

impl IngestSpec {
    pub fn new(window_length: f64, min_active_snapshots: usize, min_degree: usize) -> Result<Self> {
        if !window_length.is_finite() || window_length <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "window_length must be positive and finite, got {window_length}"
            )));
        }
        Ok(IngestSpec {
            window_length,
            min_active_snapshots,
            min_degree,
        })
    }
}

/// Aggregate timestamped records into a dynamic network.
///
/// Raw keys are densely relabeled in order of first appearance; each record
/// lands in snapshot `floor((time - min_time)/window_length) + 1` (left-closed
/// fixed-width windows). Self-loops are dropped, duplicates within a window
/// collapse to one edge. Vertices below the activity or collapsed-degree
/// thresholds are removed and ids re-densified.
pub fn ingest(records: &[EdgeRecord], spec: &IngestSpec) -> Result<DynamicNetwork> {
    if records.is_empty() {
        return Err(Error::EmptyInput("edge records"));
    }
    let min_time = records
        .iter()
        .map(|r| r.time)
        .fold(f64::INFINITY, f64::min);

    // Dense relabeling by first appearance, self-loops dropped entirely.
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut n_raw = 0usize;
    let mut binned: Vec<(usize, usize, usize)> = Vec::with_capacity(records.len());
    let mut t_count = 0usize;
    for r in records {
        if r.u == r.v {
            continue; // self-loop
        }
        let w = ((r.time - min_time) / spec.window_length).floor() as usize + 1;
        t_count = t_count.max(w);
        let u = *ids.entry(r.u.as_str()).or_insert_with(|| {
            let id = n_raw;
            n_raw += 1;
            id
        });
        let v = *ids.entry(r.v.as_str()).or_insert_with(|| {
            let id = n_raw;
            n_raw += 1;
            id
        });
        binned.push((w, u, v));
    }
    if n_raw == 0 {
        return Err(Error::AllVerticesFiltered {
            total: 0,
            min_active: spec.min_active_snapshots,
            min_degree: spec.min_degree,
        });
    }

    let mut per_window: Vec<BTreeSet<Pair>> = vec![BTreeSet::new(); t_count];
    for (w, u, v) in binned {
        per_window[w - 1].insert(canonical(u, v));
    }

    // Activity per vertex and degree on the collapsed (union) network.
    let mut active = vec![0usize; n_raw];
    let mut union_edges: BTreeSet<Pair> = BTreeSet::new();
    for window in &per_window {
        let mut seen = vec![false; n_raw];
        for &(u, v) in window {
            seen[u] = true;
            seen[v] = true;
            union_edges.insert((u, v));
        }
        for (v, s) in seen.iter().enumerate() {
            if *s {
                active[v] += 1;
            }
        }
    }
    let mut collapsed_degree = vec![0usize; n_raw];
    for &(u, v) in &union_edges {
        collapsed_degree[u] += 1;
        collapsed_degree[v] += 1;
    }

    let mut remap = vec![usize::MAX; n_raw];
    let mut n = 0usize;
    for v in 0..n_raw {
        if active[v] >= spec.min_active_snapshots && collapsed_degree[v] >= spec.min_degree {
            remap[v] = n;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::AllVerticesFiltered {
            total: n_raw,
            min_active: spec.min_active_snapshots,
            min_degree: spec.min_degree,
        });
    }

    let mut snapshots = Vec::with_capacity(t_count);
    for (i, window) in per_window.iter().enumerate() {
        let edges = window
            .iter()
            .filter(|&&(u, v)| remap[u] != usize::MAX && remap[v] != usize::MAX)
            .map(|&(u, v)| (remap[u], remap[v]));
        snapshots.push(Snapshot::new(i + 1, n, edges)?);
    }
    DynamicNetwork::new(n, snapshots)
}

/// Read a `u<TAB>v<TAB>time` edge list; `#` comment lines and blanks ignored.
pub fn read_edge_list(path: &Path) -> Result<Vec<EdgeRecord>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let fname = path.display().to_string();
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split('\t');
        let (u, v, time) = match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(v), Some(t)) => (u, v, t),
            _ => {
                return Err(Error::Parse {
                    file: fname,
                    line: lineno + 1,
                    msg: "expected `u<TAB>v<TAB>time`".into(),
                })
            }
        };
        let time: f64 = time.parse().map_err(|e| Error::Parse {
            file: fname.clone(),
            line: lineno + 1,
            msg: format!("bad timestamp `{time}`: {e}"),
        })?;
        records.push(EdgeRecord::new(u, v, time));
    }
    Ok(records)
}

/// Write the canonical snapshot file: header `n t`, then `i u v` lines with
/// 1-based snapshot ordinals and 0-based vertex ids, sorted by (i,u,v).
pub fn write_snapshots<W: Write>(net: &DynamicNetwork, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{} {}", net.n(), net.t())?;
    for snap in net.snapshots() {
        for (u, v) in snap.edges() {
            writeln!(w, "{} {} {}", snap.index(), u, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots_file(net: &DynamicNetwork, path: &Path) -> Result<()> {
    write_snapshots(net, std::fs::File::create(path)?)
}

/// Read a canonical snapshot file back into a network.
pub fn read_snapshots<R: BufRead>(reader: R) -> Result<DynamicNetwork> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or(Error::Format("missing `n t` header".into()))??;
    let mut it = header.split_whitespace();
    let (n, t): (usize, usize) = match (it.next(), it.next()) {
        (Some(a), Some(b)) => (
            a.parse()
                .map_err(|e| Error::Format(format!("bad n in header: {e}")))?,
            b.parse()
                .map_err(|e| Error::Format(format!("bad t in header: {e}")))?,
        ),
        _ => return Err(Error::Format("header must be `n t`".into())),
    };
    let mut per: Vec<Vec<Pair>> = vec![Vec::new(); t];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let parse = |s: Option<&str>, what: &str| -> Result<usize> {
            s.ok_or_else(|| Error::Format(format!("line {}: missing {what}", lineno + 2)))?
                .parse()
                .map_err(|e| Error::Format(format!("line {}: bad {what}: {e}", lineno + 2)))
        };
        let i = parse(it.next(), "snapshot ordinal")?;
        let u = parse(it.next(), "vertex id")?;
        let v = parse(it.next(), "vertex id")?;
        if i < 1 || i > t {
            return Err(Error::SnapshotOutOfRange { index: i, max: t });
        }
        per[i - 1].push((u, v));
    }
    let snapshots = per
        .into_iter()
        .enumerate()
        .map(|(i, edges)| Snapshot::new(i + 1, n, edges))
        .collect::<Result<Vec<_>>>()?;
    DynamicNetwork::new(n, snapshots)
}

pub fn read_snapshots_file(path: &Path) -> Result<DynamicNetwork> {
    read_snapshots(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec0(window: f64) -> IngestSpec {
        IngestSpec::new(window, 0, 0).unwrap()
    }

    fn records(rs: &[(&str, &str, f64)]) -> Vec<EdgeRecord> {
        rs.iter().map(|&(u, v, t)| EdgeRecord::new(u, v, t)).collect()
    }

    #[test]
    fn ingest_bins_into_single_snapshot() {
        let net = ingest(&records(&[("a", "b", 0.0), ("b", "c", 5.0)]), &spec0(10.0)).unwrap();
        assert_eq!(net.t(), 1);
        assert_eq!(net.n(), 3);
        let edges: Vec<_> = net.snapshot(1).unwrap().edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn ingest_splits_windows() {
        let net = ingest(&records(&[("a", "b", 0.0), ("a", "b", 15.0)]), &spec0(10.0)).unwrap();
        assert_eq!(net.t(), 2);
        for i in 1..=2 {
            let edges: Vec<_> = net.snapshot(i).unwrap().edges().collect();
            assert_eq!(edges, vec![(0, 1)]);
        }
    }

    #[test]
    fn ingest_rejects_empty() {
        assert!(matches!(
            ingest(&[], &spec0(1.0)),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn ingest_drops_self_loops_and_duplicates() {
        let net = ingest(
            &records(&[("a", "a", 0.0), ("a", "b", 1.0), ("b", "a", 2.0)]),
            &spec0(10.0),
        )
        .unwrap();
        assert_eq!(net.n(), 2);
        assert_eq!(net.snapshot(1).unwrap().edge_count(), 1);
    }

    #[test]
    fn ingest_all_self_loops_errors() {
        assert!(matches!(
            ingest(&records(&[("a", "a", 0.0)]), &spec0(1.0)),
            Err(Error::AllVerticesFiltered { .. })
        ));
    }

    #[test]
    fn ingest_filters_by_activity_and_redensifies() {
        // c appears in one snapshot only; require 2 active snapshots.
        let spec = IngestSpec::new(10.0, 2, 0).unwrap();
        let net = ingest(
            &records(&[
                ("a", "b", 0.0),
                ("a", "c", 5.0),
                ("a", "b", 15.0),
            ]),
            &spec,
        )
        .unwrap();
        assert_eq!(net.n(), 2); // a,b survive; c removed, ids re-densified
        assert_eq!(net.t(), 2);
        assert!(net.snapshot(1).unwrap().has_edge(0, 1));
        assert!(net.snapshot(2).unwrap().has_edge(0, 1));
    }

    #[test]
    fn ingest_filters_by_collapsed_degree() {
        let spec = IngestSpec::new(100.0, 0, 2).unwrap();
        // Collapsed degrees: a=2 (b,c), b=2 (a,c), c=2 (a,b), d=1 (a).
        let recs = records(&[
            ("a", "b", 0.0),
            ("a", "c", 1.0),
            ("b", "c", 2.0),
            ("a", "d", 3.0),
        ]);
        let net = ingest(&recs, &spec).unwrap();
        assert_eq!(net.n(), 3);
        assert!(matches!(
            ingest(&recs, &IngestSpec::new(100.0, 0, 10).unwrap()),
            Err(Error::AllVerticesFiltered { total: 4, .. })
        ));
    }

    #[test]
    fn adjacency_vector_matches_definition() {
        let snap = Snapshot::new(1, 3, vec![(0, 1), (1, 2)]).unwrap();
        let net = DynamicNetwork::new(3, vec![snap]).unwrap();
        assert_eq!(net.adjacency_vector(1, 1).unwrap(), vec![1, 0, 1]);
        assert_eq!(net.adjacency_vector(1, 0).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn adjacency_vector_of_edgeless_snapshot_is_zero() {
        let snap = Snapshot::new(1, 4, Vec::new()).unwrap();
        let net = DynamicNetwork::new(4, vec![snap]).unwrap();
        assert_eq!(net.adjacency_vector(1, 2).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn adjacency_vector_bounds() {
        let snap = Snapshot::new(1, 3, vec![(0, 1)]).unwrap();
        let net = DynamicNetwork::new(3, vec![snap]).unwrap();
        assert!(net.adjacency_vector(2, 0).is_err());
        assert!(net.adjacency_vector(1, 3).is_err());
    }

    #[test]
    fn adjacency_sums_to_degree() {
        let net = two_snapshot_net();
        for i in 1..=net.t() {
            let snap = net.snapshot(i).unwrap();
            for u in 0..net.n() {
                let row = net.adjacency_vector(i, u).unwrap();
                let sum: usize = row.iter().map(|&b| b as usize).sum();
                assert_eq!(sum, snap.degree(u));
            }
        }
    }

    fn two_snapshot_net() -> DynamicNetwork {
        let s1 = Snapshot::new(1, 4, vec![(0, 1), (2, 3)]).unwrap();
        let s2 = Snapshot::new(2, 4, vec![(1, 2), (0, 1)]).unwrap();
        DynamicNetwork::new(4, vec![s1, s2]).unwrap()
    }

    #[test]
    fn collapse_is_union() {
        let net = two_snapshot_net();
        let g = collapse(&net, 1, 2).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.n(), 4);
    }

    #[test]
    fn collapse_single_is_identity() {
        let net = two_snapshot_net();
        let g = collapse(&net, 2, 2).unwrap();
        let want: Vec<_> = net.snapshot(2).unwrap().edges().collect();
        let got: Vec<_> = g.edges().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn collapse_idempotent_and_covers_every_edge_once() {
        let s1 = Snapshot::new(1, 6, vec![(4, 5), (0, 1)]).unwrap();
        let s2 = Snapshot::new(2, 6, vec![(4, 5), (3, 5), (0, 1)]).unwrap();
        let s3 = Snapshot::new(3, 6, vec![(3, 5), (1, 2)]).unwrap();
        let net = DynamicNetwork::new(6, vec![s1, s2, s3]).unwrap();
        let g = collapse(&net, 1, 3).unwrap();
        let mut union = BTreeSet::new();
        for i in 1..=3 {
            union.extend(net.snapshot(i).unwrap().edges());
        }
        let got: BTreeSet<_> = g.edges().collect();
        assert_eq!(got, union);
        assert!(collapse(&net, 1, 4).is_err());
        assert!(collapse(&net, 0, 2).is_err());
    }

    #[test]
    fn snapshot_rejects_bad_edges() {
        assert!(Snapshot::new(1, 3, vec![(1, 1)]).is_err());
        assert!(Snapshot::new(1, 3, vec![(0, 3)]).is_err());
    }

    #[test]
    fn network_requires_consecutive_ordinals_and_same_n() {
        let s1 = Snapshot::new(1, 3, vec![(0, 1)]).unwrap();
        let s3 = Snapshot::new(3, 3, vec![(0, 1)]).unwrap();
        assert!(DynamicNetwork::new(3, vec![s1.clone(), s3]).is_err());
        let s2_bad_n = Snapshot::new(2, 4, vec![(0, 1)]).unwrap();
        assert!(DynamicNetwork::new(3, vec![s1, s2_bad_n]).is_err());
    }

    #[test]
    fn snapshot_file_round_trip() {
        let net = two_snapshot_net();
        let mut buf = Vec::new();
        write_snapshots(&net, &mut buf).unwrap();
        let back = read_snapshots(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back, net);
        // Re-emitting yields identical bytes.
        let mut buf2 = Vec::new();
        write_snapshots(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn snapshot_file_preserves_empty_snapshots() {
        let s1 = Snapshot::new(1, 3, vec![(0, 2)]).unwrap();
        let s2 = Snapshot::new(2, 3, Vec::new()).unwrap();
        let s3 = Snapshot::new(3, 3, vec![(1, 2)]).unwrap();
        let net = DynamicNetwork::new(3, vec![s1, s2, s3]).unwrap();
        let mut buf = Vec::new();
        write_snapshots(&net, &mut buf).unwrap();
        let back = read_snapshots(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn ingest_round_trips_through_canonical_records() {
        let net = ingest(
            &records(&[
                ("x", "y", 0.0),
                ("y", "z", 3.0),
                ("x", "z", 12.0),
                ("x", "y", 13.0),
            ]),
            &spec0(10.0),
        )
        .unwrap();
        // Feed the canonical edges back through ingest with unit windows.
        let mut again = Vec::new();
        for snap in net.snapshots() {
            for (u, v) in snap.edges() {
                again.push(EdgeRecord::new(
                    u.to_string(),
                    v.to_string(),
                    snap.index() as f64,
                ));
            }
        }
        let net2 = ingest(&again, &spec0(1.0)).unwrap();
        // Vertex ids may be permuted by first-appearance relabeling, but here
        // canonical order preserves them: check full equality of edge sets.
        assert_eq!(net2.t(), net.t());
        assert_eq!(net2.n(), net.n());
        for i in 1..=net.t() {
            let a: Vec<_> = net.snapshot(i).unwrap().edges().collect();
            let b: Vec<_> = net2.snapshot(i).unwrap().edges().collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn edge_list_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.tsv");
        std::fs::write(&path, "# comment\na\tb\t0\n\nb\tc\t5\n").unwrap();
        let recs = read_edge_list(&path).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0], EdgeRecord::new("a", "b", 0.0));

        std::fs::write(&path, "a b 0\n").unwrap();
        assert!(matches!(read_edge_list(&path), Err(Error::Parse { .. })));
    }
}
