//! Minimal spanning trees: dense Prim (with insertion ranks), Kruskal as a
//! cross-check, and exhaustive Prüfer enumeration as a small-`n` oracle.
//!
//! All builders use fully specified tie-breaking so that trees over grids
//! and fractal approximants, where equal edge lengths are common, are
//! reproducible bit for bit.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::record::Sig17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builder {
    Prim,
    Kruskal,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub n: usize,
    pub edges: Vec<Edge>,
    /// Step at which each vertex joined a Prim tree; the root has rank 0.
    pub insertion_rank: Option<Vec<usize>>,
    pub builder: Builder,
}

impl SpanningTree {
    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.iter().map(|e| e.length)
    }

    /// Edge lengths in ascending order.
    pub fn sorted_lengths(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.lengths().collect();
        l.sort_by(f64::total_cmp);
        l
    }

    /// The endpoint of `edge` that joined the tree last.
    pub fn last_entered(&self, edge: &Edge) -> Option<usize> {
        let rank = self.insertion_rank.as_ref()?;
        Some(if rank[edge.u] > rank[edge.v] {
            edge.u
        } else {
            edge.v
        })
    }

    /// Checks the structural invariants: `n - 1` edges forming a connected
    /// acyclic graph, and (for ranked trees) a rank permutation where every
    /// edge has exactly one later endpoint.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::input("tree over zero vertices"));
        }
        if self.edges.len() != self.n - 1 {
            return Err(Error::input(format!(
                "tree over {} vertices has {} edges",
                self.n,
                self.edges.len()
            )));
        }
        let mut dsu = DisjointSets::new(self.n);
        for e in &self.edges {
            if e.u >= self.n || e.v >= self.n {
                return Err(Error::input(format!(
                    "edge ({}, {}) out of range",
                    e.u, e.v
                )));
            }
            if !(e.length >= 0.0 && e.length.is_finite()) {
                return Err(Error::input(format!(
                    "edge ({}, {}) has length {}",
                    e.u, e.v, e.length
                )));
            }
            if !dsu.union(e.u, e.v) {
                return Err(Error::input(format!(
                    "edge ({}, {}) closes a cycle",
                    e.u, e.v
                )));
            }
        }
        if let Some(rank) = &self.insertion_rank {
            if rank.len() != self.n {
                return Err(Error::input("insertion ranks do not cover every vertex"));
            }
            let mut seen = vec![false; self.n];
            for &r in rank {
                if r >= self.n || std::mem::replace(&mut seen[r], true) {
                    return Err(Error::input("insertion ranks are not a permutation"));
                }
            }
            if self.edges.iter().any(|e| rank[e.u] == rank[e.v]) {
                return Err(Error::input("edge endpoints share an insertion rank"));
            }
        }
        Ok(())
    }
}

/// Sum of edge lengths; zero for a single vertex.
pub fn tree_total_length(tree: &SpanningTree) -> f64 {
    tree.sorted_lengths().iter().sum()
}

/// Dense `O(n^2)` Prim starting at `root`.
///
/// Ties between equally close outside vertices go to the smallest vertex
/// index; ties between equally long connecting edges go to the smallest tree
/// endpoint. Each edge is stored as `(tree endpoint, new vertex)`.
pub fn build_mst_prim(cloud: &PointCloud, metric: &Metric, root: usize) -> Result<SpanningTree> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::input(
            "cannot build a spanning tree over an empty cloud",
        ));
    }
    if root >= n {
        return Err(Error::input(format!(
            "root {root} out of range for {n} points"
        )));
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut rank = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);

    let mut current = root;
    in_tree[root] = true;
    for step in 1..n {
        let p = cloud.point(current);
        let mut next = usize::MAX;
        let mut next_dist = f64::INFINITY;
        for w in 0..n {
            if in_tree[w] {
                continue;
            }
            let d = metric.eval(p, cloud.point(w));
            if d < best[w] || (d == best[w] && current < parent[w]) {
                best[w] = d;
                parent[w] = current;
            }
            if best[w] < next_dist || next == usize::MAX {
                next = w;
                next_dist = best[w];
            }
        }
        in_tree[next] = true;
        rank[next] = step;
        edges.push(Edge {
            u: parent[next],
            v: next,
            length: best[next],
        });
        current = next;
    }
    Ok(SpanningTree {
        n,
        edges,
        insertion_rank: Some(rank),
        builder: Builder::Prim,
    })
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

fn edge_order(a: &Edge, b: &Edge) -> Ordering {
    a.length
        .total_cmp(&b.length)
        .then(a.u.cmp(&b.u))
        .then(a.v.cmp(&b.v))
}

/// Kruskal over the complete graph, edges ordered by
/// `(length, min index, max index)`. Builds all `n(n-1)/2` edges.
pub fn build_mst_kruskal(cloud: &PointCloud, metric: &Metric) -> Result<SpanningTree> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::input(
            "cannot build a spanning tree over an empty cloud",
        ));
    }
    let mut all = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            all.push(Edge {
                u,
                v,
                length: metric.between(cloud, u, v),
            });
        }
    }
    all.sort_unstable_by(edge_order);
    let mut dsu = DisjointSets::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for e in all {
        if dsu.union(e.u, e.v) {
            edges.push(e);
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    Ok(SpanningTree {
        n,
        edges,
        insertion_rank: None,
        builder: Builder::Kruskal,
    })
}

/// Largest cloud accepted by [`brute_force_min_tree`].
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Decodes a Prüfer sequence over `n = seq.len() + 2` labels into tree edges.
pub fn prufer_decode(seq: &[usize]) -> Vec<(usize, usize)> {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n)
            .find(|&v| degree[v] == 1)
            .expect("a leaf always exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] = 0;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Minimizes `E_alpha` over all `n^(n-2)` labeled spanning trees.
///
/// The first minimizer in Prüfer lexicographic order is returned.
pub fn brute_force_min_tree(
    cloud: &PointCloud,
    metric: &Metric,
    alpha: f64,
) -> Result<(SpanningTree, f64)> {
    let n = cloud.len();
    if !(2..=BRUTE_FORCE_MAX_N).contains(&n) {
        return Err(Error::input(format!(
            "brute force needs 2 <= n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::input(format!("alpha must be positive, got {alpha}")));
    }
    let mut dist = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            dist[u * n + v] = metric.between(cloud, u, v);
        }
    }
    let weight = |edges: &[(usize, usize)]| -> f64 {
        let mut w: Vec<f64> = edges
            .iter()
            .map(|&(u, v)| dist[u * n + v].powf(alpha))
            .collect();
        w.sort_by(f64::total_cmp);
        w.iter().sum()
    };

    let mut seq = vec![0usize; n - 2];
    let mut best_edges = prufer_decode(&seq);
    let mut best = weight(&best_edges);
    // Odometer over all sequences in [0, n)^(n-2).
    'outer: loop {
        let mut k = seq.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            seq[k] += 1;
            if seq[k] < n {
                break;
            }
            seq[k] = 0;
        }
        let edges = prufer_decode(&seq);
        let w = weight(&edges);
        if w < best {
            best = w;
            best_edges = edges;
        }
    }
    let edges = best_edges
        .into_iter()
        .map(|(u, v)| Edge {
            u,
            v,
            length: dist[u * n + v],
        })
        .collect();
    Ok((
        SpanningTree {
            n,
            edges,
            insertion_rank: None,
            builder: Builder::BruteForce,
        },
        best,
    ))
}

/// On-disk tree record. Lengths are written with 17 significant digits.
#[derive(Debug, Serialize)]
struct TreeRecordOut<'a> {
    n: usize,
    builder: Builder,
    edges: Vec<(usize, usize, Sig17)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    insertion_rank: Option<&'a [usize]>,
}

#[derive(Debug, Deserialize)]
struct TreeRecordIn {
    n: usize,
    builder: Builder,
    edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    insertion_rank: Option<Vec<usize>>,
}

impl SpanningTree {
    pub fn to_json(&self) -> String {
        let record = TreeRecordOut {
            n: self.n,
            builder: self.builder,
            edges: self
                .edges
                .iter()
                .map(|e| (e.u, e.v, Sig17(e.length)))
                .collect(),
            insertion_rank: self.insertion_rank.as_deref(),
        };
        serde_json::to_string_pretty(&record).expect("tree record serializes")
    }

    /// Parses and validates a tree record.
    pub fn from_json(text: &str) -> Result<Self> {
        let record: TreeRecordIn = serde_json::from_str(text)?;
        let tree = SpanningTree {
            n: record.n,
            builder: record.builder,
            edges: record
                .edges
                .into_iter()
                .map(|(u, v, length)| Edge { u, v, length })
                .collect(),
            insertion_rank: record.insertion_rank,
        };
        tree.validate()?;
        Ok(tree)
    }
}
