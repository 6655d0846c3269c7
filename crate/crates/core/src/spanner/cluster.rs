//! Exponential start-time clustering maintained through an ES-tree over the
//! auxiliary digraph.
//!
//! Real vertices keep ids `0..n`. Path vertices `p_i = n + i` for `i < t`
//! form a chain `p_0 -> p_1 -> ... -> p_{t-1}` rooted at `p_0`, and every real
//! vertex `v` gets an entry arc `p_{t-1-d_v} -> v`. Every undirected edge
//! becomes two arcs. The ES depth bound is `t`, so every real vertex stays
//! reachable through its own entry arc.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::estree::{ArcId, ArcSpec, ChangeReport, EsTree};
use crate::graph::Edge;
use crate::spanner::offsets::ExpOffsets;

/// Clusters that moved during one deletion batch.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterUpdate {
    /// `(vertex, old cluster, new cluster)`, sorted by vertex.
    pub cluster_changes: Vec<(u32, u32, u32)>,
    /// Real vertices whose parent arc changed, sorted.
    pub parent_changes: Vec<u32>,
    pub es_report: ChangeReport,
}

#[derive(Clone, Debug)]
pub struct ClusterTree {
    n: usize,
    t: u32,
    stride: u64,
    offsets: ExpOffsets,
    es: EsTree,
    cluster: Vec<u32>,
    changes: Vec<u32>,
}

impl ClusterTree {
    pub fn init(n: usize, edges: &[Edge], offsets: ExpOffsets) -> Result<ClusterTree> {
        assert_eq!(offsets.n(), n, "offsets sized for a different vertex count");
        let t = offsets.max_whole() + 1;
        let total = n + t as usize;
        let stride = total as u64 + 1;
        let path = |i: u32| n as u32 + i;

        // Aux adjacency for the first BFS, which fixes the level order used
        // to assign clusters before any key exists.
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); total];
        for e in edges {
            out[e.u as usize].push(e.v);
            out[e.v as usize].push(e.u);
        }
        for i in 0..t - 1 {
            out[path(i) as usize].push(path(i + 1));
        }
        for v in 0..n as u32 {
            out[path(t - 1 - offsets.whole(v)) as usize].push(v);
        }
        let dist = crate::estree::bounded_bfs(&out, path(0), t);

        let mut by_level: Vec<u32> = (0..n as u32).collect();
        by_level.sort_by_key(|&v| (dist[v as usize], v));
        let mut cluster: Vec<u32> = (0..n as u32).collect();
        let mut best: Vec<u64> = vec![0; n];
        for v in 0..n as u32 {
            let idx = t - 1 - offsets.whole(v);
            if dist[path(idx) as usize] + 1 == dist[v as usize] {
                best[v as usize] = entry_key(&offsets, stride, n, v, idx);
            }
        }
        let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); n];
        for e in edges {
            incoming[e.u as usize].push(e.v);
            incoming[e.v as usize].push(e.u);
        }
        for &v in &by_level {
            let dv = dist[v as usize];
            for &w in &incoming[v as usize] {
                if dist[w as usize] + 1 != dv {
                    continue;
                }
                let key = real_key(&offsets, stride, cluster[w as usize], w);
                if key > best[v as usize] {
                    best[v as usize] = key;
                    cluster[v as usize] = cluster[w as usize];
                }
            }
        }

        let mut arcs = Vec::with_capacity(2 * edges.len() + n + t as usize);
        for e in edges {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                arcs.push(ArcSpec::new(
                    a,
                    b,
                    real_key(&offsets, stride, cluster[a as usize], a),
                ));
            }
        }
        for i in 0..t - 1 {
            arcs.push(ArcSpec::new(path(i), path(i + 1), 1));
        }
        for v in 0..n as u32 {
            let idx = t - 1 - offsets.whole(v);
            arcs.push(ArcSpec::new(
                path(idx),
                v,
                entry_key(&offsets, stride, n, v, idx),
            ));
        }
        let es = EsTree::init(total, &arcs, path(0), t)?;
        let tree = ClusterTree {
            n,
            t,
            stride,
            offsets,
            es,
            cluster,
            changes: vec![0; n],
        };
        debug_assert!(tree.check_clusters().is_ok());
        Ok(tree)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of path vertices, which is also the ES depth bound.
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn offsets(&self) -> &ExpOffsets {
        &self.offsets
    }

    pub fn es(&self) -> &EsTree {
        &self.es
    }

    pub fn cluster(&self, v: u32) -> u32 {
        self.cluster[v as usize]
    }

    pub fn clusters(&self) -> &[u32] {
        &self.cluster
    }

    pub fn cluster_changes(&self, v: u32) -> u32 {
        self.changes[v as usize]
    }

    /// Aux-graph distance of a real vertex.
    pub fn aux_dist(&self, v: u32) -> u32 {
        self.es.dist(v)
    }

    /// Real parent of `v`, or `None` when `v` hangs off its entry arc.
    pub fn parent(&self, v: u32) -> Option<u32> {
        self.es.parent(v).filter(|&p| (p as usize) < self.n)
    }

    /// Tree edges between real vertices.
    pub fn tree_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.n as u32).filter_map(move |v| self.parent(v).map(|p| Edge::of(p, v)))
    }

    /// Largest hop depth of a vertex below its cluster center.
    pub fn realized_depth(&self) -> u32 {
        (0..self.n as u32)
            .map(|v| self.es.dist(v) - self.es.dist(self.cluster[v as usize]))
            .max()
            .unwrap_or(0)
    }

    /// The in-list tag carried by arc `tail -> head`: priority of the tail's
    /// cluster for a real tail, else the head's own priority.
    pub fn arc_tag(&self, tail: u32, head: u32) -> Option<u64> {
        let id = self.es.arc_id(tail, head)?;
        Some(self.es.arc_priority(id) / self.stride)
    }

    /// Removes both arcs of every edge and repairs clusters level by level.
    pub fn delete_batch(&mut self, edges: &[Edge]) -> Result<ClusterUpdate> {
        let arcs: Vec<(u32, u32)> = edges.iter().flat_map(|e| [(e.u, e.v), (e.v, e.u)]).collect();
        let report = self.es.delete_batch(&arcs);
        let mut pending: BTreeSet<(u32, u32)> = BTreeSet::new();
        let mut parent_changes: BTreeSet<u32> = BTreeSet::new();
        for &v in &report.parent_changes {
            if (v as usize) < self.n {
                pending.insert((self.es.dist(v), v));
                parent_changes.insert(v);
            }
        }
        for &(v, _, _) in &report.dist_changes {
            if (v as usize) < self.n {
                pending.insert((self.es.dist(v), v));
            }
        }
        let mut cluster_changes = Vec::new();
        while let Some((_, v)) = pending.pop_first() {
            let c = match self.parent(v) {
                Some(p) => self.cluster[p as usize],
                None => v,
            };
            let old = self.cluster[v as usize];
            if c == old {
                continue;
            }
            self.cluster[v as usize] = c;
            self.changes[v as usize] += 1;
            cluster_changes.push((v, old, c));
            let key = real_key(&self.offsets, self.stride, c, v);
            let out: Vec<ArcId> = self.es.out_arcs(v).collect();
            for a in out {
                let (_, w) = self.es.arc(a);
                if (w as usize) >= self.n {
                    continue;
                }
                let moved = self.es.set_arc_priority(a, key)?;
                if moved {
                    parent_changes.insert(w);
                }
                if moved || self.es.parent_arc(w) == Some(a) {
                    pending.insert((self.es.dist(w), w));
                }
            }
        }
        cluster_changes.sort_unstable();
        Ok(ClusterUpdate {
            cluster_changes,
            parent_changes: parent_changes.into_iter().collect(),
            es_report: report,
        })
    }

    /// Checks every cluster against its parent and every in-list tag against
    /// the cluster of the tail.
    pub fn check_clusters(&self) -> Result<()> {
        use crate::error::Error;
        self.es.check_invariants()?;
        for v in 0..self.n as u32 {
            let expect = match self.parent(v) {
                Some(p) => self.cluster[p as usize],
                None => v,
            };
            if self.cluster[v as usize] != expect {
                return Err(Error::Invariant(format!("cluster of {v} disagrees with parent")));
            }
            for w in self.es.in_arcs(v) {
                let (tail, _) = self.es.arc(w);
                let tag = self.es.arc_priority(w) / self.stride;
                let want = if (tail as usize) < self.n {
                    self.offsets.priority(self.cluster[tail as usize])
                } else {
                    self.offsets.priority(v)
                };
                if tag != want as u64 {
                    return Err(Error::Invariant(format!("stale tag on arc {tail} -> {v}")));
                }
            }
        }
        Ok(())
    }
}

fn real_key(offsets: &ExpOffsets, stride: u64, cluster: u32, tail: u32) -> u64 {
    offsets.priority(cluster) as u64 * stride + tail as u64 + 1
}

fn entry_key(offsets: &ExpOffsets, stride: u64, n: usize, v: u32, idx: u32) -> u64 {
    offsets.priority(v) as u64 * stride + (n as u64 + idx as u64) + 1
}
