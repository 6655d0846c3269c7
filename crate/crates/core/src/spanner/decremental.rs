//! Decremental `(2k-1)`-spanner: cluster-tree edges plus one edge from every
//! vertex to every adjacent foreign cluster.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::Result;
use crate::graph::{DeltaEdges, DetMap, DetSet, Edge, Graph};
use crate::spanner::cluster::ClusterTree;
use crate::spanner::offsets::ExpOffsets;

/// Edges from one vertex into one cluster.
#[derive(Clone, Debug, Default)]
struct Bucket {
    members: BTreeSet<Edge>,
    pick: Option<Edge>,
    /// The pick as currently counted in the output.
    counted: Option<Edge>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpannerCounters {
    pub cluster_changes: u64,
    pub bucket_moves: u64,
    pub pick_changes: u64,
    pub batches: u64,
}

#[derive(Clone, Debug)]
pub struct DecrementalSpanner {
    k: u32,
    graph: Graph,
    tree: ClusterTree,
    /// `(v, c)` -> edges `(v, y)` with `y` in cluster `c`, including `c ==
    /// Cluster(v)`, which never contributes a pick.
    buckets: DetMap<(u32, u32), Bucket>,
    /// Multiplicity of each output edge (tree edge and up to two picks).
    counts: DetMap<Edge, u32>,
    counters: SpannerCounters,
}

impl DecrementalSpanner {
    pub fn init<R: Rng + ?Sized>(graph: Graph, k: u32, rng: &mut R) -> Result<Self> {
        let offsets = ExpOffsets::for_spanner(graph.n(), k, rng)?;
        Self::with_offsets(graph, k, offsets)
    }

    pub fn with_offsets(graph: Graph, k: u32, offsets: ExpOffsets) -> Result<Self> {
        let edges = graph.sorted_edges();
        let tree = ClusterTree::init(graph.n(), &edges, offsets)?;
        let mut s = DecrementalSpanner {
            k,
            graph,
            tree,
            buckets: DetMap::default(),
            counts: DetMap::default(),
            counters: SpannerCounters::default(),
        };
        for e in s.tree.tree_edges().collect::<Vec<_>>() {
            *s.counts.entry(e).or_insert(0) += 1;
        }
        let mut touched = BTreeSet::new();
        for e in &edges {
            for x in [e.u, e.v] {
                let key = (x, s.tree.cluster(e.other(x)));
                s.buckets.entry(key).or_default().members.insert(*e);
                touched.insert(key);
            }
        }
        let mut log = DetMap::default();
        for key in touched {
            s.refresh(key, &mut log);
        }
        Ok(s)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn stretch_bound(&self) -> u32 {
        2 * self.k - 1
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn cluster_tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn cluster_of(&self, v: u32) -> u32 {
        self.tree.cluster(v)
    }

    pub fn counters(&self) -> &SpannerCounters {
        &self.counters
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.counts.contains_key(e)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Current spanner edges in canonical order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.counts.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// The edge representing `(v, c)` in the spanner, if that pair is an
    /// active inter-cluster pair.
    pub fn pick(&self, v: u32, c: u32) -> Option<Edge> {
        self.buckets.get(&(v, c)).and_then(|b| b.counted)
    }

    /// Number of nonempty `(v, c)` pairs with `c != Cluster(v)`.
    pub fn inter_cluster_pairs(&self) -> usize {
        self.buckets.values().filter(|b| b.counted.is_some()).count()
    }

    fn bump(&mut self, e: Edge, up: bool, log: &mut DetMap<Edge, bool>) {
        log.entry(e).or_insert_with(|| self.counts.contains_key(&e));
        if up {
            *self.counts.entry(e).or_insert(0) += 1;
        } else {
            let c = self.counts.get_mut(&e).expect("counted edge");
            *c -= 1;
            if *c == 0 {
                self.counts.remove(&e);
            }
        }
    }

    fn refresh(&mut self, key: (u32, u32), log: &mut DetMap<Edge, bool>) {
        let active = key.1 != self.tree.cluster(key.0);
        let Some(b) = self.buckets.get_mut(&key) else {
            return;
        };
        if b.pick.is_some_and(|p| !b.members.contains(&p)) {
            b.pick = None;
            self.counters.pick_changes += 1;
        }
        if b.pick.is_none() {
            b.pick = b.members.first().copied();
        }
        let want = if active { b.pick } else { None };
        let had = b.counted;
        b.counted = want;
        let empty = b.members.is_empty();
        if empty {
            self.buckets.remove(&key);
        }
        if had != want {
            if let Some(e) = had {
                self.bump(e, false, log);
            }
            if let Some(e) = want {
                self.bump(e, true, log);
            }
        }
    }

    fn detach(&mut self, key: (u32, u32), e: &Edge) {
        if let Some(b) = self.buckets.get_mut(&key) {
            b.members.remove(e);
        }
    }

    /// Deletes a batch of edges; absent edges are ignored.
    pub fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges> {
        self.counters.batches += 1;
        let mut log: DetMap<Edge, bool> = DetMap::default();
        let mut touched: BTreeSet<(u32, u32)> = BTreeSet::new();
        let mut gone = Vec::new();
        for e in edges {
            if !self.graph.remove(e) {
                continue;
            }
            gone.push(*e);
            for x in [e.u, e.v] {
                let key = (x, self.tree.cluster(e.other(x)));
                self.detach(key, e);
                touched.insert(key);
            }
        }
        if gone.is_empty() {
            return Ok(DeltaEdges::new());
        }
        gone.sort_unstable();
        let before_tree: DetSet<Edge> = self.tree.tree_edges().collect();
        let update = self.tree.delete_batch(&gone)?;
        let after_tree: DetSet<Edge> = self.tree.tree_edges().collect();
        let mut tree_diff: Vec<(Edge, bool)> = before_tree
            .difference(&after_tree)
            .map(|e| (*e, false))
            .chain(after_tree.difference(&before_tree).map(|e| (*e, true)))
            .collect();
        tree_diff.sort_unstable();
        for (e, up) in tree_diff {
            self.bump(e, up, &mut log);
        }
        self.counters.cluster_changes += update.cluster_changes.len() as u64;
        for &(x, old, new) in &update.cluster_changes {
            touched.insert((x, old));
            touched.insert((x, new));
            let nbrs: Vec<u32> = self.graph.neighbors(x).collect();
            for y in nbrs {
                let e = Edge::of(x, y);
                self.detach((y, old), &e);
                self.buckets.entry((y, new)).or_default().members.insert(e);
                touched.insert((y, old));
                touched.insert((y, new));
                self.counters.bucket_moves += 1;
            }
        }
        for key in touched {
            self.refresh(key, &mut log);
        }
        let mut delta = DeltaEdges::new();
        for (e, was) in log {
            let now = self.counts.contains_key(&e);
            match (was, now) {
                (false, true) => {
                    delta.inserted.insert(e);
                }
                (true, false) => {
                    delta.deleted.insert(e);
                }
                _ => {}
            }
        }
        Ok(delta)
    }

    /// Rebuilds the pick set and output from scratch and compares.
    pub fn check_consistency(&self) -> Result<()> {
        use crate::error::Error;
        self.tree.check_clusters()?;
        let mut expect: BTreeSet<Edge> = self.tree.tree_edges().collect();
        let mut pairs: DetMap<(u32, u32), BTreeSet<Edge>> = DetMap::default();
        for e in self.graph.edges() {
            for x in [e.u, e.v] {
                let c = self.tree.cluster(e.other(x));
                if c != self.tree.cluster(x) {
                    pairs.entry((x, c)).or_default().insert(*e);
                }
            }
        }
        for (key, members) in &pairs {
            let pick = self
                .pick(key.0, key.1)
                .ok_or_else(|| Error::Invariant(format!("pair {key:?} has no pick")))?;
            if !members.contains(&pick) {
                return Err(Error::Invariant(format!("pick {pick} not in pair {key:?}")));
            }
            expect.insert(pick);
        }
        let active = self.buckets.values().filter(|b| b.counted.is_some()).count();
        if active != pairs.len() {
            return Err(Error::Invariant("stale inter-cluster pick".into()));
        }
        let have: BTreeSet<Edge> = self.counts.keys().copied().collect();
        if have != expect {
            return Err(Error::Invariant("spanner edge set out of sync".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, list: &[(u32, u32)]) -> Graph {
        Graph::from_edges(n, list.iter().map(|&(a, b)| Edge::of(a, b))).unwrap()
    }

    #[test]
    fn k1_keeps_every_edge() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]);
        let s = DecrementalSpanner::init(g.clone(), 1, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(s.edges(), g.sorted_edges());
        for v in 0..5 {
            assert_eq!(s.cluster_of(v), v);
        }
    }

    #[test]
    fn empty_graph_empty_spanner() {
        let s = DecrementalSpanner::init(Graph::new(6), 3, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn two_vertex_component_vanishes() {
        let mut s =
            DecrementalSpanner::init(graph(2, &[(0, 1)]), 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(s.edges(), vec![Edge::of(0, 1)]);
        let d = s.delete_batch(&[Edge::of(0, 1)]).unwrap();
        assert_eq!(d.deleted.into_iter().collect::<Vec<_>>(), vec![Edge::of(0, 1)]);
        assert!(s.is_empty());
        assert_eq!((s.cluster_of(0), s.cluster_of(1)), (0, 1));
    }

    #[test]
    fn picked_edge_leaves_when_pair_empties() {
        // Two singleton clusters joined by one edge: k=1 makes every vertex
        // its own cluster, so the edge is the only member of its pair.
        let mut s = DecrementalSpanner::init(
            graph(3, &[(0, 1), (1, 2)]),
            1,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        assert_eq!(s.pick(0, 1), Some(Edge::of(0, 1)));
        let d = s.delete_batch(&[Edge::of(0, 1)]).unwrap();
        assert!(d.deleted.contains(&Edge::of(0, 1)));
        assert_eq!(s.pick(0, 1), None);
        s.check_consistency().unwrap();
    }

    #[test]
    fn random_deletions_stay_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in [2, 3, 5] {
            let n = 40;
            let mut list = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.12) {
                        list.push(Edge::of(a, b));
                    }
                }
            }
            let g = Graph::from_edges(n as usize, list.iter().copied()).unwrap();
            let mut s = DecrementalSpanner::init(g, k, &mut rng).unwrap();
            s.check_consistency().unwrap();
            let mut out: BTreeSet<Edge> = s.edges().into_iter().collect();
            while !list.is_empty() {
                let take = rng.gen_range(1..=list.len().min(6));
                let batch: Vec<Edge> = (0..take)
                    .map(|_| list.swap_remove(rng.gen_range(0..list.len())))
                    .collect();
                let d = s.delete_batch(&batch).unwrap();
                for e in &d.deleted {
                    assert!(out.remove(e));
                }
                for e in &d.inserted {
                    assert!(out.insert(*e));
                }
                assert_eq!(out, s.edges().into_iter().collect());
                s.check_consistency().unwrap();
            }
        }
    }
}
