//! Undirected simple graphs over dense vertex ids, update batches, and the
//! `(inserted, deleted)` edge-delta pair that every maintained structure
//! reports after an update.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{BuildHasherDefault, Hash};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hash map with a fixed-key hasher, so iteration order is identical between
/// runs with the same inputs.
pub type DetMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;
pub type DetSet<K> = HashSet<K, BuildHasherDefault<DefaultHasher>>;

pub type VertexId = u32;

/// Undirected edge in canonical form `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    /// Canonicalizes `(u, v)`; self-loops are rejected.
    pub fn new(u: VertexId, v: VertexId) -> Result<Edge> {
        canonicalize(u, v)
    }

    /// Caller guarantees `u != v`.
    pub(crate) fn of(u: VertexId, v: VertexId) -> Edge {
        debug_assert_ne!(u, v);
        if u < v {
            Edge { u, v }
        } else {
            Edge { u: v, v: u }
        }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

pub fn canonicalize(u: VertexId, v: VertexId) -> Result<Edge> {
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    Ok(Edge::of(u, v))
}

/// Output edge of a sparsifier. Weights are powers of four.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub edge: Edge,
    pub weight: u64,
}

/// Anything a maintained structure can emit: plain spanner edges or
/// weighted sparsifier edges.
pub trait OutputItem: Clone + Ord + Hash + Send + Sync + fmt::Debug {
    fn edge(&self) -> Edge;
    /// Representation of an edge that is kept verbatim (unit weight).
    fn unit(e: Edge) -> Self;
}

impl OutputItem for Edge {
    fn edge(&self) -> Edge {
        *self
    }
    fn unit(e: Edge) -> Self {
        e
    }
}

impl OutputItem for WeightedEdge {
    fn edge(&self) -> Edge {
        self.edge
    }
    fn unit(e: Edge) -> Self {
        WeightedEdge { edge: e, weight: 1 }
    }
}

/// Raw or filtered update batch.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateBatch {
    pub inserts: BTreeSet<Edge>,
    pub deletes: BTreeSet<Edge>,
}

impl UpdateBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn inserting(edges: impl IntoIterator<Item = Edge>) -> Self {
        UpdateBatch {
            inserts: edges.into_iter().collect(),
            deletes: BTreeSet::new(),
        }
    }

    pub fn deleting(edges: impl IntoIterator<Item = Edge>) -> Self {
        UpdateBatch {
            inserts: BTreeSet::new(),
            deletes: edges.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.inserts.is_empty() && self.deletes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.inserts.len() + self.deletes.len()
    }
}

/// The `(δH_ins, δH_del)` pair. Both sides are kept sorted so deltas print
/// and hash identically across runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaEdges<T: Ord = Edge> {
    pub inserted: BTreeSet<T>,
    pub deleted: BTreeSet<T>,
}

impl<T: Ord> Default for DeltaEdges<T> {
    fn default() -> Self {
        DeltaEdges {
            inserted: BTreeSet::new(),
            deleted: BTreeSet::new(),
        }
    }
}

impl<T: Ord + Clone> DeltaEdges<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.inserted.is_empty() && self.deleted.is_empty()
    }

    pub fn len(&self) -> usize {
        self.inserted.len() + self.deleted.len()
    }

    /// Drops every item present on both sides.
    pub fn cancel(mut self) -> Self {
        let common: Vec<T> = self.inserted.intersection(&self.deleted).cloned().collect();
        for x in &common {
            self.inserted.remove(x);
            self.deleted.remove(x);
        }
        self
    }

    /// Multiset-style union followed by cancellation.
    pub fn merge(mut self, other: DeltaEdges<T>) -> Self {
        self.absorb(other);
        self.cancel()
    }

    /// Union without cancelling. An item inserted twice (or deleted twice)
    /// collapses to one occurrence, which matches set semantics of outputs.
    pub fn absorb(&mut self, other: DeltaEdges<T>) {
        self.inserted.extend(other.inserted);
        self.deleted.extend(other.deleted);
    }

    pub fn map<U: Ord + Clone>(&self, f: impl Fn(&T) -> U) -> DeltaEdges<U> {
        DeltaEdges {
            inserted: self.inserted.iter().map(&f).collect(),
            deleted: self.deleted.iter().map(&f).collect(),
        }
    }
}

/// Free-function form of [`DeltaEdges::cancel`].
pub fn cancel<T: Ord + Clone>(d: DeltaEdges<T>) -> DeltaEdges<T> {
    d.cancel()
}

/// Builds a delta from the before/after state of a set of touched keys.
/// Cancellation is implicit: an item that is unchanged is never recorded.
pub(crate) fn diff_presence<T: Ord + Clone>(
    before: impl IntoIterator<Item = T>,
    after: impl IntoIterator<Item = T>,
) -> DeltaEdges<T> {
    let before: BTreeSet<T> = before.into_iter().collect();
    let after: BTreeSet<T> = after.into_iter().collect();
    DeltaEdges {
        inserted: after.difference(&before).cloned().collect(),
        deleted: before.difference(&after).cloned().collect(),
    }
}

/// Undirected simple graph with a hashed edge set and hashed adjacency.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: DetSet<Edge>,
    adj: Vec<DetSet<VertexId>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            edges: DetSet::default(),
            adj: vec![DetSet::default(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut g = Graph::new(n);
        for e in edges {
            g.check_vertex(e.v)?;
            g.insert(e);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v as usize].iter().copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter()
    }

    /// Edges in canonical order.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.edges.iter().copied().collect();
        v.sort_unstable();
        v
    }

    /// Returns true if the edge was absent.
    pub fn insert(&mut self, e: Edge) -> bool {
        if !self.edges.insert(e) {
            return false;
        }
        self.adj[e.u as usize].insert(e.v);
        self.adj[e.v as usize].insert(e.u);
        true
    }

    /// Returns true if the edge was present.
    pub fn remove(&mut self, e: &Edge) -> bool {
        if !self.edges.remove(e) {
            return false;
        }
        self.adj[e.u as usize].remove(&e.v);
        self.adj[e.v as usize].remove(&e.u);
        true
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) >= self.n {
            return Err(Error::VertexOutOfRange { v, n: self.n });
        }
        Ok(())
    }

    /// Applies a raw batch and returns the part that actually took effect:
    /// duplicate inserts and absent deletes are dropped.
    pub fn apply_batch(&mut self, batch: &UpdateBatch) -> Result<UpdateBatch> {
        for e in batch.inserts.iter().chain(batch.deletes.iter()) {
            self.check_vertex(e.v)?;
        }
        if let Some(e) = batch.inserts.intersection(&batch.deletes).next() {
            return Err(Error::ConflictingUpdate(*e));
        }
        let mut applied = UpdateBatch::new();
        for e in &batch.deletes {
            if self.remove(e) {
                applied.deletes.insert(*e);
            }
        }
        for e in &batch.inserts {
            if self.insert(*e) {
                applied.inserts.insert(*e);
            }
        }
        Ok(applied)
    }

    /// Checks that the edge set and the adjacency sets describe the same graph.
    pub fn check_consistency(&self) -> Result<()> {
        let mut half_degree_sum = 0usize;
        for (v, nbrs) in self.adj.iter().enumerate() {
            half_degree_sum += nbrs.len();
            for &w in nbrs {
                if w as usize == v || !self.edges.contains(&Edge::of(v as VertexId, w)) {
                    return Err(Error::Invariant(format!(
                        "adjacency entry {v}->{w} has no matching edge"
                    )));
                }
            }
        }
        if half_degree_sum != 2 * self.edges.len() {
            return Err(Error::Invariant(format!(
                "degree sum {half_degree_sum} != 2*|E| = {}",
                2 * self.edges.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [Edge::of(0, 1), Edge::of(1, 2), Edge::of(0, 2)]).unwrap()
    }

    #[test]
    fn canonicalize_orders_endpoints() {
        assert_eq!(canonicalize(3, 1).unwrap(), Edge { u: 1, v: 3 });
        assert_eq!(canonicalize(0, 7).unwrap(), Edge { u: 0, v: 7 });
        assert!(matches!(canonicalize(5, 5), Err(Error::SelfLoop(5))));
    }

    #[test]
    fn duplicate_insert_is_filtered() {
        let mut g = triangle();
        let applied = g.apply_batch(&UpdateBatch::inserting([Edge::of(0, 1)])).unwrap();
        assert!(applied.inserts.is_empty());
        assert_eq!(g.m(), 3);
    }

    #[test]
    fn delete_present_edge() {
        let mut g = triangle();
        let applied = g.apply_batch(&UpdateBatch::deleting([Edge::of(0, 1)])).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(applied.deletes, [Edge::of(0, 1)].into_iter().collect());
        g.check_consistency().unwrap();
    }

    #[test]
    fn absent_delete_is_filtered() {
        let mut g = Graph::new(3);
        let applied = g.apply_batch(&UpdateBatch::deleting([Edge::of(0, 1)])).unwrap();
        assert!(applied.deletes.is_empty());
    }

    #[test]
    fn out_of_range_vertex_is_rejected() {
        let mut g = Graph::new(3);
        let err = g.apply_batch(&UpdateBatch::inserting([Edge::of(0, 3)]));
        assert!(matches!(err, Err(Error::VertexOutOfRange { v: 3, n: 3 })));
    }

    #[test]
    fn simultaneous_insert_and_delete_is_malformed() {
        let mut g = Graph::new(3);
        let mut b = UpdateBatch::inserting([Edge::of(0, 1)]);
        b.deletes.insert(Edge::of(0, 1));
        assert!(matches!(g.apply_batch(&b), Err(Error::ConflictingUpdate(_))));
    }

    #[test]
    fn cancel_examples() {
        let (a, b, c) = (Edge::of(0, 1), Edge::of(1, 2), Edge::of(2, 3));
        let d = DeltaEdges {
            inserted: [a, b].into_iter().collect(),
            deleted: [b, c].into_iter().collect(),
        };
        let d = cancel(d);
        assert_eq!(d.inserted, [a].into_iter().collect());
        assert_eq!(d.deleted, [c].into_iter().collect());

        assert!(cancel(DeltaEdges::<Edge>::new()).is_empty());

        let d = DeltaEdges {
            inserted: [a].into_iter().collect(),
            deleted: [a].into_iter().collect(),
        };
        assert!(cancel(d).is_empty());
    }
}
