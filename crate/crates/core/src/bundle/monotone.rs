//! Union of cluster forests over independent exponential shifts.
//!
//! Each instance is a [`ClusterTree`]; the spanner is the union of their tree
//! edges, reference-counted across instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DeltaEdges, DetMap, Edge, Graph};
use crate::spanner::{ClusterTree, ExpOffsets};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneConfig {
    pub beta: f64,
    /// Instances per `ceil(log2 n)`.
    pub instances_per_log: u32,
}

impl Default for MonotoneConfig {
    fn default() -> Self {
        MonotoneConfig {
            beta: 0.25,
            instances_per_log: 2,
        }
    }
}

impl MonotoneConfig {
    pub fn instances(&self, n: usize) -> usize {
        let lg = (n.max(2) as f64).log2().ceil() as usize;
        (self.instances_per_log as usize * lg).max(1)
    }

    /// Largest admissible offset, `ceil((20 / beta) ln n)`.
    pub fn offset_cap(&self, n: usize) -> f64 {
        ((20.0 / self.beta) * (n.max(2) as f64).ln()).ceil()
    }
}

#[derive(Clone, Debug)]
struct Instance {
    tree: ClusterTree,
    parent: Vec<Option<u32>>,
}

#[derive(Clone, Debug)]
pub struct MonotoneSpanner {
    graph: Graph,
    config: MonotoneConfig,
    instances: Vec<Instance>,
    count: DetMap<Edge, u32>,
    recourse: u64,
}

impl MonotoneSpanner {
    pub fn new<R: Rng + ?Sized>(
        graph: &Graph,
        config: MonotoneConfig,
        rng: &mut R,
    ) -> Result<(Self, Vec<Edge>)> {
        if !(config.beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {}", config.beta)));
        }
        let n = graph.n();
        let seeds: Vec<u64> = (0..config.instances(n)).map(|_| rng.gen()).collect();
        let edges = graph.sorted_edges();
        let cap = config.offset_cap(n);
        let instances: Vec<Instance> = seeds
            .par_iter()
            .map(|&seed| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let offsets = ExpOffsets::sample(n, config.beta, cap, &mut r)?;
                let tree = ClusterTree::init(n, &edges, offsets)?;
                let parent = (0..n as u32).map(|v| tree.parent(v)).collect();
                Ok(Instance { tree, parent })
            })
            .collect::<Result<_>>()?;
        let mut count: DetMap<Edge, u32> = DetMap::default();
        for inst in &instances {
            for e in inst.tree.tree_edges() {
                *count.entry(e).or_insert(0) += 1;
            }
        }
        let me = MonotoneSpanner {
            graph: graph.clone(),
            config,
            instances,
            count,
            recourse: 0,
        };
        let out = me.edges();
        Ok((me, out))
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &MonotoneConfig {
        &self.config
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn tree(&self, i: usize) -> &ClusterTree {
        &self.instances[i].tree
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.count.contains_key(e)
    }

    pub fn len(&self) -> usize {
        self.count.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count.is_empty()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.count.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Total `|delta_ins| + |delta_del|` over all deletion batches.
    pub fn recourse(&self) -> u64 {
        self.recourse
    }

    /// Largest realized cluster depth over all instances.
    pub fn realized_depth(&self) -> u32 {
        self.instances
            .iter()
            .map(|i| i.tree.realized_depth())
            .max()
            .unwrap_or(0)
    }

    /// Mean fraction of edges whose endpoints sit in different clusters.
    pub fn inter_cluster_fraction(&self) -> f64 {
        if self.graph.m() == 0 || self.instances.is_empty() {
            return 0.0;
        }
        let cut: usize = self
            .instances
            .iter()
            .map(|i| {
                self.graph
                    .edges()
                    .filter(|e| i.tree.cluster(e.u) != i.tree.cluster(e.v))
                    .count()
            })
            .sum();
        cut as f64 / (self.graph.m() * self.instances.len()) as f64
    }

    pub fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges> {
        let mut del: Vec<Edge> = edges.iter().copied().filter(|e| self.graph.contains(e)).collect();
        del.sort_unstable();
        del.dedup();
        if del.is_empty() {
            return Ok(DeltaEdges::new());
        }
        for e in &del {
            self.graph.remove(e);
        }
        let moves: Vec<Vec<(Option<u32>, Option<u32>, u32)>> = self
            .instances
            .par_iter_mut()
            .map(|inst| {
                let up = inst.tree.delete_batch(&del)?;
                let mut moved = Vec::new();
                for &v in &up.parent_changes {
                    let now = inst.tree.parent(v);
                    let was = inst.parent[v as usize];
                    if now != was {
                        inst.parent[v as usize] = now;
                        moved.push((was, now, v));
                    }
                }
                Ok(moved)
            })
            .collect::<Result<_>>()?;
        let mut touched: Vec<Edge> = Vec::new();
        let before: Vec<bool>;
        for list in &moves {
            for &(was, now, v) in list {
                touched.extend(was.map(|p| Edge::of(p, v)));
                touched.extend(now.map(|p| Edge::of(p, v)));
            }
        }
        touched.sort_unstable();
        touched.dedup();
        before = touched.iter().map(|e| self.count.contains_key(e)).collect();
        for list in moves {
            for (was, now, v) in list {
                if let Some(p) = was {
                    let e = Edge::of(p, v);
                    let c = self.count.get_mut(&e).expect("refcount of a forest edge");
                    *c -= 1;
                    if *c == 0 {
                        self.count.remove(&e);
                    }
                }
                if let Some(p) = now {
                    *self.count.entry(Edge::of(p, v)).or_insert(0) += 1;
                }
            }
        }
        let mut delta = DeltaEdges::new();
        for (e, was) in touched.into_iter().zip(before) {
            match (was, self.count.contains_key(&e)) {
                (false, true) => {
                    delta.inserted.insert(e);
                }
                (true, false) => {
                    delta.deleted.insert(e);
                }
                _ => {}
            }
        }
        self.recourse += delta.len() as u64;
        debug_assert!(self.check_consistency().is_ok());
        Ok(delta)
    }

    /// Recounts forests from every instance and checks the cluster trees.
    pub fn check_consistency(&self) -> Result<()> {
        let mut count: DetMap<Edge, u32> = DetMap::default();
        for (i, inst) in self.instances.iter().enumerate() {
            inst.tree.check_clusters()?;
            for v in 0..self.n() as u32 {
                if inst.tree.parent(v) != inst.parent[v as usize] {
                    return Err(Error::Invariant(format!("instance {i}: parent of {v} is stale")));
                }
            }
            for e in inst.tree.tree_edges() {
                if !self.graph.contains(&e) {
                    return Err(Error::Invariant(format!("instance {i}: forest edge {e} is gone")));
                }
                *count.entry(e).or_insert(0) += 1;
            }
        }
        if count != self.count {
            return Err(Error::Invariant("forest refcounts differ".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::check_stretch;

    fn rng(s: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(s)
    }

    fn random_graph(n: u32, m: usize, r: &mut ChaCha8Rng) -> Graph {
        let mut g = Graph::new(n as usize);
        while g.m() < m {
            let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
            if a != b {
                g.insert(Edge::of(a, b));
            }
        }
        g
    }

    #[test]
    fn single_vertex_is_empty() {
        let (s, out) =
            MonotoneSpanner::new(&Graph::new(1), MonotoneConfig::default(), &mut rng(0)).unwrap();
        assert!(out.is_empty());
        assert_eq!(s.instance_count(), 2);
    }

    #[test]
    fn forests_span_connected_graph() {
        let mut r = rng(5);
        let g = random_graph(40, 160, &mut r);
        let (s, out) = MonotoneSpanner::new(&g, MonotoneConfig::default(), &mut r).unwrap();
        assert!(out.len() <= s.instance_count() * 39);
        assert!(s.inter_cluster_fraction() <= 0.5);
        check_stretch(&g, &out, 2 * s.realized_depth() + 1).unwrap();
    }

    #[test]
    fn deleting_non_forest_edge_is_quiet() {
        let mut r = rng(6);
        let g = random_graph(30, 120, &mut r);
        let (mut s, out) = MonotoneSpanner::new(&g, MonotoneConfig::default(), &mut r).unwrap();
        if let Some(e) = g.sorted_edges().into_iter().find(|e| !out.contains(e)) {
            assert!(s.delete_batch(&[e]).unwrap().is_empty());
        }
    }

    #[test]
    fn decremental_run_matches_refcounts() {
        let mut r = rng(7);
        let g = random_graph(50, 250, &mut r);
        let (mut s, out) = MonotoneSpanner::new(&g, MonotoneConfig::default(), &mut r).unwrap();
        let mut current: std::collections::BTreeSet<Edge> = out.into_iter().collect();
        let mut order = g.sorted_edges();
        use rand::seq::SliceRandom;
        order.shuffle(&mut r);
        for chunk in order.chunks(17) {
            let d = s.delete_batch(chunk).unwrap();
            for e in &d.deleted {
                assert!(current.remove(e));
            }
            for e in &d.inserted {
                assert!(current.insert(*e));
            }
            assert_eq!(current.iter().copied().collect::<Vec<_>>(), s.edges());
            s.check_consistency().unwrap();
        }
        assert!(s.is_empty());
    }
}
