//! Fully-dynamic `(2k-1)`-spanner: the decremental spanner hosted by the
//! logarithmic-method wrapper with class capacity `n^{1+1/k}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{DeltaEdges, Edge, Graph};
use crate::spanner::DecrementalSpanner;
use crate::wrapper::{DecrementalStructure, FullyDynamic, WrapperConfig};

impl DecrementalStructure for DecrementalSpanner {
    type Item = Edge;
    type Params = u32;

    fn build(n: usize, edges: Vec<Edge>, k: &u32, seed: u64) -> Result<(Self, Vec<Edge>)> {
        let g = Graph::from_edges(n, edges)?;
        let s = DecrementalSpanner::init(g, *k, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let out = s.edges();
        Ok((s, out))
    }

    fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges> {
        DecrementalSpanner::delete_batch(self, edges)
    }

    fn output(&self) -> Vec<Edge> {
        self.edges()
    }
}

/// `ceil(n^{1 + 1/k})`.
pub fn spanner_capacity(n: usize, k: u32) -> usize {
    let n = n.max(1) as f64;
    n.powf(1.0 + 1.0 / k as f64).ceil() as usize
}

pub struct FullyDynamicSpanner {
    inner: FullyDynamic<DecrementalSpanner>,
    k: u32,
}

impl FullyDynamicSpanner {
    pub fn new(graph: &Graph, k: u32, seed: u64) -> Result<(Self, Vec<Edge>)> {
        let config = WrapperConfig::with_cubic_rebuild(spanner_capacity(graph.n(), k), graph.n());
        Self::with_config(graph, k, config, seed)
    }

    pub fn with_config(
        graph: &Graph,
        k: u32,
        config: WrapperConfig,
        seed: u64,
    ) -> Result<(Self, Vec<Edge>)> {
        let (inner, out) =
            FullyDynamic::new(graph.n(), graph.sorted_edges(), k, config, seed)?;
        Ok((FullyDynamicSpanner { inner, k }, out))
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn stretch_bound(&self) -> u32 {
        2 * self.k - 1
    }

    pub fn insert_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges> {
        self.inner.insert_batch(edges)
    }

    pub fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges> {
        self.inner.delete_batch(edges)
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.inner.output()
    }

    pub fn wrapper(&self) -> &FullyDynamic<DecrementalSpanner> {
        &self.inner
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::check_stretch;
    use rand::Rng;
    use std::collections::BTreeSet;

    #[test]
    fn capacity_values() {
        assert_eq!(spanner_capacity(16, 2), 64);
        assert_eq!(spanner_capacity(10, 1), 100);
    }

    #[test]
    fn mixed_stream_keeps_stretch() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 30u32;
        for k in [1, 2, 3] {
            let mut g = Graph::new(n as usize);
            let config = WrapperConfig {
                capacity_base: 8,
                rebuild_every: 200,
            };
            let (mut s, out) = FullyDynamicSpanner::with_config(&g, k, config, 5).unwrap();
            let mut held: BTreeSet<Edge> = out.into_iter().collect();
            for _ in 0..40 {
                let mut ins = Vec::new();
                let mut del = Vec::new();
                for _ in 0..rng.gen_range(1..10) {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(0..n);
                    if a == b {
                        continue;
                    }
                    let e = Edge::new(a, b).unwrap();
                    if g.contains(&e) {
                        if !ins.contains(&e) {
                            del.push(e);
                        }
                    } else if !del.contains(&e) {
                        ins.push(e);
                    }
                }
                for e in &del {
                    g.remove(e);
                }
                let d1 = s.delete_batch(&del).unwrap();
                for e in &ins {
                    g.insert(*e);
                }
                let d2 = s.insert_batch(&ins).unwrap();
                for d in [d1, d2] {
                    for e in &d.deleted {
                        assert!(held.remove(e));
                    }
                    for e in &d.inserted {
                        assert!(held.insert(*e));
                    }
                }
                assert_eq!(held, s.edges().into_iter().collect());
                check_stretch(&g, &s.edges(), 2 * k - 1).unwrap();
                s.wrapper().check_invariants().unwrap();
            }
        }
    }
}
