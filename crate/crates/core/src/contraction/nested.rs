//! A stack of contraction layers over a fully-dynamic base spanner.
//!
//! `out[i]` is the spanner of the layer-`i` graph in layer-`i` ids: the kept
//! edges of layer `i` plus the witness of every edge of `out[i + 1]`. The
//! last entry is the base spanner's output.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contraction::layer::{Layer, LayerCounters};
use crate::contraction::sample_vertices;
use crate::contraction::schedule::{build_schedule, Schedule};
use crate::error::{Error, Result};
use crate::graph::{DeltaEdges, DetMap, DetSet, Edge, Graph, UpdateBatch};
use crate::spanner::FullyDynamicSpanner;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestedConfig {
    pub schedule: Schedule,
    /// `k` of the base `(2k-1)`-spanner.
    pub base_k: u32,
}

impl NestedConfig {
    /// Default schedule for `n` and base `k = ceil(log2 n)`.
    pub fn for_n(n: usize) -> Self {
        NestedConfig {
            schedule: build_schedule(n),
            base_k: (n.max(2) as f64).log2().ceil() as u32,
        }
    }
}

pub struct NestedSpanner {
    graph: Graph,
    config: NestedConfig,
    layers: Vec<Layer>,
    base: FullyDynamicSpanner,
    out: Vec<DetSet<Edge>>,
    lifted: Vec<DetMap<Edge, Edge>>,
}

impl NestedSpanner {
    pub fn new(g: &Graph, seed: u64) -> Result<(Self, Vec<Edge>)> {
        Self::with_config(g, NestedConfig::for_n(g.n()), seed)
    }

    pub fn with_config(g: &Graph, config: NestedConfig, seed: u64) -> Result<(Self, Vec<Edge>)> {
        if config.base_k == 0 {
            return Err(Error::InvalidParameter("base k must be positive".into()));
        }
        if let Some(x) = config.schedule.factors.iter().find(|&&x| !(x >= 1.0)) {
            return Err(Error::InvalidParameter(format!("contraction factor {x} < 1")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(config.schedule.len());
        let mut n = g.n();
        let mut edges = g.sorted_edges();
        for &x in &config.schedule.factors {
            let sampled = sample_vertices(n, x, &mut rng);
            let layer_rng = ChaCha8Rng::seed_from_u64(rng.gen());
            let (layer, next) = Layer::new(n, &edges, sampled, layer_rng);
            n = layer.next_n();
            edges = next;
            layers.push(layer);
        }
        let base_graph = Graph::from_edges(n, edges)?;
        let (base, base_out) = FullyDynamicSpanner::new(&base_graph, config.base_k, rng.gen())?;

        let depth = layers.len();
        let mut out: Vec<DetSet<Edge>> = vec![DetSet::default(); depth + 1];
        let mut lifted: Vec<DetMap<Edge, Edge>> = vec![DetMap::default(); depth];
        out[depth] = base_out.into_iter().collect();
        for i in (0..depth).rev() {
            let mut set: DetSet<Edge> = layers[i].kept().into_iter().collect();
            for p in &out[i + 1] {
                let w = layers[i]
                    .witness(p)
                    .ok_or_else(|| Error::Invariant(format!("no witness for {p} at layer {i}")))?;
                lifted[i].insert(*p, w);
                set.insert(w);
            }
            out[i] = set;
        }
        let me = NestedSpanner {
            graph: g.clone(),
            config,
            layers,
            base,
            out,
            lifted,
        };
        let edges = me.edges();
        Ok((me, edges))
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &NestedConfig {
        &self.config
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, i: usize) -> &Layer {
        &self.layers[i]
    }

    pub fn base(&self) -> &FullyDynamicSpanner {
        &self.base
    }

    /// Guaranteed stretch: `2k - 1` at the base, then `3s + 2` per layer.
    pub fn stretch_bound(&self) -> u64 {
        (0..self.layers.len()).fold(2 * self.config.base_k as u64 - 1, |s, _| 3 * s + 2)
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.out[0].iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn len(&self) -> usize {
        self.out[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.out[0].is_empty()
    }

    pub fn layer_counters(&self) -> Vec<LayerCounters> {
        self.layers.iter().map(|l| l.counters().clone()).collect()
    }

    /// Next-layer edges forwarded per edge received, over all layers.
    pub fn propagation_factor(&self) -> Option<f64> {
        let (recv, fwd) = self.layers.iter().fold((0u64, 0u64), |(r, f), l| {
            (r + l.counters().received, f + l.counters().forwarded)
        });
        (recv > 0).then(|| fwd as f64 / recv as f64)
    }

    /// Applies one mixed batch. Duplicate inserts and absent deletes are
    /// ignored; an edge both inserted and deleted is an error.
    pub fn full_update(&mut self, ins: &[Edge], del: &[Edge]) -> Result<DeltaEdges> {
        let batch = UpdateBatch {
            inserts: ins.iter().copied().collect(),
            deletes: del.iter().copied().collect(),
        };
        let applied = self.graph.apply_batch(&batch)?;
        let mut ins: Vec<Edge> = applied.inserts.into_iter().collect();
        let mut del: Vec<Edge> = applied.deletes.into_iter().collect();

        let mut deltas = Vec::with_capacity(self.layers.len());
        for layer in &mut self.layers {
            let d = layer.update(&ins, &del);
            ins = d.next_ins.clone();
            del = d.next_del.clone();
            deltas.push(d);
        }
        let mut below = self.base.delete_batch(&del)?;
        below = below.merge(self.base.insert_batch(&ins)?);
        apply_delta(self.out.last_mut().expect("base output"), &below);

        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let d = &deltas[i];
            let mut touched: BTreeSet<Edge> = BTreeSet::new();
            touched.extend(d.kept_ins.iter().copied());
            touched.extend(d.kept_del.iter().copied());
            let pairs: BTreeSet<Edge> = below
                .inserted
                .iter()
                .chain(&below.deleted)
                .chain(&d.rewitnessed)
                .copied()
                .collect();
            for p in pairs {
                let old = self.lifted[i].remove(&p);
                touched.extend(old);
                if self.out[i + 1].contains(&p) {
                    let w = layer
                        .witness(&p)
                        .ok_or_else(|| Error::Invariant(format!("no witness for {p} at layer {i}")))?;
                    self.lifted[i].insert(p, w);
                    touched.insert(w);
                }
            }
            let mut here = DeltaEdges::new();
            for x in touched {
                let now = layer.is_kept(&x)
                    || layer
                        .witnessed(&x)
                        .is_some_and(|p| self.lifted[i].get(&p) == Some(&x));
                match (self.out[i].contains(&x), now) {
                    (false, true) => {
                        here.inserted.insert(x);
                    }
                    (true, false) => {
                        here.deleted.insert(x);
                    }
                    _ => {}
                }
            }
            apply_delta(&mut self.out[i], &here);
            below = here;
        }
        Ok(below)
    }

    /// Checks every layer against a from-scratch rebuild, the layer chain,
    /// and every output set against its definition.
    pub fn check_consistency(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(m));
        let depth = self.layers.len();
        if depth > 0 && self.layers[0].edges() != self.graph.sorted_edges() {
            return fail("layer 0 disagrees with the graph".into());
        }
        for (i, layer) in self.layers.iter().enumerate() {
            layer.check_from_scratch()?;
            let below = match self.layers.get(i + 1) {
                Some(l) => l.edges(),
                None => self.base.wrapper().edges(),
            };
            if layer.next_edges() != below {
                return fail(format!("layer {i} forwards a different edge set"));
            }
        }
        if depth == 0 && self.base.wrapper().edges() != self.graph.sorted_edges() {
            return fail("base graph disagrees with the graph".into());
        }
        let base: DetSet<Edge> = self.base.edges().into_iter().collect();
        if base != self.out[depth] {
            return fail("base output is stale".into());
        }
        for i in (0..depth).rev() {
            let mut want: DetSet<Edge> = self.layers[i].kept().into_iter().collect();
            for p in &self.out[i + 1] {
                let w = self.layers[i].witness(p);
                if self.lifted[i].get(p).copied() != w {
                    return fail(format!("lifted witness of {p} at layer {i} is stale"));
                }
                want.extend(w);
            }
            if self.lifted[i].len() != self.out[i + 1].len() {
                return fail(format!("layer {i} lifts edges outside the spanner"));
            }
            if want != self.out[i] {
                return fail(format!("output of layer {i} is stale"));
            }
        }
        Ok(())
    }
}

fn apply_delta(set: &mut DetSet<Edge>, d: &DeltaEdges) {
    for e in &d.deleted {
        set.remove(e);
    }
    set.extend(d.inserted.iter().copied());
}
