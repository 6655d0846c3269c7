//! Spectral sparsifiers from chains of spanner bundles.
//!
//! Level `j` (1-based) holds a bundle `B_j` of `G_{j-1}` and the residual
//! `G_j`, a quarter-sample of `G_{j-1} \ B_j` drawn with coins fixed at
//! construction. The output weighs `B_j` at `4^{j-1}` and the last residual
//! at `4^k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::{BundleChain, MonotoneConfig};
use crate::error::{Error, Result};
use crate::graph::{diff_presence, DeltaEdges, DetMap, DetSet, Edge, Graph, WeightedEdge};
use crate::wrapper::{DecrementalStructure, FullyDynamic, WrapperConfig};

pub const SAMPLE_PROBABILITY: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparsifierParams {
    pub eps: f64,
    /// Constant in front of the bundle size.
    pub c_t: f64,
    pub monotone: MonotoneConfig,
}

impl SparsifierParams {
    pub fn new(eps: f64) -> Self {
        SparsifierParams {
            eps,
            c_t: 1.0,
            monotone: MonotoneConfig::default(),
        }
    }

    pub fn with_c_t(mut self, c_t: f64) -> Self {
        self.c_t = c_t;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {} outside (0, 1)", self.eps)));
        }
        if !(self.c_t > 0.0) {
            return Err(Error::InvalidParameter(format!("c_t = {}", self.c_t)));
        }
        Ok(())
    }
}

/// `ceil(c_t * eps^-2 * log2(max(n, 4))^3)`.
pub fn bundle_size(n: usize, eps: f64, c_t: f64) -> usize {
    let lg = (n.max(4) as f64).log2();
    (c_t * lg.powi(3) / (eps * eps)).ceil().max(1.0) as usize
}

/// Residuals with fewer edges than `ceil(4 log2 n)` end the chain.
pub fn stop_threshold(n: usize) -> usize {
    (4.0 * (n.max(2) as f64).log2()).ceil() as usize
}

/// `ceil(log2 m)`, zero for `m <= 1`.
pub fn chain_length(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (m as f64).log2().ceil() as usize
    }
}

/// One bundle-and-sample step.
#[derive(Clone, Debug)]
pub struct LightLevel {
    bundle: BundleChain,
    coins: DetSet<Edge>,
    residual: Graph,
}

impl LightLevel {
    pub fn bundle(&self) -> &BundleChain {
        &self.bundle
    }

    /// Edges of the input whose coin came up heads.
    pub fn heads(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.coins.iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn residual(&self) -> &Graph {
        &self.residual
    }
}

/// Bundles `g` with size `t`, then keeps each remaining edge with
/// probability 1/4. Coins are drawn for every edge of `g`, in sorted order.
pub fn light_sparsify_init<R: Rng + ?Sized>(
    g: &Graph,
    t: usize,
    config: &MonotoneConfig,
    rng: &mut R,
) -> Result<LightLevel> {
    let mut brng = ChaCha8Rng::seed_from_u64(rng.gen());
    let (bundle, _) = BundleChain::new(g, t, config.clone(), &mut brng)?;
    let mut coins = DetSet::default();
    let mut residual = Graph::new(g.n());
    for e in g.sorted_edges() {
        if rng.gen_bool(SAMPLE_PROBABILITY) {
            coins.insert(e);
            if !bundle.contains(&e) {
                residual.insert(e);
            }
        }
    }
    Ok(LightLevel {
        bundle,
        coins,
        residual,
    })
}

#[derive(Clone, Debug)]
pub struct SparsifierChain {
    graph: Graph,
    params: SparsifierParams,
    k: usize,
    t: usize,
    threshold: usize,
    levels: Vec<LightLevel>,
    output: DetMap<Edge, u64>,
}

impl SparsifierChain {
    pub fn new<R: Rng + ?Sized>(
        g: &Graph,
        params: SparsifierParams,
        rng: &mut R,
    ) -> Result<(Self, Vec<WeightedEdge>)> {
        params.validate()?;
        let n = g.n();
        let k = chain_length(g.m());
        let threshold = stop_threshold(n);
        let t = bundle_size(n, params.eps / (2 * k.max(1)) as f64, params.c_t);
        let mut levels: Vec<LightLevel> = Vec::new();
        let mut current = g.clone();
        while levels.len() < k && current.m() >= threshold {
            let level = light_sparsify_init(&current, t, &params.monotone, rng)?;
            current = level.residual.clone();
            levels.push(level);
        }
        let mut me = SparsifierChain {
            graph: g.clone(),
            params,
            k,
            t,
            threshold,
            levels,
            output: DetMap::default(),
        };
        for e in g.edges() {
            if let Some(w) = me.weight_of(e) {
                me.output.insert(*e, w);
            }
        }
        let out = me.output();
        Ok((me, out))
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn params(&self) -> &SparsifierParams {
        &self.params
    }

    /// `ceil(log2 m)` at construction.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bundle_size(&self) -> usize {
        self.t
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Levels currently alive; the residual weight is `4^depth`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, j: usize) -> &LightLevel {
        &self.levels[j]
    }

    pub fn final_residual(&self) -> &Graph {
        self.levels.last().map_or(&self.graph, |l| &l.residual)
    }

    pub fn len(&self) -> usize {
        self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output.is_empty()
    }

    pub fn output(&self) -> Vec<WeightedEdge> {
        let mut v: Vec<WeightedEdge> = self
            .output
            .iter()
            .map(|(&edge, &weight)| WeightedEdge { edge, weight })
            .collect();
        v.sort_unstable();
        v
    }

    /// The level an output edge came from: `Some(j)` for `B_j` (1-based),
    /// `None` for the residual.
    pub fn source_of(&self, e: &Edge) -> Option<Option<usize>> {
        let mut current = &self.graph;
        for (j, level) in self.levels.iter().enumerate() {
            if !current.contains(e) {
                return None;
            }
            if level.bundle.contains(e) {
                return Some(Some(j + 1));
            }
            current = &level.residual;
        }
        current.contains(e).then_some(None)
    }

    fn weight_of(&self, e: &Edge) -> Option<u64> {
        match self.source_of(e)? {
            Some(j) => Some(4u64.pow(j as u32 - 1)),
            None => Some(4u64.pow(self.levels.len() as u32)),
        }
    }

    pub fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges<WeightedEdge>> {
        let mut del: Vec<Edge> = edges.iter().copied().filter(|e| self.graph.contains(e)).collect();
        del.sort_unstable();
        del.dedup();
        if del.is_empty() {
            return Ok(DeltaEdges::new());
        }
        for e in &del {
            self.graph.remove(e);
        }
        let mut touched: DetSet<Edge> = del.iter().copied().collect();
        let mut incoming: Vec<Edge> = del;
        for level in &mut self.levels {
            let d = level.bundle.delete_batch(&incoming)?;
            touched.extend(d.inserted.iter().copied());
            touched.extend(d.deleted.iter().copied());
            let mut next: Vec<Edge> = incoming
                .iter()
                .chain(&d.inserted)
                .copied()
                .filter(|e| level.residual.contains(e))
                .collect();
            next.sort_unstable();
            next.dedup();
            for e in &next {
                level.residual.remove(e);
            }
            incoming = next;
        }
        let keep = if self.graph.m() < self.threshold {
            Some(0)
        } else {
            self.levels
                .iter()
                .position(|l| l.residual.m() < self.threshold)
                .map(|j| j + 1)
        };
        if let Some(keep) = keep.filter(|&j| j < self.levels.len()) {
            self.levels.truncate(keep);
            touched.extend(self.final_residual().edges().copied());
        }
        let before: Vec<WeightedEdge> = touched
            .iter()
            .filter_map(|e| self.output.get(e).map(|&w| WeightedEdge { edge: *e, weight: w }))
            .collect();
        let mut after = Vec::new();
        for e in &touched {
            match self.weight_of(e) {
                Some(w) => {
                    self.output.insert(*e, w);
                    after.push(WeightedEdge { edge: *e, weight: w });
                }
                None => {
                    self.output.remove(e);
                }
            }
        }
        let delta = diff_presence(before, after);
        #[cfg(debug_assertions)]
        self.check_consistency().expect("sparsifier chain consistency");
        Ok(delta)
    }

    /// Rebuilds every residual from the bundles and the coin records and
    /// compares the weighted output with the maintained one.
    pub fn check_consistency(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(m));
        let mut current = self.graph.clone();
        for (j, level) in self.levels.iter().enumerate() {
            level.bundle.check_consistency()?;
            if level.bundle.graph().sorted_edges() != current.sorted_edges() {
                return fail(format!("bundle {} runs on the wrong graph", j + 1));
            }
            let mut next = Graph::new(current.n());
            for e in current.edges() {
                if level.coins.contains(e) && !level.bundle.contains(e) {
                    next.insert(*e);
                }
            }
            if next.sorted_edges() != level.residual.sorted_edges() {
                return fail(format!("residual {} differs from its coin record", j + 1));
            }
            if j + 1 < self.levels.len() && next.m() < self.threshold {
                return fail(format!("residual {} is below the threshold", j + 1));
            }
            current = next;
        }
        let mut want: DetMap<Edge, u64> = DetMap::default();
        for (j, level) in self.levels.iter().enumerate() {
            for e in level.bundle.edges() {
                want.insert(e, 4u64.pow(j as u32));
            }
        }
        let top = 4u64.pow(self.levels.len() as u32);
        for e in current.edges() {
            if want.insert(*e, top).is_some() {
                return fail(format!("{e} is both bundled and residual"));
            }
        }
        if want != self.output {
            return fail("weighted output differs from reconstruction".into());
        }
        Ok(())
    }
}

impl DecrementalStructure for SparsifierChain {
    type Item = WeightedEdge;
    type Params = SparsifierParams;

    fn build(
        n: usize,
        edges: Vec<Edge>,
        params: &SparsifierParams,
        seed: u64,
    ) -> Result<(Self, Vec<WeightedEdge>)> {
        let g = Graph::from_edges(n, edges)?;
        SparsifierChain::new(&g, params.clone(), &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges<WeightedEdge>> {
        SparsifierChain::delete_batch(self, edges)
    }

    fn output(&self) -> Vec<WeightedEdge> {
        SparsifierChain::output(self)
    }
}

/// Fully-dynamic sparsifier: chains hosted by the wrapper with class
/// capacity `n`.
pub struct FullyDynamicSparsifier {
    inner: FullyDynamic<SparsifierChain>,
}

impl FullyDynamicSparsifier {
    pub fn new(g: &Graph, params: SparsifierParams, seed: u64) -> Result<(Self, Vec<WeightedEdge>)> {
        let config = WrapperConfig::with_cubic_rebuild(g.n().max(1), g.n());
        Self::with_config(g, params, config, seed)
    }

    pub fn with_config(
        g: &Graph,
        params: SparsifierParams,
        config: WrapperConfig,
        seed: u64,
    ) -> Result<(Self, Vec<WeightedEdge>)> {
        params.validate()?;
        let (inner, out) = FullyDynamic::new(g.n(), g.sorted_edges(), params, config, seed)?;
        Ok((FullyDynamicSparsifier { inner }, out))
    }

    pub fn insert_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges<WeightedEdge>> {
        self.inner.insert_batch(edges)
    }

    pub fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges<WeightedEdge>> {
        self.inner.delete_batch(edges)
    }

    pub fn output(&self) -> Vec<WeightedEdge> {
        self.inner.output()
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.inner.edges()
    }

    pub fn wrapper(&self) -> &FullyDynamic<SparsifierChain> {
        &self.inner
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::check_cuts;
    use rand::seq::SliceRandom;

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
    fn size_formulas() {
        assert_eq!(bundle_size(2, 0.5, 1.0), 32);
        assert_eq!(bundle_size(16, 1.0, 1.0), 64);
        assert_eq!(stop_threshold(16), 16);
        assert_eq!(chain_length(1), 0);
        assert_eq!(chain_length(40), 6);
    }

    #[test]
    fn bundle_swallowing_everything_samples_nothing() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let g = random_graph(10, 20, &mut r);
        let l = light_sparsify_init(&g, 100, &MonotoneConfig::default(), &mut r).unwrap();
        assert_eq!(l.bundle().edges(), g.sorted_edges());
        assert_eq!(l.residual().m(), 0);
    }

    #[test]
    fn sample_rate_near_one_quarter() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let g = random_graph(30, 200, &mut r);
        let mut total = 0.0;
        for _ in 0..200 {
            let l = light_sparsify_init(&g, 1, &MonotoneConfig::default(), &mut r).unwrap();
            let rest = g.m() - l.bundle().edges().len();
            total += l.residual().m() as f64 / rest as f64;
        }
        let mean = total / 200.0;
        assert!((0.2..=0.3).contains(&mean), "{mean}");
    }

    #[test]
    fn small_graph_is_its_own_sparsifier() {
        let g = Graph::from_edges(3, [Edge::of(0, 1), Edge::of(1, 2), Edge::of(0, 2)]).unwrap();
        let (c, out) =
            SparsifierChain::new(&g, SparsifierParams::new(0.5), &mut ChaCha8Rng::seed_from_u64(0))
                .unwrap();
        assert_eq!(c.depth(), 0);
        assert!(out.iter().all(|w| w.weight == 1));
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn full_strength_bundle_is_exact() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let g = random_graph(12, 40, &mut r);
        let (c, out) = SparsifierChain::new(&g, SparsifierParams::new(0.5), &mut r).unwrap();
        assert_eq!(c.depth(), 1);
        assert!(out.iter().all(|w| w.weight == 1));
        assert!(check_cuts(12, &g.sorted_edges(), &out, 0.0, &mut r).pass);
    }

    #[test]
    fn weak_bundles_build_deep_chains() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let g = random_graph(60, 1200, &mut r);
        let params = SparsifierParams::new(0.5).with_c_t(1e-9);
        let (mut c, out) = SparsifierChain::new(&g, params, &mut r).unwrap();
        assert!(c.depth() >= 2, "depth {}", c.depth());
        assert!(out.iter().any(|w| w.weight > 1));
        c.check_consistency().unwrap();
        let mut current: std::collections::BTreeSet<WeightedEdge> = out.into_iter().collect();
        let mut order = g.sorted_edges();
        order.shuffle(&mut r);
        for chunk in order.chunks(60) {
            let d = c.delete_batch(chunk).unwrap();
            for w in &d.deleted {
                assert!(current.remove(w));
            }
            for w in &d.inserted {
                assert!(current.insert(*w));
            }
            assert_eq!(current.iter().copied().collect::<Vec<_>>(), c.output());
        }
        assert!(c.is_empty());
    }

    #[test]
    fn fully_dynamic_keeps_support_and_weights() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(12, 30, &mut r);
        let (mut s, _) = FullyDynamicSparsifier::new(&g, SparsifierParams::new(0.5), 9).unwrap();
        let mut present: std::collections::BTreeSet<Edge> = g.sorted_edges().into_iter().collect();
        for _ in 0..20 {
            let mut ins = Vec::new();
            let mut del = Vec::new();
            for _ in 0..4 {
                let (a, b) = (r.gen_range(0..12), r.gen_range(0..12));
                if a == b {
                    continue;
                }
                let e = Edge::of(a, b);
                if present.contains(&e) {
                    del.push(e);
                    present.remove(&e);
                } else if !del.contains(&e) {
                    ins.push(e);
                    present.insert(e);
                }
            }
            ins.retain(|e| present.contains(e));
            s.delete_batch(&del).unwrap();
            s.insert_batch(&ins).unwrap();
            let graph: Vec<Edge> = present.iter().copied().collect();
            assert_eq!(s.edges(), graph);
            let cert = check_cuts(12, &graph, &s.output(), 0.5, &mut r);
            assert!(cert.pass, "{cert:?}");
        }
    }
}
