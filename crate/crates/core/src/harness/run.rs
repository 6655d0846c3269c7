//! Trace replay with sampled oracle checks and JSON-lines statistics.

use std::collections::BTreeMap;
use std::time::Instant;

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bundle::{BundleChain, MonotoneConfig};
use crate::contraction::NestedSpanner;
use crate::error::{Error, Result};
use crate::estree::{bounded_bfs, ArcSpec, EsTree};
use crate::graph::{DeltaEdges, Edge, Graph, UpdateBatch, WeightedEdge};
use crate::harness::trace::{StructureFile, Trace};
use crate::oracle::{check_cuts, check_stretch, quadratic_form_check, Laplacian};
use crate::spanner::{spanner_capacity, FullyDynamicSpanner};
use crate::sparsifier::{FullyDynamicSparsifier, SparsifierParams};
use crate::wrapper::{WrapperAudit, WrapperConfig};

const VERIFY_SALT: u64 = 0x5eed_0f_0_7ac1e;
pub const QUAD_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    /// Bounded-depth BFS tree from one source (deletions only).
    Estree,
    /// Fully-dynamic `(2k-1)`-spanner.
    Spanner,
    /// Nested-contraction sparse spanner.
    Sparse,
    /// Decremental `t`-bundle (deletions only).
    Bundle,
    /// Fully-dynamic spectral sparsifier.
    Sparsifier,
}

impl Structure {
    pub fn is_decremental(self) -> bool {
        matches!(self, Structure::Estree | Structure::Bundle)
    }

    pub fn name(self) -> &'static str {
        match self {
            Structure::Estree => "estree",
            Structure::Spanner => "spanner",
            Structure::Sparse => "sparse",
            Structure::Bundle => "bundle",
            Structure::Sparsifier => "sparsifier",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub structure: Structure,
    pub k: u32,
    pub t: usize,
    pub eps: f64,
    pub c_t: f64,
    /// Depth bound of the BFS tree.
    pub depth: u32,
    pub source: u32,
    pub seed: u64,
    /// Run the oracle after every this many batches; 0 disables checks.
    pub verify_every: usize,
    pub rebuild_every: Option<u64>,
}

impl RunConfig {
    pub fn new(structure: Structure, seed: u64) -> Self {
        RunConfig {
            structure,
            k: 3,
            t: 4,
            eps: 0.5,
            c_t: 1.0,
            depth: 16,
            source: 0,
            seed,
            verify_every: 1,
            rebuild_every: None,
        }
    }
}

/// One line per batch; batch 0 is construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchRecord {
    pub record: &'static str,
    pub batch: usize,
    pub inserts: usize,
    pub deletes: usize,
    pub delta_ins: usize,
    pub delta_del: usize,
    pub recourse: u64,
    pub size: usize,
    pub graph_m: usize,
    pub verified: Option<bool>,
    pub check: Option<Value>,
    pub digest: String,
    pub counters: BTreeMap<String, u64>,
    pub wall_us: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub record: &'static str,
    pub structure: Structure,
    pub config: RunConfig,
    pub n: usize,
    pub batches: usize,
    pub final_size: usize,
    pub final_m: usize,
    pub recourse: u64,
    pub checks: usize,
    pub failures: usize,
    pub digest: String,
    pub counters: BTreeMap<String, u64>,
    pub wall_us: u64,
}

/// State captured at the first failed check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub batch: usize,
    pub detail: Value,
    pub graph: Vec<Edge>,
    pub output: String,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub records: Vec<BatchRecord>,
    pub summary: Summary,
    pub failure: Option<Failure>,
    pub output: StructureFile,
}

impl RunReport {
    /// JSON lines: every batch record, then the summary.
    pub fn stats_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("serializable record"));
            s.push('\n');
        }
        s.push_str(&serde_json::to_string(&self.summary).expect("serializable summary"));
        s.push('\n');
        s
    }
}

/// Removes every `wall_us` field from a stats stream.
pub fn strip_timing(stats: &str) -> Result<String> {
    let mut out = String::new();
    for line in stats.lines() {
        let mut v: Value = serde_json::from_str(line)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wall_us");
        }
        out.push_str(&v.to_string());
        out.push('\n');
    }
    Ok(out)
}

struct Step {
    lines_ins: Vec<String>,
    lines_del: Vec<String>,
}

fn plain(d: &DeltaEdges) -> Step {
    Step {
        lines_ins: d.inserted.iter().map(|e| format!("H {} {}", e.u, e.v)).collect(),
        lines_del: d.deleted.iter().map(|e| format!("H {} {}", e.u, e.v)).collect(),
    }
}

fn weighted(d: &DeltaEdges<WeightedEdge>) -> Step {
    let f = |w: &WeightedEdge| format!("S {} {} {}", w.edge.u, w.edge.v, w.weight);
    Step {
        lines_ins: d.inserted.iter().map(f).collect(),
        lines_del: d.deleted.iter().map(f).collect(),
    }
}

trait Runner {
    fn apply(&mut self, b: &UpdateBatch) -> Result<Step>;
    fn verify(&mut self, g: &Graph, rng: &mut ChaCha8Rng) -> Result<(bool, Value)>;
    fn output(&self) -> StructureFile;
    fn counters(&self) -> BTreeMap<String, u64>;
}

fn audit_counters(a: &WrapperAudit) -> BTreeMap<String, u64> {
    BTreeMap::from([
        ("index_violations".into(), a.index_violations),
        ("instance_inits".into(), a.instance_inits),
        ("rebuilds".into(), a.rebuilds),
        ("phi".into(), a.phi),
        ("max_phi".into(), a.max_phi),
        ("max_inits_per_edge".into(), a.max_inits_per_edge as u64),
    ])
}

fn wrapper_config(base: usize, n: usize, rebuild: Option<u64>) -> WrapperConfig {
    let mut c = WrapperConfig::with_cubic_rebuild(base, n);
    if let Some(r) = rebuild {
        c.rebuild_every = r.max(1);
    }
    c
}

fn stretch_check(g: &Graph, h: &[Edge], bound: u32) -> (bool, Value) {
    match check_stretch(g, h, bound) {
        Ok(()) => (true, json!({ "stretch_bound": bound })),
        Err(v) => (
            false,
            json!({ "stretch_bound": bound, "violation": [v.edge.u, v.edge.v], "dist": v.dist }),
        ),
    }
}

struct EsRunner {
    es: EsTree,
    tree: Vec<Edge>,
}

impl EsRunner {
    fn tree_edges(es: &EsTree) -> Vec<Edge> {
        let mut v: Vec<Edge> = es.tree_arcs().map(|(a, b)| Edge::of(a, b)).collect();
        v.sort_unstable();
        v
    }
}

impl Runner for EsRunner {
    fn apply(&mut self, b: &UpdateBatch) -> Result<Step> {
        if !b.inserts.is_empty() {
            return Err(Error::InsertIntoDecremental);
        }
        let arcs: Vec<(u32, u32)> = b.deletes.iter().flat_map(|e| [(e.u, e.v), (e.v, e.u)]).collect();
        self.es.delete_batch(&arcs);
        let now = Self::tree_edges(&self.es);
        let d = crate::graph::diff_presence(self.tree.iter().copied(), now.iter().copied());
        self.tree = now;
        Ok(plain(&d))
    }

    fn verify(&mut self, g: &Graph, _: &mut ChaCha8Rng) -> Result<(bool, Value)> {
        self.es.check_invariants()?;
        let adj: Vec<Vec<u32>> = (0..g.n() as u32).map(|v| g.neighbors(v).collect()).collect();
        let want = bounded_bfs(&adj, self.es.source(), self.es.depth_bound());
        let bad = (0..g.n()).find(|&v| want[v] != self.es.dist(v as u32));
        Ok(match bad {
            None => (true, json!({ "dist_exact": true })),
            Some(v) => (
                false,
                json!({ "dist_exact": false, "vertex": v, "have": self.es.dist(v as u32), "want": want[v] }),
            ),
        })
    }

    fn output(&self) -> StructureFile {
        StructureFile::Spanner(self.tree.clone())
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        let c = self.es.counters();
        BTreeMap::from([
            ("pointer_moves".into(), c.pointer_moves),
            ("rescans".into(), c.rescans),
            ("phases".into(), c.phases),
            ("priority_updates".into(), c.priority_updates),
        ])
    }
}

struct SpannerRunner(FullyDynamicSpanner);

impl Runner for SpannerRunner {
    fn apply(&mut self, b: &UpdateBatch) -> Result<Step> {
        let del: Vec<Edge> = b.deletes.iter().copied().collect();
        let ins: Vec<Edge> = b.inserts.iter().copied().collect();
        let d = self.0.delete_batch(&del)?.merge(self.0.insert_batch(&ins)?);
        Ok(plain(&d))
    }

    fn verify(&mut self, g: &Graph, _: &mut ChaCha8Rng) -> Result<(bool, Value)> {
        self.0.wrapper().check_invariants()?;
        Ok(stretch_check(g, &self.0.edges(), self.0.stretch_bound()))
    }

    fn output(&self) -> StructureFile {
        StructureFile::Spanner(self.0.edges())
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        audit_counters(self.0.wrapper().audit())
    }
}

struct SparseRunner(NestedSpanner);

impl Runner for SparseRunner {
    fn apply(&mut self, b: &UpdateBatch) -> Result<Step> {
        let del: Vec<Edge> = b.deletes.iter().copied().collect();
        let ins: Vec<Edge> = b.inserts.iter().copied().collect();
        Ok(plain(&self.0.full_update(&ins, &del)?))
    }

    fn verify(&mut self, g: &Graph, _: &mut ChaCha8Rng) -> Result<(bool, Value)> {
        self.0.check_consistency()?;
        let bound = u32::try_from(self.0.stretch_bound()).unwrap_or(u32::MAX);
        Ok(stretch_check(g, &self.0.edges(), bound))
    }

    fn output(&self) -> StructureFile {
        StructureFile::Spanner(self.0.edges())
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        let mut c = audit_counters(self.0.base().wrapper().audit());
        let layers = self.0.layer_counters();
        c.insert("layers".into(), layers.len() as u64);
        c.insert("layer_received".into(), layers.iter().map(|l| l.received).sum());
        c.insert("layer_forwarded".into(), layers.iter().map(|l| l.forwarded).sum());
        c.insert("head_changes".into(), layers.iter().map(|l| l.head_changes).sum());
        for (i, name) in ["d1", "d2", "d3", "d4", "i1", "i2", "i3", "i4", "i5"].iter().enumerate() {
            c.insert(format!("case_{name}"), layers.iter().map(|l| l.cases[i]).sum());
        }
        c
    }
}

struct BundleRunner(BundleChain);

impl Runner for BundleRunner {
    fn apply(&mut self, b: &UpdateBatch) -> Result<Step> {
        if !b.inserts.is_empty() {
            return Err(Error::InsertIntoDecremental);
        }
        let del: Vec<Edge> = b.deletes.iter().copied().collect();
        Ok(plain(&self.0.delete_batch(&del)?))
    }

    fn verify(&mut self, _: &Graph, _: &mut ChaCha8Rng) -> Result<(bool, Value)> {
        self.0.check_consistency()?;
        let mut levels = Vec::new();
        let mut pass = self.0.audit().reentries == 0 && self.0.audit().journal_violations == 0;
        for i in 0..self.0.depth() {
            let s = self.0.level_spanner(i);
            let bound = 2 * s.realized_depth() + 1;
            let (ok, detail) = stretch_check(s.graph(), &self.0.level_edges(i), bound);
            pass &= ok;
            levels.push(detail);
        }
        Ok((pass, json!({ "levels": levels, "audit": self.0.audit() })))
    }

    fn output(&self) -> StructureFile {
        StructureFile::Spanner(self.0.edges())
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([
            ("levels".into(), self.0.depth() as u64),
            ("spanner_recourse".into(), self.0.spanner_recourse()),
            ("reentries".into(), self.0.audit().reentries),
            ("journal_violations".into(), self.0.audit().journal_violations),
        ])
    }
}

struct SparsifierRunner {
    s: FullyDynamicSparsifier,
    eps: f64,
}

impl Runner for SparsifierRunner {
    fn apply(&mut self, b: &UpdateBatch) -> Result<Step> {
        let del: Vec<Edge> = b.deletes.iter().copied().collect();
        let ins: Vec<Edge> = b.inserts.iter().copied().collect();
        let d = self.s.delete_batch(&del)?.merge(self.s.insert_batch(&ins)?);
        Ok(weighted(&d))
    }

    fn verify(&mut self, g: &Graph, rng: &mut ChaCha8Rng) -> Result<(bool, Value)> {
        self.s.wrapper().check_invariants()?;
        let out = self.s.output();
        let cuts = check_cuts(g.n(), &g.sorted_edges(), &out, self.eps, rng);
        let lg = Laplacian::unweighted(g.n(), &g.sorted_edges());
        let lh = Laplacian::of_sparsifier(g.n(), &out);
        let quad = quadratic_form_check(&lg, &lh, self.eps, QUAD_TRIALS, rng);
        Ok((cuts.pass && quad.pass, json!({ "cuts": cuts, "quadratic_form": quad })))
    }

    fn output(&self) -> StructureFile {
        StructureFile::Sparsifier(self.s.output())
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        audit_counters(self.s.wrapper().audit())
    }
}

fn build(cfg: &RunConfig, g: &Graph) -> Result<(Box<dyn Runner>, Step)> {
    let seed = cfg.seed;
    Ok(match cfg.structure {
        Structure::Estree => {
            if (cfg.source as usize) >= g.n() {
                return Err(Error::VertexOutOfRange { v: cfg.source, n: g.n() });
            }
            let arcs: Vec<ArcSpec> = g
                .sorted_edges()
                .iter()
                .flat_map(|e| [ArcSpec::new(e.u, e.v, e.u as u64 + 1), ArcSpec::new(e.v, e.u, e.v as u64 + 1)])
                .collect();
            let es = EsTree::init(g.n(), &arcs, cfg.source, cfg.depth)?;
            let tree = EsRunner::tree_edges(&es);
            let step = plain(&DeltaEdges {
                inserted: tree.iter().copied().collect(),
                deleted: Default::default(),
            });
            (Box::new(EsRunner { es, tree }), step)
        }
        Structure::Spanner => {
            let config = wrapper_config(spanner_capacity(g.n(), cfg.k), g.n(), cfg.rebuild_every);
            let (s, out) = FullyDynamicSpanner::with_config(g, cfg.k, config, seed)?;
            let step = plain(&DeltaEdges {
                inserted: out.into_iter().collect(),
                deleted: Default::default(),
            });
            (Box::new(SpannerRunner(s)), step)
        }
        Structure::Sparse => {
            let (s, out) = NestedSpanner::new(g, seed)?;
            let step = plain(&DeltaEdges {
                inserted: out.into_iter().collect(),
                deleted: Default::default(),
            });
            (Box::new(SparseRunner(s)), step)
        }
        Structure::Bundle => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (c, out) = BundleChain::new(g, cfg.t, MonotoneConfig::default(), &mut rng)?;
            let step = plain(&DeltaEdges {
                inserted: out.into_iter().collect(),
                deleted: Default::default(),
            });
            (Box::new(BundleRunner(c)), step)
        }
        Structure::Sparsifier => {
            let params = SparsifierParams::new(cfg.eps).with_c_t(cfg.c_t);
            let config = wrapper_config(g.n().max(1), g.n(), cfg.rebuild_every);
            let (s, out) = FullyDynamicSparsifier::with_config(g, params, config, seed)?;
            let step = weighted(&DeltaEdges {
                inserted: out.into_iter().collect(),
                deleted: Default::default(),
            });
            (Box::new(SparsifierRunner { s, eps: cfg.eps }), step)
        }
    })
}

fn digest(prev: &str, step: &Step) -> String {
    let mut h = Sha256::new();
    h.update(prev.as_bytes());
    for l in &step.lines_del {
        h.update(b"-");
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    for l in &step.lines_ins {
        h.update(b"+");
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Replays `trace` into the configured structure. Stops at the first failed
/// check and records the state in [`RunReport::failure`].
pub fn run(trace: &Trace, cfg: &RunConfig) -> Result<RunReport> {
    if cfg.structure.is_decremental() && trace.has_inserts_after_init() {
        return Err(Error::InsertIntoDecremental);
    }
    let total = Instant::now();
    let mut verify_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ VERIFY_SALT);
    let mut graph = Graph::new(trace.n);
    let empty = UpdateBatch::new();
    let first = trace.batches.first().unwrap_or(&empty);
    let applied = graph.apply_batch(first)?;
    let clock = Instant::now();
    let (mut runner, step) = build(cfg, &graph)?;
    let mut records = Vec::new();
    let mut recourse = 0u64;
    let mut chain = String::new();
    let mut checks = 0;
    let mut failure = None;
    let mut size = 0usize;
    let mut pending = Some((applied, step, clock.elapsed()));
    let mut batch = 0;
    loop {
        let (applied, step, took) = match pending.take() {
            Some(p) => p,
            None => {
                batch += 1;
                let Some(raw) = trace.batches.get(batch) else { break };
                let applied = graph.apply_batch(raw)?;
                let clock = Instant::now();
                let step = runner.apply(&applied)?;
                (applied, step, clock.elapsed())
            }
        };
        if batch > 0 {
            recourse += (step.lines_ins.len() + step.lines_del.len()) as u64;
        }
        size = size + step.lines_ins.len() - step.lines_del.len();
        chain = digest(&chain, &step);
        let due = cfg.verify_every > 0 && batch % cfg.verify_every == 0;
        let (verified, check) = if due {
            checks += 1;
            let (ok, detail) = runner.verify(&graph, &mut verify_rng)?;
            if !ok && failure.is_none() {
                failure = Some(Failure {
                    batch,
                    detail: detail.clone(),
                    graph: graph.sorted_edges(),
                    output: runner.output().render(),
                });
            }
            (Some(ok), Some(detail))
        } else {
            (None, None)
        };
        records.push(BatchRecord {
            record: "batch",
            batch,
            inserts: applied.inserts.len(),
            deletes: applied.deletes.len(),
            delta_ins: step.lines_ins.len(),
            delta_del: step.lines_del.len(),
            recourse,
            size,
            graph_m: graph.m(),
            verified,
            check,
            digest: chain.clone(),
            counters: runner.counters(),
            wall_us: took.as_micros() as u64,
        });
        if failure.is_some() {
            break;
        }
    }
    let output = runner.output();
    let summary = Summary {
        record: "summary",
        structure: cfg.structure,
        config: cfg.clone(),
        n: trace.n,
        batches: records.len(),
        final_size: size,
        final_m: graph.m(),
        recourse,
        checks,
        failures: failure.iter().count(),
        digest: chain,
        counters: runner.counters(),
        wall_us: total.elapsed().as_micros() as u64,
    };
    Ok(RunReport {
        records,
        summary,
        failure,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen::{generate, GenConfig, Model};

    fn trace(mix: f64, seed: u64) -> Trace {
        generate(&GenConfig {
            model: Model::Uniform,
            n: 24,
            m: 70,
            batches: 6,
            batch_size: 5,
            mix,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn every_structure_replays_and_verifies() {
        for s in [
            Structure::Estree,
            Structure::Spanner,
            Structure::Sparse,
            Structure::Bundle,
            Structure::Sparsifier,
        ] {
            let mix = if s.is_decremental() { 0.0 } else { 0.5 };
            let t = trace(mix, 3);
            let mut cfg = RunConfig::new(s, 11);
            cfg.depth = 4;
            let r = run(&t, &cfg).unwrap();
            assert!(r.failure.is_none(), "{s:?}: {:?}", r.failure);
            assert_eq!(r.records.len(), t.batches.len());
            assert_eq!(r.summary.checks, t.batches.len());
            let size = match &r.output {
                StructureFile::Spanner(v) => v.len(),
                StructureFile::Sparsifier(v) => v.len(),
            };
            assert_eq!(size, r.summary.final_size, "{s:?}");
            for line in r.stats_lines().lines() {
                let _: Value = serde_json::from_str(line).unwrap();
            }
        }
    }

    #[test]
    fn decremental_structures_reject_inserts() {
        let t = trace(0.5, 4);
        assert!(run(&t, &RunConfig::new(Structure::Bundle, 1)).is_err());
    }

    #[test]
    fn replay_is_deterministic() {
        let t = trace(0.5, 5);
        let cfg = RunConfig::new(Structure::Spanner, 9);
        let a = run(&t, &cfg).unwrap();
        let b = run(&t, &cfg).unwrap();
        assert_eq!(strip_timing(&a.stats_lines()).unwrap(), strip_timing(&b.stats_lines()).unwrap());
        assert_eq!(a.output.render(), b.output.render());
    }
}
