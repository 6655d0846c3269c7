//! Generated workloads timed per structure.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::harness::gen::{generate, GenConfig, Model};
use crate::harness::run::{run, RunConfig, Structure};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub structures: Vec<Structure>,
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub batches: usize,
    pub batch_size: usize,
    /// Insert fraction for fully-dynamic structures; deletions-only ones get 0.
    pub mix: f64,
    pub seed: u64,
    pub verify_every: usize,
    pub k: u32,
    pub t: usize,
    pub eps: f64,
    pub depth: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub record: &'static str,
    pub structure: Structure,
    pub n: usize,
    pub m: usize,
    pub batches: usize,
    pub updates: usize,
    pub init_us: u64,
    pub update_us: u64,
    pub updates_per_sec: f64,
    pub final_size: usize,
    pub recourse: u64,
    pub recourse_per_update: f64,
    pub checks: usize,
    pub failures: usize,
    pub counters: BTreeMap<String, u64>,
}

pub fn bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &s in &cfg.structures {
        let trace = generate(&GenConfig {
            model: cfg.model,
            n: cfg.n,
            m: cfg.m,
            batches: cfg.batches,
            batch_size: cfg.batch_size,
            mix: if s.is_decremental() { 0.0 } else { cfg.mix },
            seed: cfg.seed,
        })?;
        let mut rc = RunConfig::new(s, cfg.seed);
        rc.verify_every = cfg.verify_every;
        rc.k = cfg.k;
        rc.t = cfg.t;
        rc.eps = cfg.eps;
        rc.depth = cfg.depth;
        let report = run(&trace, &rc)?;
        let init_us = report.records.first().map_or(0, |r| r.wall_us);
        let update_us: u64 = report.records.iter().skip(1).map(|r| r.wall_us).sum();
        let updates: usize = report.records.iter().skip(1).map(|r| r.inserts + r.deletes).sum();
        out.push(BenchRecord {
            record: "bench",
            structure: s,
            n: cfg.n,
            m: cfg.m,
            batches: cfg.batches,
            updates,
            init_us,
            update_us,
            updates_per_sec: updates as f64 / (update_us.max(1) as f64 / 1e6),
            final_size: report.summary.final_size,
            recourse: report.summary.recourse,
            recourse_per_update: report.summary.recourse as f64 / updates.max(1) as f64,
            checks: report.summary.checks,
            failures: report.summary.failures,
            counters: report.summary.counters,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bench_runs_every_structure() {
        let cfg = BenchConfig {
            structures: vec![Structure::Estree, Structure::Spanner, Structure::Bundle],
            model: Model::SlidingWindow,
            n: 32,
            m: 96,
            batches: 4,
            batch_size: 8,
            mix: 0.5,
            seed: 1,
            verify_every: 2,
            k: 2,
            t: 2,
            eps: 0.5,
            depth: 8,
        };
        let r = bench(&cfg).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|b| b.failures == 0 && b.updates == 32));
    }
}
