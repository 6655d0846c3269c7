//! Oblivious workload generators. Streams depend only on the seed.

use std::collections::VecDeque;

use clap::ValueEnum;
use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, UpdateBatch};
use crate::harness::trace::Trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Uniform random pairs; deletions hit uniform present edges.
    Uniform,
    /// Uniform insertions; deletions remove the oldest edges first.
    SlidingWindow,
    /// One endpoint uniform, the other biased by past degree.
    PreferentialAttachment,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenConfig {
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub batches: usize,
    pub batch_size: usize,
    /// Fraction of updates that are insertions.
    pub mix: f64,
    pub seed: u64,
}

struct State {
    n: u32,
    model: Model,
    present: IndexSet<Edge>,
    queue: VecDeque<Edge>,
    ends: Vec<u32>,
    rng: ChaCha8Rng,
}

impl State {
    fn endpoint(&mut self) -> u32 {
        let total = self.ends.len() + self.n as usize;
        match self.model {
            Model::PreferentialAttachment if self.rng.gen_range(0..total) < self.ends.len() => {
                self.ends[self.rng.gen_range(0..self.ends.len())]
            }
            _ => self.rng.gen_range(0..self.n),
        }
    }

    fn fresh(&mut self, avoid: &UpdateBatch) -> Option<Edge> {
        let cap = (self.n as u64 * (self.n as u64 - 1) / 2) as usize;
        if self.present.len() + avoid.deletes.len() >= cap {
            return None;
        }
        for _ in 0..10_000 {
            let u = self.rng.gen_range(0..self.n);
            let v = self.endpoint();
            if u == v {
                continue;
            }
            let e = Edge::of(u, v);
            if !self.present.contains(&e) && !avoid.deletes.contains(&e) {
                return Some(e);
            }
        }
        None
    }

    fn insert(&mut self, e: Edge) {
        self.present.insert(e);
        self.queue.push_back(e);
        self.ends.push(e.u);
        self.ends.push(e.v);
    }

    fn victim(&mut self, avoid: &UpdateBatch) -> Option<Edge> {
        match self.model {
            Model::SlidingWindow => {
                let at = self
                    .queue
                    .iter()
                    .position(|e| self.present.contains(e) && !avoid.inserts.contains(e))?;
                self.queue.remove(at)
            }
            _ => {
                let candidates = self.present.len();
                for _ in 0..candidates.max(1) * 4 {
                    let e = *self.present.get_index(self.rng.gen_range(0..candidates))?;
                    if !avoid.inserts.contains(&e) {
                        return Some(e);
                    }
                }
                None
            }
        }
    }
}

pub fn generate(cfg: &GenConfig) -> Result<Trace> {
    if cfg.n < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    if !(0.0..=1.0).contains(&cfg.mix) {
        return Err(Error::InvalidParameter(format!("mix = {} outside [0, 1]", cfg.mix)));
    }
    let max = cfg.n * (cfg.n - 1) / 2;
    if cfg.m > max {
        return Err(Error::InvalidParameter(format!("m = {} exceeds {max}", cfg.m)));
    }
    let mut st = State {
        n: cfg.n as u32,
        model: cfg.model,
        present: IndexSet::new(),
        queue: VecDeque::new(),
        ends: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let mut trace = Trace::new(cfg.n);
    let mut init = UpdateBatch::new();
    while init.inserts.len() < cfg.m {
        let e = st.fresh(&init).expect("room for the initial graph");
        st.insert(e);
        init.inserts.insert(e);
    }
    trace.batches.push(init);
    for _ in 0..cfg.batches {
        let mut b = UpdateBatch::new();
        for _ in 0..cfg.batch_size {
            let want_insert = st.rng.gen_bool(cfg.mix);
            let picked = if want_insert {
                st.fresh(&b).map(|e| (true, e))
            } else {
                st.victim(&b).map(|e| (false, e))
            };
            match picked {
                Some((true, e)) => {
                    st.insert(e);
                    b.inserts.insert(e);
                }
                Some((false, e)) => {
                    st.present.swap_remove(&e);
                    b.deletes.insert(e);
                }
                None => {}
            }
        }
        trace.batches.push(b);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(model: Model, mix: f64) -> GenConfig {
        GenConfig {
            model,
            n: 8,
            m: 10,
            batches: 2,
            batch_size: 3,
            mix,
            seed: 42,
        }
    }

    #[test]
    fn deletion_trace_is_well_formed() {
        for model in [Model::Uniform, Model::SlidingWindow, Model::PreferentialAttachment] {
            let t = generate(&cfg(model, 0.0)).unwrap();
            assert_eq!(t.batches.len(), 3);
            assert_eq!(t.batches[0].inserts.len(), 10);
            assert!(!t.has_inserts_after_init());
            assert!(!t.render().lines().skip(11).any(|l| l.starts_with('I')));
            let init = t.batches[0].inserts.clone();
            for b in &t.batches[1..] {
                assert_eq!(b.deletes.len(), 3);
                assert!(b.deletes.is_subset(&init));
            }
            let mut g = crate::graph::Graph::new(8);
            for b in &t.batches {
                let applied = g.apply_batch(b).unwrap();
                assert_eq!(&applied, b);
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&cfg(Model::PreferentialAttachment, 0.5)).unwrap().render();
        let b = generate(&cfg(Model::PreferentialAttachment, 0.5)).unwrap().render();
        assert_eq!(a, b);
    }

    #[test]
    fn sliding_window_deletes_oldest() {
        let mut c = cfg(Model::SlidingWindow, 0.0);
        c.batches = 1;
        c.batch_size = 1;
        let t = generate(&c).unwrap();
        let mut st = ChaCha8Rng::seed_from_u64(42);
        let first = loop {
            let u = st.gen_range(0..8u32);
            let v = st.gen_range(0..8u32);
            if u != v {
                break Edge::of(u, v);
            }
        };
        assert!(t.batches[1].deletes.contains(&first));
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut c = cfg(Model::Uniform, 1.5);
        assert!(generate(&c).is_err());
        c.mix = 0.5;
        c.m = 29;
        assert!(generate(&c).is_err());
    }
}
