//! Decremental `t`-bundle: `H_i = spanner(D_i) ∪ J_i` where `D_i` runs on
//! `G \ (H_1 ∪ ... ∪ H_{i-1})`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::monotone::{MonotoneConfig, MonotoneSpanner};
use crate::error::{Error, Result};
use crate::graph::{DeltaEdges, DetSet, Edge, Graph};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BundleAudit {
    /// Edges that entered the bundle a second time.
    pub reentries: u64,
    /// Journal entries that did not come from a spanner deletion.
    pub journal_violations: u64,
    pub recourse: u64,
}

#[derive(Clone, Debug)]
struct Level {
    spanner: MonotoneSpanner,
    journal: DetSet<Edge>,
}

impl Level {
    fn holds(&self, e: &Edge) -> bool {
        self.spanner.contains(e) || self.journal.contains(e)
    }
}

#[derive(Clone, Debug)]
pub struct BundleChain {
    graph: Graph,
    t: usize,
    levels: Vec<Level>,
    members: DetSet<Edge>,
    entered: DetSet<Edge>,
    audit: BundleAudit,
}

impl BundleChain {
    pub fn new<R: Rng + ?Sized>(
        graph: &Graph,
        t: usize,
        config: MonotoneConfig,
        rng: &mut R,
    ) -> Result<(Self, Vec<Edge>)> {
        if t == 0 {
            return Err(Error::InvalidParameter("bundle size must be positive".into()));
        }
        let mut levels = Vec::new();
        let mut residual = graph.clone();
        while levels.len() < t && residual.m() > 0 {
            let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
            let (spanner, out) = MonotoneSpanner::new(&residual, config.clone(), &mut r)?;
            for e in &out {
                residual.remove(e);
            }
            levels.push(Level {
                spanner,
                journal: DetSet::default(),
            });
        }
        let mut me = BundleChain {
            graph: graph.clone(),
            t,
            levels,
            members: DetSet::default(),
            entered: DetSet::default(),
            audit: BundleAudit::default(),
        };
        let out = me.edges();
        me.entered.extend(out.iter().copied());
        me.members.extend(out.iter().copied());
        Ok((me, out))
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Levels actually built; deeper ones would have empty graphs.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level_spanner(&self, i: usize) -> &MonotoneSpanner {
        &self.levels[i].spanner
    }

    /// `H_i`, sorted.
    pub fn level_edges(&self, i: usize) -> Vec<Edge> {
        let l = &self.levels[i];
        let mut v = l.spanner.edges();
        v.extend(l.journal.iter().copied());
        v.sort_unstable();
        v
    }

    pub fn journal(&self, i: usize) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.levels[i].journal.iter().copied().collect();
        v.sort_unstable();
        v
    }

    /// Level holding `e`, if any.
    pub fn level_of(&self, e: &Edge) -> Option<usize> {
        self.levels.iter().position(|l| l.holds(e))
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.level_of(e).is_some()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = Vec::new();
        for i in 0..self.levels.len() {
            v.extend(self.level_edges(i));
        }
        v.sort_unstable();
        v
    }

    pub fn audit(&self) -> &BundleAudit {
        &self.audit
    }

    /// Sum of the per-level spanner recourse ledgers.
    pub fn spanner_recourse(&self) -> u64 {
        self.levels.iter().map(|l| l.spanner.recourse()).sum()
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
        let mut touched: DetSet<Edge> = del.iter().copied().collect();
        let mut incoming: DetSet<Edge> = touched.clone();
        for level in &mut self.levels {
            let here: Vec<Edge> = incoming
                .iter()
                .copied()
                .filter(|e| level.spanner.graph().contains(e))
                .collect();
            let old_journal = level.journal.clone();
            let d = level.spanner.delete_batch(&here)?;
            for e in here.iter().chain(&d.inserted) {
                level.journal.remove(e);
            }
            for e in &d.deleted {
                if level.spanner.graph().contains(e) {
                    level.journal.insert(*e);
                }
            }
            let grew = level
                .journal
                .iter()
                .filter(|e| !old_journal.contains(e) && !d.deleted.contains(e))
                .count();
            let shrank = old_journal
                .iter()
                .filter(|e| {
                    !level.journal.contains(e) && !incoming.contains(e) && !d.inserted.contains(e)
                })
                .count();
            self.audit.journal_violations += (grew + shrank) as u64;
            touched.extend(d.inserted.iter().copied());
            touched.extend(d.deleted.iter().copied());
            incoming.extend(d.inserted.iter().copied());
        }
        let mut touched: Vec<Edge> = touched.into_iter().collect();
        touched.sort_unstable();
        let mut delta = DeltaEdges::new();
        for e in touched {
            let was = self.members.contains(&e);
            let now = self.graph.contains(&e) && self.contains(&e);
            match (was, now) {
                (false, true) => {
                    if !self.entered.insert(e) {
                        self.audit.reentries += 1;
                    }
                    self.members.insert(e);
                    delta.inserted.insert(e);
                }
                (true, false) => {
                    self.members.remove(&e);
                    delta.deleted.insert(e);
                }
                _ => {}
            }
        }
        self.audit.recourse += delta.len() as u64;
        #[cfg(debug_assertions)]
        self.check_consistency().expect("bundle chain consistency");
        Ok(delta)
    }

    /// Checks level graphs against the residual definition and the output
    /// set against the union of levels.
    pub fn check_consistency(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(m));
        let mut residual = self.graph.clone();
        for (i, level) in self.levels.iter().enumerate() {
            level.spanner.check_consistency()?;
            if level.spanner.graph().sorted_edges() != residual.sorted_edges() {
                return fail(format!("level {i} runs on the wrong residual"));
            }
            for e in &level.journal {
                if level.spanner.contains(e) || !residual.contains(e) {
                    return fail(format!("journal {i} holds {e} wrongly"));
                }
            }
            for e in self.level_edges(i) {
                residual.remove(&e);
            }
        }
        if self.levels.len() < self.t && residual.m() > 0 {
            return fail("residual left without a level".into());
        }
        let members: DetSet<Edge> = self.edges().into_iter().collect();
        if members != self.members {
            return fail("bundle membership is stale".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::check_stretch;
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
    fn one_level_is_the_monotone_spanner() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let g = random_graph(20, 60, &mut r);
        let mut r1 = ChaCha8Rng::seed_from_u64(2);
        let (_, b) = BundleChain::new(&g, 1, MonotoneConfig::default(), &mut r1).unwrap();
        let mut r2 = ChaCha8Rng::seed_from_u64(2);
        let mut r3 = ChaCha8Rng::seed_from_u64(r2.gen());
        let (_, s) = MonotoneSpanner::new(&g, MonotoneConfig::default(), &mut r3).unwrap();
        assert_eq!(b, s);
    }

    #[test]
    fn large_t_swallows_graph() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let g = random_graph(10, 25, &mut r);
        let (c, b) = BundleChain::new(&g, 25, MonotoneConfig::default(), &mut r).unwrap();
        assert_eq!(b, g.sorted_edges());
        assert!(c.depth() <= 25);
    }

    #[test]
    fn disconnected_components_stay_apart() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5)].map(|(a, b)| Edge::of(a, b)))
            .unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let (_, b) = BundleChain::new(&g, 2, MonotoneConfig::default(), &mut r).unwrap();
        assert!(b.iter().all(|e| g.contains(e)));
    }

    #[test]
    fn empty_batch_is_quiet() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(12, 30, &mut r);
        let (mut c, _) = BundleChain::new(&g, 3, MonotoneConfig::default(), &mut r).unwrap();
        assert!(c.delete_batch(&[]).unwrap().is_empty());
    }

    #[test]
    fn decremental_run_is_monotone_and_valid() {
        let mut r = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..4 {
            let g = random_graph(40, 200, &mut r);
            let (mut c, out) = BundleChain::new(&g, 3, MonotoneConfig::default(), &mut r).unwrap();
            let mut current: std::collections::BTreeSet<Edge> = out.into_iter().collect();
            let mut order = g.sorted_edges();
            order.shuffle(&mut r);
            for chunk in order.chunks(13) {
                let d = c.delete_batch(chunk).unwrap();
                for e in &d.deleted {
                    assert!(current.remove(e));
                }
                for e in &d.inserted {
                    assert!(current.insert(*e));
                }
                assert_eq!(current.iter().copied().collect::<Vec<_>>(), c.edges());
                c.check_consistency().unwrap();
                for i in 0..c.depth() {
                    let s = c.level_spanner(i);
                    check_stretch(s.graph(), &c.level_edges(i), 2 * s.realized_depth() + 1).unwrap();
                }
            }
            assert_eq!(c.audit().reentries, 0);
            assert_eq!(c.audit().journal_violations, 0);
        }
    }
}
