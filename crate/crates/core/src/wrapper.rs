//! Fully-dynamic structures from decremental ones by the logarithmic method.
//!
//! Edges live in classes `E_0, E_1, ...` with `|E_i| <= 2^(i + l_0)`. Class 0
//! is small enough to be reported verbatim; every other nonempty class owns
//! one decremental instance built over exactly its edges. Insertions are
//! binary-carried into fresh instances, deletions are routed by `Index`.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DeltaEdges, DetMap, Edge, OutputItem};

/// A deletions-only structure the wrapper can host.
pub trait DecrementalStructure: Sized + Send {
    type Item: OutputItem;
    type Params: Clone + Send + Sync;

    /// Builds an instance over `edges` and returns it with its output.
    fn build(
        n: usize,
        edges: Vec<Edge>,
        params: &Self::Params,
        seed: u64,
    ) -> Result<(Self, Vec<Self::Item>)>;

    fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges<Self::Item>>;

    fn output(&self) -> Vec<Self::Item>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrapperConfig {
    /// `2^{l_0}` is the smallest power of two at least this large.
    pub capacity_base: usize,
    /// Rebuild from scratch after this many applied updates.
    pub rebuild_every: u64,
}

impl WrapperConfig {
    pub fn new(capacity_base: usize) -> Self {
        WrapperConfig {
            capacity_base,
            rebuild_every: u64::MAX,
        }
    }

    /// The default period `n^3`, saturating.
    pub fn with_cubic_rebuild(capacity_base: usize, n: usize) -> Self {
        let n = n as u64;
        WrapperConfig {
            capacity_base,
            rebuild_every: n.saturating_mul(n).saturating_mul(n).max(1),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WrapperAudit {
    /// Edges re-placed without moving to a higher class. Must stay zero.
    pub index_violations: u64,
    pub instance_inits: u64,
    pub rebuilds: u64,
    pub phi: u64,
    pub max_phi: u64,
    /// Largest number of instance builds a single edge took part in.
    pub max_inits_per_edge: u32,
}

struct Instance<S> {
    edges: BTreeSet<Edge>,
    structure: Option<S>,
}

pub struct FullyDynamic<S: DecrementalStructure> {
    n: usize,
    params: S::Params,
    config: WrapperConfig,
    l0: u32,
    classes: Vec<Instance<S>>,
    index: DetMap<Edge, usize>,
    rng: ChaCha8Rng,
    since_rebuild: u64,
    inits: DetMap<Edge, u32>,
    audit: WrapperAudit,
}

fn smallest_l0(capacity_base: usize) -> u32 {
    capacity_base.max(1).next_power_of_two().trailing_zeros()
}

impl<S: DecrementalStructure> FullyDynamic<S> {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = Edge>,
        params: S::Params,
        config: WrapperConfig,
        seed: u64,
    ) -> Result<(Self, Vec<S::Item>)> {
        let mut w = FullyDynamic {
            n,
            params,
            l0: smallest_l0(config.capacity_base),
            config,
            classes: Vec::new(),
            index: DetMap::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            since_rebuild: 0,
            inits: DetMap::default(),
            audit: WrapperAudit::default(),
        };
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        for e in &edges {
            if e.v as usize >= n {
                return Err(Error::VertexOutOfRange { v: e.v, n });
            }
        }
        w.place_all(edges)?;
        let out = w.output();
        Ok((w, out))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l0(&self) -> u32 {
        self.l0
    }

    pub fn capacity(&self, class: usize) -> usize {
        1usize << (class as u32 + self.l0)
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.edges.len()).collect()
    }

    pub fn class_of(&self, e: &Edge) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn m(&self) -> usize {
        self.index.len()
    }

    pub fn audit(&self) -> &WrapperAudit {
        &self.audit
    }

    /// Instance owning class `i`, if that class is nonempty and above 0.
    pub fn instance(&self, i: usize) -> Option<&S> {
        self.classes.get(i).and_then(|c| c.structure.as_ref())
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.index.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Union of class 0 (verbatim) and every instance's output.
    pub fn output(&self) -> Vec<S::Item> {
        let mut out: Vec<S::Item> = Vec::new();
        for (i, c) in self.classes.iter().enumerate() {
            if i == 0 {
                out.extend(c.edges.iter().map(|e| S::Item::unit(*e)));
            } else if let Some(s) = &c.structure {
                out.extend(s.output());
            }
        }
        out.sort_unstable();
        out
    }

    fn class_output(&self, i: usize) -> Vec<S::Item> {
        let c = &self.classes[i];
        if i == 0 {
            c.edges.iter().map(|e| S::Item::unit(*e)).collect()
        } else {
            c.structure.as_ref().map(|s| s.output()).unwrap_or_default()
        }
    }

    fn ensure_class(&mut self, i: usize) {
        while self.classes.len() <= i {
            self.classes.push(Instance {
                edges: BTreeSet::new(),
                structure: None,
            });
        }
    }

    fn refresh_phi(&mut self) {
        let phi = self
            .classes
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.edges.is_empty())
            .map(|(i, _)| 1u64 << i.min(63))
            .sum();
        self.audit.phi = phi;
        self.audit.max_phi = self.audit.max_phi.max(phi);
    }

    /// Initial placement: everything into the smallest class that fits.
    fn place_all(&mut self, edges: BTreeSet<Edge>) -> Result<()> {
        if edges.is_empty() {
            self.refresh_phi();
            return Ok(());
        }
        let mut j = 0;
        while self.capacity(j) < edges.len() {
            j += 1;
        }
        let mut pending = BTreeMap::new();
        pending.insert(j, edges);
        self.commit(pending)?;
        Ok(())
    }

    /// Builds every pending class, concurrently, and records the new
    /// membership.
    fn commit(&mut self, pending: BTreeMap<usize, BTreeSet<Edge>>) -> Result<()> {
        let jobs: Vec<(usize, Vec<Edge>, u64)> = pending
            .into_iter()
            .map(|(j, edges)| (j, edges.into_iter().collect(), self.rng.gen()))
            .collect();
        for (j, edges, _) in &jobs {
            self.ensure_class(*j);
            for e in edges {
                match self.index.insert(*e, *j) {
                    Some(old) if old >= *j => self.audit.index_violations += 1,
                    _ => {}
                }
            }
        }
        let n = self.n;
        let params = &self.params;
        let built: Vec<(usize, Vec<Edge>, Option<S>)> = jobs
            .into_par_iter()
            .map(|(j, edges, seed)| {
                if j == 0 {
                    return Ok((j, edges, None));
                }
                let (s, _) = S::build(n, edges.clone(), params, seed)?;
                Ok((j, edges, Some(s)))
            })
            .collect::<Result<_>>()?;
        for (j, edges, s) in built {
            if s.is_some() {
                self.audit.instance_inits += 1;
                for e in &edges {
                    let c = self.inits.entry(*e).or_insert(0);
                    *c += 1;
                    self.audit.max_inits_per_edge = self.audit.max_inits_per_edge.max(*c);
                }
            }
            let class = &mut self.classes[j];
            class.edges.extend(edges);
            class.structure = s;
        }
        self.refresh_phi();
        Ok(())
    }

    fn collect_before(&self, touched: &BTreeSet<usize>) -> BTreeSet<S::Item> {
        touched
            .iter()
            .filter(|&&i| i < self.classes.len())
            .flat_map(|&i| self.class_output(i))
            .collect()
    }

    fn tick(&mut self, applied: usize, delta: &mut DeltaEdges<S::Item>) -> Result<()> {
        self.since_rebuild += applied as u64;
        if self.since_rebuild < self.config.rebuild_every {
            return Ok(());
        }
        self.since_rebuild = 0;
        self.audit.rebuilds += 1;
        let before: BTreeSet<S::Item> = self.output().into_iter().collect();
        let edges: BTreeSet<Edge> = self.index.keys().copied().collect();
        self.classes.clear();
        self.index.clear();
        self.place_all(edges)?;
        let after: BTreeSet<S::Item> = self.output().into_iter().collect();
        let step = DeltaEdges {
            inserted: after.difference(&before).cloned().collect(),
            deleted: before.difference(&after).cloned().collect(),
        };
        let merged = std::mem::take(delta).merge(step);
        *delta = merged;
        Ok(())
    }

    /// Inserts edges that are not yet present; present edges are skipped.
    pub fn insert_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges<S::Item>> {
        let mut fresh: BTreeSet<Edge> = BTreeSet::new();
        for e in edges {
            if e.v as usize >= self.n {
                return Err(Error::VertexOutOfRange { v: e.v, n: self.n });
            }
            if !self.index.contains_key(e) {
                fresh.insert(*e);
            }
        }
        let mut delta = DeltaEdges::new();
        if fresh.is_empty() {
            return Ok(delta);
        }
        let applied = fresh.len();
        let base = 1usize << self.l0;
        let rem = applied % base;
        let chunks = applied >> self.l0;
        let mut items = fresh.into_iter();
        let u_r: BTreeSet<Edge> = items.by_ref().take(rem).collect();
        let mut parts: Vec<(usize, BTreeSet<Edge>)> = Vec::new();
        for i in 0..usize::BITS as usize {
            if chunks >> i & 1 == 1 {
                parts.push((i, items.by_ref().take(base << i).collect()));
            }
        }

        let mut pending: BTreeMap<usize, BTreeSet<Edge>> = BTreeMap::new();
        let mut destroyed: BTreeSet<usize> = BTreeSet::new();
        let occupied = |classes: &Vec<Instance<S>>,
                        pending: &BTreeMap<usize, BTreeSet<Edge>>,
                        destroyed: &BTreeSet<usize>,
                        j: usize| {
            pending.contains_key(&j)
                || (!destroyed.contains(&j) && classes.get(j).is_some_and(|c| !c.edges.is_empty()))
        };
        let carry = |start: usize,
                         mut set: BTreeSet<Edge>,
                         classes: &Vec<Instance<S>>,
                         pending: &mut BTreeMap<usize, BTreeSet<Edge>>,
                         destroyed: &mut BTreeSet<usize>| {
            let mut j = start;
            while occupied(classes, pending, destroyed, j) {
                if let Some(p) = pending.remove(&j) {
                    set.extend(p);
                }
                if j < classes.len() && !destroyed.contains(&j) && !classes[j].edges.is_empty() {
                    set.extend(classes[j].edges.iter().copied());
                    destroyed.insert(j);
                }
                j += 1;
            }
            pending.insert(j, set);
        };
        for (i, set) in parts.into_iter().rev() {
            carry(i, set, &self.classes, &mut pending, &mut destroyed);
        }
        let mut append0 = BTreeSet::new();
        if !u_r.is_empty() {
            let e0 = match pending.get(&0) {
                Some(p) => p.len(),
                None => self.classes.first().map_or(0, |c| c.edges.len()),
            };
            if u_r.len() + e0 > base {
                carry(0, u_r, &self.classes, &mut pending, &mut destroyed);
            } else if let Some(p) = pending.get_mut(&0) {
                p.extend(u_r);
            } else {
                append0 = u_r;
            }
        }

        let mut touched: BTreeSet<usize> = destroyed.clone();
        touched.extend(pending.keys().copied());
        if !append0.is_empty() {
            touched.insert(0);
        }
        let before = self.collect_before(&touched);
        for &j in &destroyed {
            let c = &mut self.classes[j];
            c.edges.clear();
            c.structure = None;
        }
        self.commit(pending)?;
        if !append0.is_empty() {
            self.ensure_class(0);
            for e in &append0 {
                self.index.insert(*e, 0);
            }
            self.classes[0].edges.extend(append0);
            self.refresh_phi();
        }
        let after = self.collect_before(&touched);
        delta.inserted = after.difference(&before).cloned().collect();
        delta.deleted = before.difference(&after).cloned().collect();
        self.tick(applied, &mut delta)?;
        self.debug_check();
        Ok(delta)
    }

    /// Deletes present edges; absent ones are skipped.
    pub fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges<S::Item>> {
        let mut routed: BTreeMap<usize, Vec<Edge>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for e in edges {
            if !seen.insert(*e) {
                continue;
            }
            if let Some(j) = self.index.remove(e) {
                routed.entry(j).or_default().push(*e);
            }
        }
        let applied: usize = routed.values().map(|v| v.len()).sum();
        let mut delta = DeltaEdges::new();
        if applied == 0 {
            return Ok(delta);
        }
        if let Some(list) = routed.remove(&0) {
            for e in list {
                self.classes[0].edges.remove(&e);
                delta.deleted.insert(S::Item::unit(e));
            }
        }
        for (&j, list) in &routed {
            for e in list {
                self.classes[j].edges.remove(e);
            }
        }
        let mut work: Vec<(usize, &mut Instance<S>)> = self
            .classes
            .iter_mut()
            .enumerate()
            .filter(|(j, _)| routed.contains_key(j))
            .collect();
        let deltas: Vec<DeltaEdges<S::Item>> = work
            .par_iter_mut()
            .map(|(j, inst)| {
                let s = inst.structure.as_mut().expect("nonempty class has an instance");
                s.delete_batch(&routed[j])
            })
            .collect::<Result<_>>()?;
        for d in deltas {
            delta.absorb(d);
        }
        for &j in routed.keys() {
            let c = &mut self.classes[j];
            if c.edges.is_empty() {
                if let Some(s) = c.structure.take() {
                    delta.deleted.extend(s.output());
                }
            }
        }
        let mut delta = delta.cancel();
        self.refresh_phi();
        self.tick(applied, &mut delta)?;
        self.debug_check();
        Ok(delta)
    }

    fn debug_check(&self) {
        if cfg!(debug_assertions) {
            if let Err(e) = self.check_invariants() {
                panic!("{e}");
            }
        }
    }

    /// Capacity bound per class, exact agreement between `Index` and class
    /// membership, and instances present exactly for nonempty classes.
    pub fn check_invariants(&self) -> Result<()> {
        let mut total = 0;
        for (i, c) in self.classes.iter().enumerate() {
            if c.edges.len() > self.capacity(i) {
                return Err(Error::Invariant(format!(
                    "class {i} holds {} > {}",
                    c.edges.len(),
                    self.capacity(i)
                )));
            }
            if i > 0 && c.edges.is_empty() != c.structure.is_none() {
                return Err(Error::Invariant(format!("class {i} instance mismatch")));
            }
            for e in &c.edges {
                if self.index.get(e) != Some(&i) {
                    return Err(Error::Invariant(format!("index of {e} is not {i}")));
                }
            }
            total += c.edges.len();
        }
        if total != self.index.len() {
            return Err(Error::Invariant("index holds stray edges".into()));
        }
        if self.audit.index_violations > 0 {
            return Err(Error::Invariant("an edge moved to a lower class".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reports every edge it holds; enough to exercise the bookkeeping.
    struct Echo(BTreeSet<Edge>);

    impl DecrementalStructure for Echo {
        type Item = Edge;
        type Params = ();

        fn build(_: usize, edges: Vec<Edge>, _: &(), _: u64) -> Result<(Self, Vec<Edge>)> {
            let s = Echo(edges.iter().copied().collect());
            Ok((s, edges))
        }

        fn delete_batch(&mut self, edges: &[Edge]) -> Result<DeltaEdges> {
            let mut d = DeltaEdges::new();
            for e in edges {
                if self.0.remove(e) {
                    d.deleted.insert(*e);
                }
            }
            Ok(d)
        }

        fn output(&self) -> Vec<Edge> {
            self.0.iter().copied().collect()
        }
    }

    fn edges(range: std::ops::Range<u32>) -> Vec<Edge> {
        range.map(|i| Edge::new(0, i + 1).unwrap()).collect()
    }

    fn wrapper(cap: usize, init: Vec<Edge>) -> FullyDynamic<Echo> {
        FullyDynamic::<Echo>::new(200, init, (), WrapperConfig::new(cap), 1).unwrap().0
    }

    #[test]
    fn initial_placement() {
        assert_eq!(wrapper(4, edges(0..4)).class_sizes(), vec![4]);
        assert_eq!(wrapper(4, edges(0..5)).class_sizes(), vec![0, 5]);
        let empty = wrapper(4, Vec::new());
        assert!(empty.class_sizes().is_empty());
        assert_eq!(empty.audit().phi, 0);
    }

    #[test]
    fn single_insert_lands_in_class_zero() {
        let mut w = wrapper(4, Vec::new());
        let d = w.insert_batch(&edges(0..1)).unwrap();
        assert_eq!(w.class_sizes(), vec![1]);
        assert_eq!(d.inserted.len(), 1);
    }

    #[test]
    fn full_chunk_has_no_remainder() {
        let mut w = wrapper(4, Vec::new());
        w.insert_batch(&edges(0..4)).unwrap();
        assert_eq!(w.class_sizes(), vec![4]);
        assert!(w.instance(0).is_none());
    }

    #[test]
    fn carries_into_higher_classes() {
        let mut w = wrapper(4, Vec::new());
        w.insert_batch(&edges(0..4)).unwrap();
        w.insert_batch(&edges(4..8)).unwrap();
        // second chunk finds class 0 full and carries both into class 1
        assert_eq!(w.class_sizes(), vec![0, 8]);
        w.insert_batch(&edges(8..12)).unwrap();
        assert_eq!(w.class_sizes(), vec![4, 8]);
        w.insert_batch(&edges(12..16)).unwrap();
        assert_eq!(w.class_sizes(), vec![0, 0, 16]);
        assert!(w.instance(2).is_some());
        assert_eq!(w.audit().phi, 4);
    }

    #[test]
    fn remainder_overflow_merges() {
        let mut w = wrapper(4, Vec::new());
        w.insert_batch(&edges(0..3)).unwrap();
        w.insert_batch(&edges(3..5)).unwrap();
        assert_eq!(w.class_sizes(), vec![0, 5]);
    }

    #[test]
    fn delete_routes_and_empties() {
        let mut w = wrapper(4, edges(0..6));
        w.insert_batch(&edges(6..8)).unwrap();
        assert_eq!(w.class_sizes(), vec![2, 6]);
        let d = w.delete_batch(&[edges(0..1)[0], edges(6..7)[0]]).unwrap();
        assert_eq!(d.deleted.len(), 2);
        assert_eq!(w.class_sizes(), vec![1, 5]);
        let all = w.edges();
        w.delete_batch(&all).unwrap();
        assert!(w.instance(1).is_none());
        assert!(w.output().is_empty());
    }

    #[test]
    fn reinserted_edge_moves_up_or_is_fresh() {
        let mut w = wrapper(2, Vec::new());
        for round in 0..20u32 {
            let batch = edges(round * 3..round * 3 + 3);
            w.insert_batch(&batch).unwrap();
            w.delete_batch(&batch[..1]).unwrap();
            w.insert_batch(&batch[..1]).unwrap();
        }
        assert_eq!(w.audit().index_violations, 0);
        w.check_invariants().unwrap();
    }

    #[test]
    fn rebuild_keeps_output() {
        let mut w = FullyDynamic::<Echo>::new(
            200,
            edges(0..5),
            (),
            WrapperConfig {
                capacity_base: 2,
                rebuild_every: 3,
            },
            7,
        )
        .unwrap()
        .0;
        let d = w.insert_batch(&edges(5..9)).unwrap();
        assert_eq!(w.audit().rebuilds, 1);
        assert_eq!(d.inserted.len(), 4);
        assert!(d.deleted.is_empty());
        assert_eq!(w.output(), edges(0..9));
    }
}
