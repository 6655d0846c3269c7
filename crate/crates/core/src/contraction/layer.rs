//! One contraction layer under batch updates.
//!
//! Every adjacency entry `w in Adj(v)` carries `(unmark_w, rand)`, where
//! `rand` is drawn when the entry is inserted. An unsampled vertex heads to
//! the sampled neighbor with the smallest entry; a sampled vertex heads to
//! itself. Edges fall into three roles: kept in `H`, contracted away, or
//! mapped to a pair of next-layer vertices.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DetMap, DetSet, Edge};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Kept,
    Intra,
    Next(Edge),
}

/// Deletion cases D1..D4 then insertion cases I1..I5.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LayerCounters {
    pub cases: [u64; 9],
    pub head_changes: u64,
    pub received: u64,
    pub forwarded: u64,
}

/// What one layer update hands to the next layer and to lifting.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LayerDelta {
    pub next_ins: Vec<Edge>,
    pub next_del: Vec<Edge>,
    pub kept_ins: Vec<Edge>,
    pub kept_del: Vec<Edge>,
    /// Next-layer edges that survived but now have a different witness.
    pub rewitnessed: Vec<Edge>,
}

#[derive(Clone, Debug)]
pub struct Layer {
    sampled: Vec<bool>,
    next_index: Vec<Option<u32>>,
    adj: Vec<BTreeSet<(bool, u64, u32)>>,
    rand_of: DetMap<(u32, u32), u64>,
    head: Vec<Option<u32>>,
    edges: DetSet<Edge>,
    roles: DetMap<Edge, Role>,
    kept: DetSet<Edge>,
    next_level: DetMap<Edge, BTreeSet<Edge>>,
    bwd: DetMap<Edge, Edge>,
    fwd: DetMap<Edge, Edge>,
    rng: ChaCha8Rng,
    counters: LayerCounters,
}

#[derive(Default)]
struct Journal {
    kept: BTreeMap<Edge, bool>,
    pairs: BTreeMap<Edge, (bool, Option<Edge>)>,
}

impl Layer {
    /// Builds the layer over `n` vertices with the given sample. Returns the
    /// layer and the next-layer edge set, in next-layer ids.
    pub fn new(n: usize, edges: &[Edge], sampled: Vec<bool>, rng: ChaCha8Rng) -> (Layer, Vec<Edge>) {
        assert_eq!(sampled.len(), n);
        let mut next_index = vec![None; n];
        let mut count = 0;
        for v in 0..n {
            if sampled[v] {
                next_index[v] = Some(count);
                count += 1;
            }
        }
        let mut layer = Layer {
            sampled,
            next_index,
            adj: vec![BTreeSet::new(); n],
            rand_of: DetMap::default(),
            head: vec![None; n],
            edges: DetSet::default(),
            roles: DetMap::default(),
            kept: DetSet::default(),
            next_level: DetMap::default(),
            bwd: DetMap::default(),
            fwd: DetMap::default(),
            rng,
            counters: LayerCounters::default(),
        };
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for e in &sorted {
            layer.link(*e);
        }
        for v in 0..n as u32 {
            layer.head[v as usize] = layer.compute_head(v);
        }
        let mut journal = Journal::default();
        for e in &sorted {
            let r = layer.role(e);
            layer.assign(*e, Some(r), &mut journal);
        }
        layer.settle(&mut journal);
        let mut next: Vec<Edge> = layer.next_level.keys().copied().collect();
        next.sort_unstable();
        (layer, next)
    }

    pub fn n(&self) -> usize {
        self.sampled.len()
    }

    /// Number of vertices in the next layer.
    pub fn next_n(&self) -> usize {
        self.sampled.iter().filter(|&&s| s).count()
    }

    pub fn is_sampled(&self, v: u32) -> bool {
        self.sampled[v as usize]
    }

    /// `Head(v)` as a vertex of this layer.
    pub fn head(&self, v: u32) -> Option<u32> {
        self.head[v as usize]
    }

    /// `Head(v)` as a next-layer index, `-1` for none.
    pub fn head_index(&self, v: u32) -> i64 {
        self.head[v as usize]
            .and_then(|h| self.next_index[h as usize])
            .map_or(-1, |x| x as i64)
    }

    pub fn next_index(&self, v: u32) -> Option<u32> {
        self.next_index[v as usize]
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.edges.iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn kept(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.kept.iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn is_kept(&self, e: &Edge) -> bool {
        self.kept.contains(e)
    }

    /// Witness in this layer of a next-layer edge.
    pub fn witness(&self, next: &Edge) -> Option<Edge> {
        self.bwd.get(next).copied()
    }

    /// Next-layer edge an edge of this layer witnesses.
    pub fn witnessed(&self, e: &Edge) -> Option<Edge> {
        self.fwd.get(e).copied()
    }

    pub fn next_edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.next_level.keys().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn counters(&self) -> &LayerCounters {
        &self.counters
    }

    fn link(&mut self, e: Edge) {
        self.edges.insert(e);
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            let r: u64 = self.rng.gen();
            self.rand_of.insert((a, b), r);
            self.adj[a as usize].insert((!self.sampled[b as usize], r, b));
        }
    }

    fn unlink(&mut self, e: &Edge) {
        self.edges.remove(e);
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            let r = self.rand_of.remove(&(a, b)).expect("entry for a present edge");
            self.adj[a as usize].remove(&(!self.sampled[b as usize], r, b));
        }
    }

    fn compute_head(&self, v: u32) -> Option<u32> {
        if self.sampled[v as usize] {
            return Some(v);
        }
        self.adj[v as usize]
            .first()
            .filter(|(unmark, _, _)| !unmark)
            .map(|&(_, _, w)| w)
    }

    fn role(&self, e: &Edge) -> Role {
        let (ha, hb) = (self.head[e.u as usize], self.head[e.v as usize]);
        match (ha, hb) {
            (None, _) | (_, None) => Role::Kept,
            _ if ha == Some(e.v) || hb == Some(e.u) => Role::Kept,
            (Some(x), Some(y)) if x == y => Role::Intra,
            (Some(x), Some(y)) => Role::Next(Edge::of(
                self.next_index[x as usize].unwrap(),
                self.next_index[y as usize].unwrap(),
            )),
        }
    }

    fn assign(&mut self, e: Edge, new: Option<Role>, journal: &mut Journal) {
        let old = self.roles.get(&e).copied();
        if old == new {
            return;
        }
        for role in [old, new].into_iter().flatten() {
            match role {
                Role::Kept => {
                    journal.kept.entry(e).or_insert_with(|| self.kept.contains(&e));
                }
                Role::Next(p) => {
                    journal.pairs.entry(p).or_insert_with(|| {
                        (self.next_level.contains_key(&p), self.bwd.get(&p).copied())
                    });
                }
                Role::Intra => {}
            }
        }
        match old {
            Some(Role::Kept) => {
                self.kept.remove(&e);
            }
            Some(Role::Next(p)) => {
                if let Some(m) = self.next_level.get_mut(&p) {
                    m.remove(&e);
                }
            }
            _ => {}
        }
        match new {
            Some(Role::Kept) => {
                self.kept.insert(e);
            }
            Some(Role::Next(p)) => {
                self.next_level.entry(p).or_default().insert(e);
            }
            _ => {}
        }
        match new {
            Some(r) => {
                self.roles.insert(e, r);
            }
            None => {
                self.roles.remove(&e);
            }
        }
    }

    /// Drops empty pairs and re-picks witnesses that left their pair.
    fn settle(&mut self, journal: &mut Journal) {
        let pairs: Vec<Edge> = journal.pairs.keys().copied().collect();
        for p in pairs {
            let members = self.next_level.get(&p);
            match members {
                Some(m) if !m.is_empty() => {
                    let current = self.bwd.get(&p).copied();
                    if current.is_some_and(|w| m.contains(&w)) {
                        continue;
                    }
                    let w = *m.first().unwrap();
                    if let Some(old) = current {
                        self.unlink_witness(old, p);
                    }
                    self.bwd.insert(p, w);
                    self.fwd.insert(w, p);
                }
                _ => {
                    self.next_level.remove(&p);
                    if let Some(old) = self.bwd.remove(&p) {
                        self.unlink_witness(old, p);
                    }
                }
            }
        }
    }

    fn unlink_witness(&mut self, w: Edge, p: Edge) {
        if self.fwd.get(&w) == Some(&p) {
            self.fwd.remove(&w);
        }
    }

    fn recompute_heads(&mut self, dirty: &BTreeSet<u32>, touched: &mut BTreeSet<Edge>) {
        for &v in dirty {
            let h = self.compute_head(v);
            if h != self.head[v as usize] {
                self.head[v as usize] = h;
                self.counters.head_changes += 1;
                for &(_, _, w) in &self.adj[v as usize] {
                    touched.insert(Edge::of(v, w));
                }
            }
        }
    }

    fn classify_delete(&self, e: &Edge) -> usize {
        let (ha, hb) = (self.head[e.u as usize], self.head[e.v as usize]);
        if ha.is_none() || hb.is_none() {
            0
        } else if ha != hb {
            1
        } else if ha != Some(e.u) && ha != Some(e.v) {
            2
        } else {
            3
        }
    }

    fn classify_insert(&self, e: &Edge) -> usize {
        let (ha, hb) = (self.head[e.u as usize], self.head[e.v as usize]);
        let (su, sv) = (ha == Some(e.u), hb == Some(e.v));
        let missing = ha.is_none() || hb.is_none();
        match (su, sv) {
            (false, false) if missing => 4,
            (false, false) => 5,
            (true, true) => 6,
            _ if missing => 7,
            _ => 8,
        }
    }

    /// Applies deletions, then insertions, and reports the induced change of
    /// the next-layer graph. Absent deletions and present insertions are
    /// skipped.
    pub fn update(&mut self, ins: &[Edge], del: &[Edge]) -> LayerDelta {
        let mut journal = Journal::default();
        let dels: BTreeSet<Edge> = del.iter().copied().filter(|e| self.edges.contains(e)).collect();
        let mut touched: BTreeSet<Edge> = BTreeSet::new();
        let mut dirty: BTreeSet<u32> = BTreeSet::new();
        for e in &dels {
            let case = self.classify_delete(e);
            self.counters.cases[case] += 1;
            self.unlink(e);
            touched.insert(*e);
            dirty.insert(e.u);
            dirty.insert(e.v);
        }
        self.recompute_heads(&dirty, &mut touched);
        for e in std::mem::take(&mut touched) {
            let r = self.edges.contains(&e).then(|| self.role(&e));
            self.assign(e, r, &mut journal);
        }

        let inss: BTreeSet<Edge> = ins.iter().copied().filter(|e| !self.edges.contains(e)).collect();
        dirty.clear();
        for e in &inss {
            let case = self.classify_insert(e);
            self.counters.cases[case] += 1;
            self.link(*e);
            touched.insert(*e);
            dirty.insert(e.u);
            dirty.insert(e.v);
        }
        self.recompute_heads(&dirty, &mut touched);
        for e in std::mem::take(&mut touched) {
            let r = self.edges.contains(&e).then(|| self.role(&e));
            self.assign(e, r, &mut journal);
        }
        self.settle(&mut journal);

        let mut delta = LayerDelta::default();
        for (&e, &was) in &journal.kept {
            match (was, self.kept.contains(&e)) {
                (false, true) => delta.kept_ins.push(e),
                (true, false) => delta.kept_del.push(e),
                _ => {}
            }
        }
        for (&p, &(existed, witness)) in &journal.pairs {
            let exists = self.next_level.contains_key(&p);
            match (existed, exists) {
                (false, true) => delta.next_ins.push(p),
                (true, false) => delta.next_del.push(p),
                (true, true) if self.bwd.get(&p).copied() != witness => delta.rewitnessed.push(p),
                _ => {}
            }
        }
        self.counters.received += (dels.len() + inss.len()) as u64;
        self.counters.forwarded += (delta.next_ins.len() + delta.next_del.len()) as u64;
        delta
    }

    /// Recomputes heads, kept edges, pair membership and witnesses from the
    /// edge set and the stored entry keys, and compares with the maintained
    /// state.
    pub fn check_from_scratch(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(m));
        let n = self.n();
        let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
        for e in &self.edges {
            nbrs[e.u as usize].push(e.v);
            nbrs[e.v as usize].push(e.u);
        }
        for v in 0..n as u32 {
            let expect = if self.sampled[v as usize] {
                Some(v)
            } else {
                nbrs[v as usize]
                    .iter()
                    .filter(|&&w| self.sampled[w as usize])
                    .min_by_key(|&&w| (self.rand_of[&(v, w)], w))
                    .copied()
            };
            if expect != self.head[v as usize] {
                return fail(format!("head of {v} is {:?}, expected {expect:?}", self.head[v as usize]));
            }
            if self.adj[v as usize].len() != nbrs[v as usize].len() {
                return fail(format!("adjacency of {v} out of sync"));
            }
        }
        let mut kept = BTreeSet::new();
        let mut pairs: BTreeMap<Edge, BTreeSet<Edge>> = BTreeMap::new();
        for e in &self.edges {
            let (ha, hb) = (self.head[e.u as usize], self.head[e.v as usize]);
            if ha.is_none() || hb.is_none() {
                kept.insert(*e);
            } else if ha != hb {
                let (x, y) = (ha.unwrap(), hb.unwrap());
                let p = Edge::of(
                    self.next_index[x as usize].unwrap(),
                    self.next_index[y as usize].unwrap(),
                );
                if ha == Some(e.v) || hb == Some(e.u) {
                    kept.insert(*e);
                } else {
                    pairs.entry(p).or_default().insert(*e);
                }
            }
        }
        for v in 0..n as u32 {
            if let Some(h) = self.head[v as usize] {
                if h != v {
                    kept.insert(Edge::of(v, h));
                }
            }
        }
        let have: BTreeSet<Edge> = self.kept.iter().copied().collect();
        if have != kept {
            return fail("kept edge set differs from reconstruction".into());
        }
        if self.next_level.len() != pairs.len() {
            return fail("next-layer edge count differs".into());
        }
        for (p, members) in &pairs {
            if self.next_level.get(p) != Some(members) {
                return fail(format!("members of next-layer edge {p} differ"));
            }
            let w = self.bwd.get(p).copied();
            match w {
                Some(w) if members.contains(&w) && self.fwd.get(&w) == Some(p) => {}
                _ => return fail(format!("witness of {p} is broken")),
            }
        }
        if self.fwd.len() != self.bwd.len() {
            return fail("forward map has stray entries".into());
        }
        Ok(())
    }
}
