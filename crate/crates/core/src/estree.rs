//! Decremental bounded-depth shortest-path tree (Even–Shiloach style) over a
//! directed graph, processed in distance phases per deletion batch.
//!
//! Every vertex keeps its in-arcs in an [`OrderedList`] keyed by arc
//! priority. For a vertex at distance `d` with `1 <= d <= L`, the parent arc
//! is the first arc of its in-list (highest priority first) whose tail sits at
//! distance `d - 1`. Deleted arcs are tombstoned, never unlinked.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::DetMap;
use crate::ordered_list::OrderedList;

pub type ArcId = u32;

/// Input arc with the priority it carries inside its head's in-list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArcSpec {
    pub tail: u32,
    pub head: u32,
    pub priority: u64,
}

impl ArcSpec {
    pub fn new(tail: u32, head: u32, priority: u64) -> Self {
        ArcSpec {
            tail,
            head,
            priority,
        }
    }
}

#[derive(Clone, Debug)]
struct ArcSlot {
    tail: u32,
    head: u32,
    key: u64,
    alive: bool,
}

/// What a deletion batch changed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChangeReport {
    /// `(vertex, old distance, new distance)`, sorted by vertex.
    pub dist_changes: Vec<(u32, u32, u32)>,
    /// Vertices whose parent arc differs from before the batch, sorted.
    pub parent_changes: Vec<u32>,
    /// Arcs that were alive and are now tombstoned.
    pub removed_arcs: usize,
}

impl ChangeReport {
    pub fn is_quiet(&self) -> bool {
        self.dist_changes.is_empty() && self.parent_changes.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EsCounters {
    pub pointer_moves: u64,
    pub rescans: u64,
    pub phases: u64,
    pub priority_updates: u64,
}

/// Distances from `source` capped at `depth_bound + 1`.
///
/// `out` is the out-adjacency of the directed graph.
pub fn bounded_bfs(out: &[Vec<u32>], source: u32, depth_bound: u32) -> Vec<u32> {
    let n = out.len();
    let unreached = depth_bound + 1;
    let mut dist = vec![unreached; n];
    if n == 0 {
        return dist;
    }
    dist[source as usize] = 0;
    let mut frontier = vec![source];
    for level in 0..depth_bound {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in &out[u as usize] {
                if dist[w as usize] == unreached {
                    dist[w as usize] = level + 1;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    dist
}

#[derive(Clone, Debug)]
pub struct EsTree {
    source: u32,
    depth_bound: u32,
    arcs: Vec<ArcSlot>,
    arc_index: DetMap<(u32, u32), ArcId>,
    in_lists: Vec<OrderedList<ArcId>>,
    out_lists: Vec<Vec<ArcId>>,
    dist: Vec<u32>,
    parent: Vec<Option<ArcId>>,
    initial_in_degree: Vec<u32>,
    moves: Vec<u64>,
    counters: EsCounters,
}

impl EsTree {
    /// Builds the tree over `n` vertices. Priorities must be distinct within
    /// each head's in-list and at least 1.
    pub fn init(n: usize, arcs: &[ArcSpec], source: u32, depth_bound: u32) -> Result<EsTree> {
        if (source as usize) >= n {
            return Err(Error::VertexOutOfRange { v: source, n });
        }
        let mut slots = Vec::with_capacity(arcs.len());
        let mut arc_index = DetMap::default();
        let mut in_lists: Vec<OrderedList<ArcId>> = (0..n).map(|_| OrderedList::new()).collect();
        let mut out_lists = vec![Vec::new(); n];
        for a in arcs {
            for x in [a.tail, a.head] {
                if (x as usize) >= n {
                    return Err(Error::VertexOutOfRange { v: x, n });
                }
            }
            let id = slots.len() as ArcId;
            if arc_index.insert((a.tail, a.head), id).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate arc {} -> {}",
                    a.tail, a.head
                )));
            }
            in_lists[a.head as usize].insert(id, a.priority)?;
            out_lists[a.tail as usize].push(id);
            slots.push(ArcSlot {
                tail: a.tail,
                head: a.head,
                key: a.priority,
                alive: true,
            });
        }
        let out_adj: Vec<Vec<u32>> = out_lists
            .iter()
            .map(|ids| ids.iter().map(|&id| slots[id as usize].head).collect())
            .collect();
        let dist = bounded_bfs(&out_adj, source, depth_bound);
        let initial_in_degree = in_lists.iter().map(|l| l.len() as u32).collect();
        let mut tree = EsTree {
            source,
            depth_bound,
            arcs: slots,
            arc_index,
            in_lists,
            out_lists,
            dist,
            parent: vec![None; n],
            initial_in_degree,
            moves: vec![0; n],
            counters: EsCounters::default(),
        };
        for v in 0..n as u32 {
            let d = tree.dist[v as usize];
            if d >= 1 && d <= depth_bound {
                let q = tree.scan_from(v, 1, d - 1);
                let id = *tree.in_lists[v as usize]
                    .query(q)
                    .expect("reachable vertex has a parent arc");
                tree.parent[v as usize] = Some(id);
            }
        }
        Ok(tree)
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn source(&self) -> u32 {
        self.source
    }

    pub fn depth_bound(&self) -> u32 {
        self.depth_bound
    }

    pub fn dist(&self, v: u32) -> u32 {
        self.dist[v as usize]
    }

    pub fn distances(&self) -> &[u32] {
        &self.dist
    }

    pub fn parent_arc(&self, v: u32) -> Option<ArcId> {
        self.parent[v as usize]
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        self.parent[v as usize].map(|id| self.arcs[id as usize].tail)
    }

    /// Rank of the parent arc inside `In(v)`.
    pub fn scan_rank(&self, v: u32) -> Option<usize> {
        let id = self.parent[v as usize]?;
        self.in_lists[v as usize].rank_of(self.arcs[id as usize].key)
    }

    pub fn arc_id(&self, tail: u32, head: u32) -> Option<ArcId> {
        self.arc_index.get(&(tail, head)).copied()
    }

    pub fn arc(&self, id: ArcId) -> (u32, u32) {
        let a = &self.arcs[id as usize];
        (a.tail, a.head)
    }

    pub fn arc_priority(&self, id: ArcId) -> u64 {
        self.arcs[id as usize].key
    }

    pub fn arc_alive(&self, id: ArcId) -> bool {
        self.arcs[id as usize].alive
    }

    /// Live out-arcs of `v`.
    pub fn out_arcs(&self, v: u32) -> impl Iterator<Item = ArcId> + '_ {
        self.out_lists[v as usize]
            .iter()
            .copied()
            .filter(move |&id| self.arcs[id as usize].alive)
    }

    /// Live in-arcs of `v` in priority order.
    pub fn in_arcs(&self, v: u32) -> Vec<ArcId> {
        self.in_lists[v as usize]
            .iter()
            .map(|(id, _)| *id)
            .filter(|&id| self.arcs[id as usize].alive)
            .collect()
    }

    pub fn counters(&self) -> &EsCounters {
        &self.counters
    }

    /// Forward pointer movement accumulated by `v` during deletions.
    pub fn pointer_moves(&self, v: u32) -> u64 {
        self.moves[v as usize]
    }

    pub fn initial_in_degree(&self, v: u32) -> u32 {
        self.initial_in_degree[v as usize]
    }

    /// Live out-adjacency, for from-scratch recomputation.
    pub fn live_out_adjacency(&self) -> Vec<Vec<u32>> {
        self.out_lists
            .iter()
            .map(|ids| {
                ids.iter()
                    .filter(|&&id| self.arcs[id as usize].alive)
                    .map(|&id| self.arcs[id as usize].head)
                    .collect()
            })
            .collect()
    }

    /// Tree arcs `(parent, child)` of every vertex within the depth bound.
    pub fn tree_arcs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(move |(v, p)| p.map(|id| (self.arcs[id as usize].tail, v as u32)))
    }

    fn scan_from(&self, v: u32, cursor: usize, target: u32) -> usize {
        let arcs = &self.arcs;
        let dist = &self.dist;
        self.in_lists[v as usize].next_with(cursor, |&id| {
            let a = &arcs[id as usize];
            a.alive && dist[a.tail as usize] == target
        })
    }

    /// Removes the given arcs and restores distances and parent pointers.
    /// Arcs that do not exist or are already deleted are ignored.
    pub fn delete_batch(&mut self, arcs: &[(u32, u32)]) -> ChangeReport {
        let depth = self.depth_bound;
        let mut report = ChangeReport::default();
        let mut old_dist: BTreeMap<u32, u32> = BTreeMap::new();
        let mut old_parent: BTreeMap<u32, Option<ArcId>> = BTreeMap::new();
        // bucket[d]: vertices at tentative distance d that must find a parent
        // at distance d - 1, with the rank to resume scanning from.
        let mut buckets: Vec<BTreeMap<u32, (usize, usize)>> = vec![BTreeMap::new(); depth as usize + 2];

        for &(t, h) in arcs {
            let Some(&id) = self.arc_index.get(&(t, h)) else {
                continue;
            };
            if !self.arcs[id as usize].alive {
                continue;
            }
            self.arcs[id as usize].alive = false;
            report.removed_arcs += 1;
            if self.parent[h as usize] == Some(id) {
                let d = self.dist[h as usize];
                let rank = self.in_lists[h as usize]
                    .rank_of(self.arcs[id as usize].key)
                    .expect("parent arc is listed");
                old_parent.entry(h).or_insert(Some(id));
                Self::enqueue(&mut buckets[d as usize], h, (rank + 1, rank));
            }
        }

        for i in 1..=depth {
            let current = std::mem::take(&mut buckets[i as usize]);
            if current.is_empty() {
                continue;
            }
            self.counters.phases += 1;
            for (v, (cursor, prev)) in current {
                debug_assert_eq!(self.dist[v as usize], i);
                self.counters.rescans += 1;
                let before = self.parent[v as usize];
                let q = self.scan_from(v, cursor, i - 1);
                let len = self.in_lists[v as usize].len();
                self.moves[v as usize] += (q - prev) as u64;
                self.counters.pointer_moves += (q - prev) as u64;
                old_parent.entry(v).or_insert(before);
                if q <= len {
                    self.parent[v as usize] = self.in_lists[v as usize].query(q).copied();
                    continue;
                }
                old_dist.entry(v).or_insert(i);
                self.dist[v as usize] = i + 1;
                self.parent[v as usize] = None;
                if i < depth {
                    Self::enqueue(&mut buckets[i as usize + 1], v, (1, 0));
                    for k in 0..self.out_lists[v as usize].len() {
                        let a = self.out_lists[v as usize][k];
                        let slot = &self.arcs[a as usize];
                        if !slot.alive {
                            continue;
                        }
                        let c = slot.head;
                        // Children at distance i are pending in this phase.
                        if self.parent[c as usize] == Some(a) && self.dist[c as usize] == i + 1 {
                            let rank = self.in_lists[c as usize]
                                .rank_of(slot.key)
                                .expect("parent arc is listed");
                            Self::enqueue(&mut buckets[i as usize + 1], c, (rank, rank));
                        }
                    }
                }
            }
        }

        report.dist_changes = old_dist
            .into_iter()
            .filter_map(|(v, old)| {
                let new = self.dist[v as usize];
                (new != old).then_some((v, old, new))
            })
            .collect();
        report.parent_changes = old_parent
            .into_iter()
            .filter(|&(v, old)| self.parent[v as usize] != old)
            .map(|(v, _)| v)
            .collect();
        report
    }

    fn enqueue(bucket: &mut BTreeMap<u32, (usize, usize)>, v: u32, cursor: (usize, usize)) {
        bucket
            .entry(v)
            .and_modify(|c| *c = (*c).min(cursor))
            .or_insert(cursor);
    }

    /// Changes the priority of a live arc inside its head's in-list and
    /// repairs the head's parent pointer. Returns true if the head's parent
    /// arc changed.
    pub fn set_arc_priority(&mut self, id: ArcId, priority: u64) -> Result<bool> {
        let (head, tail, old) = {
            let a = &self.arcs[id as usize];
            (a.head, a.tail, a.key)
        };
        if old == priority {
            return Ok(false);
        }
        self.in_lists[head as usize].reprioritize(old, priority)?;
        self.arcs[id as usize].key = priority;
        self.counters.priority_updates += 1;
        if !self.arcs[id as usize].alive {
            return Ok(false);
        }
        let d = self.dist[head as usize];
        if d == 0 || d > self.depth_bound || self.dist[tail as usize] + 1 != d {
            return Ok(false);
        }
        let Some(current) = self.parent[head as usize] else {
            return Ok(false);
        };
        if current == id {
            if priority > old {
                return Ok(false);
            }
            // Arcs ranked above the old position did not qualify and still do
            // not; resume right after it.
            let start = self.in_lists[head as usize].count_above(old) + 1;
            let q = self.scan_from(head, start, d - 1);
            let next = *self.in_lists[head as usize]
                .query(q)
                .expect("the re-keyed arc still qualifies");
            self.parent[head as usize] = Some(next);
            Ok(next != id)
        } else if priority > self.arcs[current as usize].key {
            self.parent[head as usize] = Some(id);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Full invariant audit: distances equal a fresh bounded BFS, every
    /// vertex within the bound points at its first qualifying in-arc, and the
    /// parent arcs form a tree rooted at the source.
    pub fn check_invariants(&self) -> Result<()> {
        let fresh = bounded_bfs(&self.live_out_adjacency(), self.source, self.depth_bound);
        if fresh != self.dist {
            let v = (0..self.n()).find(|&v| fresh[v] != self.dist[v]).unwrap();
            return Err(Error::Invariant(format!(
                "dist({v}) = {} but BFS gives {}",
                self.dist[v], fresh[v]
            )));
        }
        for v in 0..self.n() as u32 {
            let d = self.dist[v as usize];
            let p = self.parent[v as usize];
            if d == 0 || d > self.depth_bound {
                if p.is_some() {
                    return Err(Error::Invariant(format!("vertex {v} at {d} has a parent")));
                }
                continue;
            }
            let first = self.in_lists[v as usize].iter().find(|(id, _)| {
                let a = &self.arcs[**id as usize];
                a.alive && self.dist[a.tail as usize] + 1 == d
            });
            match (p, first) {
                (Some(p), Some((&f, _))) if p == f => {}
                _ => {
                    return Err(Error::Invariant(format!(
                        "scan pointer of {v} is not the first qualifying in-arc"
                    )))
                }
            }
        }
        // Tree check: walking parents from any reached vertex hits the source
        // in exactly dist steps.
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); self.n()];
        for (p, c) in self.tree_arcs() {
            children[p as usize].push(c);
        }
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source as usize] = true;
        while let Some(x) = queue.pop_front() {
            for &c in &children[x as usize] {
                if seen[c as usize] || self.dist[c as usize] != self.dist[x as usize] + 1 {
                    return Err(Error::Invariant(format!("tree arc {x}->{c} is not level")));
                }
                seen[c as usize] = true;
                queue.push_back(c);
            }
        }
        for v in 0..self.n() {
            if (self.dist[v] <= self.depth_bound) != seen[v] {
                return Err(Error::Invariant(format!("vertex {v} tree membership wrong")));
            }
        }
        Ok(())
    }
}
