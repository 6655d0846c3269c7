//! Priority-ordered list with rank access.
//!
//! Elements carry distinct integer priorities and are ordered by decreasing
//! priority, so rank 1 is the element with the largest priority. Backed by an
//! arena treap with subtree sizes; heap keys are derived from the priority by
//! a fixed mixer, which keeps the shape (and every traversal) deterministic.

use crate::error::{Error, Result};

const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node<T> {
    priority: u64,
    heap: u64,
    size: u32,
    left: u32,
    right: u32,
    value: T,
}

#[derive(Clone, Debug)]
pub struct OrderedList<T> {
    nodes: Vec<Node<T>>,
    free: Vec<u32>,
    root: u32,
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl<T> Default for OrderedList<T> {
    fn default() -> Self {
        OrderedList {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
        }
    }
}

impl<T> OrderedList<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the list from `(value, priority)` pairs.
    pub fn initialize(pairs: impl IntoIterator<Item = (T, u64)>) -> Result<Self> {
        let mut list = OrderedList::new();
        for (value, p) in pairs {
            list.insert(value, p)?;
        }
        Ok(list)
    }

    pub fn len(&self) -> usize {
        self.size(self.root) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.root == NIL
    }

    fn size(&self, t: u32) -> u32 {
        if t == NIL {
            0
        } else {
            self.nodes[t as usize].size
        }
    }

    fn pull(&mut self, t: u32) {
        let (l, r) = {
            let n = &self.nodes[t as usize];
            (n.left, n.right)
        };
        self.nodes[t as usize].size = 1 + self.size(l) + self.size(r);
    }

    /// Splits `t` into (priorities > p, priorities <= p).
    fn split(&mut self, t: u32, p: u64) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        if self.nodes[t as usize].priority > p {
            let r = self.nodes[t as usize].right;
            let (a, b) = self.split(r, p);
            self.nodes[t as usize].right = a;
            self.pull(t);
            (t, b)
        } else {
            let l = self.nodes[t as usize].left;
            let (a, b) = self.split(l, p);
            self.nodes[t as usize].left = b;
            self.pull(t);
            (a, t)
        }
    }

    /// Merges two treaps where every priority in `a` exceeds every one in `b`.
    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].heap >= self.nodes[b as usize].heap {
            let r = self.nodes[a as usize].right;
            let m = self.merge(r, b);
            self.nodes[a as usize].right = m;
            self.pull(a);
            a
        } else {
            let l = self.nodes[b as usize].left;
            let m = self.merge(a, l);
            self.nodes[b as usize].left = m;
            self.pull(b);
            b
        }
    }

    fn locate(&self, p: u64) -> Option<u32> {
        let mut t = self.root;
        while t != NIL {
            let node = &self.nodes[t as usize];
            if p == node.priority {
                return Some(t);
            }
            t = if p > node.priority { node.left } else { node.right };
        }
        None
    }

    fn node_at(&self, k: usize) -> Option<u32> {
        if k == 0 || k > self.len() {
            return None;
        }
        let mut t = self.root;
        let mut k = k as u32;
        loop {
            let node = &self.nodes[t as usize];
            let ls = self.size(node.left);
            if k <= ls {
                t = node.left;
            } else if k == ls + 1 {
                return Some(t);
            } else {
                k -= ls + 1;
                t = node.right;
            }
        }
    }

    pub fn contains_priority(&self, p: u64) -> bool {
        self.locate(p).is_some()
    }

    /// Adds an element. Priorities must stay distinct.
    pub fn insert(&mut self, value: T, p: u64) -> Result<()> {
        if p == 0 {
            return Err(Error::InvalidParameter("priorities start at 1".into()));
        }
        if self.locate(p).is_some() {
            return Err(Error::DuplicatePriority(p));
        }
        let node = Node {
            priority: p,
            heap: mix(p),
            size: 1,
            left: NIL,
            right: NIL,
            value,
        };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        let (a, b) = self.split(self.root, p);
        let left = self.merge(a, id);
        self.root = self.merge(left, b);
        Ok(())
    }

    /// Detaches the node with priority `p`, leaving it on the free list.
    fn detach(&mut self, p: u64) -> Option<u32> {
        self.locate(p)?;
        let (a, b) = self.split(self.root, p);
        // `b` holds priorities <= p; peel off exactly p.
        let (mid, rest) = self.split(b, p - 1);
        debug_assert!(mid != NIL && self.nodes[mid as usize].size == 1);
        self.root = self.merge(a, rest);
        Some(mid)
    }

    /// Removes the element with priority `p`, returning its value.
    pub fn remove(&mut self, p: u64) -> Option<T>
    where
        T: Clone,
    {
        let id = self.detach(p)?;
        self.free.push(id);
        Some(self.nodes[id as usize].value.clone())
    }

    /// Element with the `k`-th largest priority (1-based).
    pub fn query(&self, k: usize) -> Option<&T> {
        self.node_at(k).map(|t| &self.nodes[t as usize].value)
    }

    pub fn priority_at(&self, k: usize) -> Option<u64> {
        self.node_at(k).map(|t| self.nodes[t as usize].priority)
    }

    pub fn update_value(&mut self, k: usize, v: T) -> Result<()> {
        let t = self.node_at(k).ok_or(Error::RankOutOfBounds {
            rank: k,
            len: self.len(),
        })?;
        self.nodes[t as usize].value = v;
        Ok(())
    }

    /// Re-keys the element at rank `k`; the element moves to the rank its new
    /// priority dictates.
    pub fn update_priority(&mut self, k: usize, p: u64) -> Result<()> {
        let t = self.node_at(k).ok_or(Error::RankOutOfBounds {
            rank: k,
            len: self.len(),
        })?;
        let old = self.nodes[t as usize].priority;
        self.reprioritize(old, p)
    }

    /// Re-keys the element currently holding priority `old`.
    pub fn reprioritize(&mut self, old: u64, p: u64) -> Result<()> {
        if old == p {
            return if self.locate(old).is_some() {
                Ok(())
            } else {
                Err(Error::PriorityAbsent(old))
            };
        }
        if p == 0 {
            return Err(Error::InvalidParameter("priorities start at 1".into()));
        }
        if self.locate(p).is_some() {
            return Err(Error::DuplicatePriority(p));
        }
        let id = self.detach(old).ok_or(Error::PriorityAbsent(old))?;
        {
            let node = &mut self.nodes[id as usize];
            node.priority = p;
            node.heap = mix(p);
            node.size = 1;
            node.left = NIL;
            node.right = NIL;
        }
        let (a, b) = self.split(self.root, p);
        let left = self.merge(a, id);
        self.root = self.merge(left, b);
        Ok(())
    }

    /// The element with priority `p` and the number of elements whose
    /// priority is at least `p` (which is also its rank).
    pub fn find(&self, p: u64) -> Result<(&T, usize)> {
        let mut t = self.root;
        let mut above = 0u32;
        while t != NIL {
            let node = &self.nodes[t as usize];
            if p == node.priority {
                let rank = above + self.size(node.left) + 1;
                return Ok((&node.value, rank as usize));
            }
            if p > node.priority {
                t = node.left;
            } else {
                above += self.size(node.left) + 1;
                t = node.right;
            }
        }
        Err(Error::PriorityAbsent(p))
    }

    /// Rank of the element with priority `p`, if present.
    pub fn rank_of(&self, p: u64) -> Option<usize> {
        self.find(p).ok().map(|(_, r)| r)
    }

    /// Number of elements with priority strictly greater than `p`.
    pub fn count_above(&self, p: u64) -> usize {
        let mut t = self.root;
        let mut above = 0u32;
        while t != NIL {
            let node = &self.nodes[t as usize];
            if node.priority > p {
                above += self.size(node.left) + 1;
                t = node.right;
            } else {
                t = node.left;
            }
        }
        above as usize
    }

    /// Smallest rank `q >= k` whose element satisfies `f`, or `len + 1`.
    ///
    /// Searches blocks of doubling length starting at `k`, so the cost is
    /// proportional to the number of ranks actually inspected.
    pub fn next_with(&self, k: usize, mut f: impl FnMut(&T) -> bool) -> usize {
        let len = self.len();
        let mut start = k.max(1);
        let mut block = 1usize;
        while start <= len {
            let end = (start + block - 1).min(len);
            if let Some(r) = self.first_in_range(self.root, 0, start, end, &mut f) {
                return r;
            }
            start = end + 1;
            block = block.saturating_mul(2);
        }
        len + 1
    }

    fn first_in_range(
        &self,
        t: u32,
        offset: usize,
        lo: usize,
        hi: usize,
        f: &mut impl FnMut(&T) -> bool,
    ) -> Option<usize> {
        if t == NIL {
            return None;
        }
        let node = &self.nodes[t as usize];
        let size = node.size as usize;
        if offset + size < lo || offset + 1 > hi {
            return None;
        }
        let own = offset + self.size(node.left) as usize + 1;
        if lo < own {
            if let Some(r) = self.first_in_range(node.left, offset, lo, hi, f) {
                return Some(r);
            }
        }
        if own >= lo && own <= hi && f(&node.value) {
            return Some(own);
        }
        if hi > own {
            return self.first_in_range(node.right, own, lo, hi, f);
        }
        None
    }

    /// Values in rank order.
    pub fn iter(&self) -> impl Iterator<Item = (&T, u64)> + '_ {
        let mut out = Vec::with_capacity(self.len());
        self.collect_in_order(self.root, &mut out);
        out.into_iter()
    }

    fn collect_in_order<'a>(&'a self, t: u32, out: &mut Vec<(&'a T, u64)>) {
        if t == NIL {
            return;
        }
        let node = &self.nodes[t as usize];
        self.collect_in_order(node.left, out);
        out.push((&node.value, node.priority));
        self.collect_in_order(node.right, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cab() -> OrderedList<char> {
        OrderedList::initialize([('a', 5), ('b', 3), ('c', 9)]).unwrap()
    }

    fn order(l: &OrderedList<char>) -> Vec<char> {
        l.iter().map(|(v, _)| *v).collect()
    }

    #[test]
    fn initialize_sorts_by_decreasing_priority() {
        assert_eq!(order(&cab()), vec!['c', 'a', 'b']);
        let empty: OrderedList<char> = OrderedList::initialize([]).unwrap();
        assert_eq!(empty.len(), 0);
        let one = OrderedList::initialize([('x', 1)]).unwrap();
        assert_eq!(one.query(1), Some(&'x'));
        assert!(matches!(
            OrderedList::initialize([('x', 1), ('y', 1)]),
            Err(Error::DuplicatePriority(1))
        ));
    }

    #[test]
    fn update_value_keeps_order() {
        let mut l = cab();
        l.update_value(2, 'z').unwrap();
        assert_eq!(order(&l), vec!['c', 'z', 'b']);
        let mut one = OrderedList::initialize([('x', 1)]).unwrap();
        one.update_value(1, 'y').unwrap();
        assert_eq!(order(&one), vec!['y']);
        assert!(matches!(
            l.update_value(4, 'q'),
            Err(Error::RankOutOfBounds { rank: 4, len: 3 })
        ));
    }

    #[test]
    fn update_priority_reranks() {
        let mut l = cab();
        l.update_priority(3, 7).unwrap();
        assert_eq!(order(&l), vec!['c', 'b', 'a']);
        l.update_priority(1, 10).unwrap();
        assert_eq!(order(&l), vec!['c', 'b', 'a']);
        assert!(matches!(
            l.update_priority(2, 10),
            Err(Error::DuplicatePriority(10))
        ));
    }

    #[test]
    fn find_reports_count_at_least() {
        let l = cab();
        assert_eq!(l.find(5).unwrap(), (&'a', 2));
        assert_eq!(l.find(9).unwrap(), (&'c', 1));
        assert!(matches!(l.find(4), Err(Error::PriorityAbsent(4))));
    }

    #[test]
    fn next_with_examples() {
        let l = cab();
        assert_eq!(l.next_with(1, |v| *v == 'b'), 3);
        assert_eq!(l.next_with(1, |_| false), 4);
        assert_eq!(l.next_with(2, |_| true), 2);
    }

    #[test]
    fn remove_and_reinsert() {
        let mut l = cab();
        assert_eq!(l.remove(5), Some('a'));
        assert_eq!(order(&l), vec!['c', 'b']);
        l.insert('d', 4).unwrap();
        assert_eq!(order(&l), vec!['c', 'd', 'b']);
        assert_eq!(l.count_above(4), 1);
        assert_eq!(l.remove(100), None);
    }

    #[derive(Clone, Debug)]
    enum Op {
        Insert(u64),
        Remove(usize),
        Reprioritize(usize, u64),
        SetValue(usize, u32),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (1u64..200).prop_map(Op::Insert),
            (1usize..80).prop_map(Op::Remove),
            ((1usize..80), (1u64..200)).prop_map(|(k, p)| Op::Reprioritize(k, p)),
            ((1usize..80), any::<u32>()).prop_map(|(k, v)| Op::SetValue(k, v)),
        ]
    }

    proptest! {
        // Linear-scan oracle: a Vec sorted by decreasing priority.
        #[test]
        fn matches_sorted_vec_oracle(ops in proptest::collection::vec(op(), 1..120),
                                     probes in proptest::collection::vec((1usize..70, 0u32..8), 8)) {
            let mut list: OrderedList<u32> = OrderedList::new();
            let mut oracle: Vec<(u64, u32)> = Vec::new();
            for (i, op) in ops.iter().enumerate() {
                match *op {
                    Op::Insert(p) => {
                        let ok = !oracle.iter().any(|&(q, _)| q == p);
                        prop_assert_eq!(list.insert(i as u32, p).is_ok(), ok);
                        if ok { oracle.push((p, i as u32)); }
                    }
                    Op::Remove(k) => {
                        if k <= oracle.len() {
                            let p = oracle[k - 1].0;
                            prop_assert_eq!(list.remove(p), Some(oracle[k - 1].1));
                            oracle.remove(k - 1);
                        }
                    }
                    Op::Reprioritize(k, p) => {
                        let res = list.update_priority(k, p);
                        if k > oracle.len() {
                            prop_assert!(res.is_err());
                        } else if oracle.iter().enumerate().any(|(j, &(q, _))| q == p && j != k - 1) {
                            prop_assert!(res.is_err());
                        } else {
                            prop_assert!(res.is_ok());
                            oracle[k - 1].0 = p;
                        }
                    }
                    Op::SetValue(k, v) => {
                        let res = list.update_value(k, v);
                        prop_assert_eq!(res.is_ok(), k <= oracle.len());
                        if k <= oracle.len() { oracle[k - 1].1 = v; }
                    }
                }
                oracle.sort_by(|a, b| b.0.cmp(&a.0));
            }
            prop_assert_eq!(list.len(), oracle.len());
            for (r, &(p, v)) in oracle.iter().enumerate() {
                prop_assert_eq!(list.query(r + 1), Some(&v));
                let (fv, cnt) = list.find(p).unwrap();
                prop_assert_eq!(*fv, v);
                prop_assert_eq!(cnt, oracle.iter().filter(|&&(q, _)| q >= p).count());
            }
            for &(k, modulus) in &probes {
                let f = |v: &u32| modulus > 0 && v % (modulus + 1) == 0;
                let expect = (k..=oracle.len())
                    .find(|&r| f(&oracle[r - 1].1))
                    .unwrap_or(oracle.len() + 1);
                prop_assert_eq!(list.next_with(k, f), expect);
            }
        }
    }
}
