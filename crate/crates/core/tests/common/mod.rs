#![allow(dead_code)]

use std::collections::BTreeSet;

use batchdyn::{Edge, Graph};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_graph(n: u32, m: usize, rng: &mut ChaCha8Rng) -> Graph {
    let max = n as usize * (n as usize - 1) / 2;
    let mut g = Graph::new(n as usize);
    while g.m() < m.min(max) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            g.insert(Edge::new(a, b).unwrap());
        }
    }
    g
}

/// Shuffled edges of `g` cut into batches.
pub fn deletion_batches(g: &Graph, size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Edge>> {
    let mut order = g.sorted_edges();
    order.shuffle(rng);
    order.chunks(size.max(1)).map(|c| c.to_vec()).collect()
}

/// One mixed batch against `present`, which is updated in place.
pub fn mixed_batch(
    n: u32,
    present: &mut BTreeSet<Edge>,
    ops: usize,
    insert_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Edge>, Vec<Edge>) {
    let mut ins = BTreeSet::new();
    let mut del = BTreeSet::new();
    for _ in 0..ops {
        if rng.gen_bool(insert_fraction) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b {
                continue;
            }
            let e = Edge::new(a, b).unwrap();
            if !present.contains(&e) && !del.contains(&e) {
                ins.insert(e);
            }
        } else if let Some(&e) = present.iter().nth(rng.gen_range(0..present.len().max(1))) {
            if !ins.contains(&e) {
                del.insert(e);
            }
        }
    }
    for e in &del {
        present.remove(e);
    }
    present.extend(ins.iter().copied());
    (ins.into_iter().collect(), del.into_iter().collect())
}
