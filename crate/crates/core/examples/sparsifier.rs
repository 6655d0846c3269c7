//! Spectral sparsifier: the static chain with visible levels, then the
//! fully-dynamic wrapper with exhaustive cut checks on a small graph.

use std::collections::{BTreeMap, BTreeSet};

use batchdyn::oracle::check_cuts;
use batchdyn::sparsifier::{FullyDynamicSparsifier, SparsifierChain, SparsifierParams};
use batchdyn::{Edge, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(n: u32, m: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut g = Graph::new(n as usize);
    while g.m() < m {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            g.insert(Edge::new(a, b).expect("distinct endpoints"));
        }
    }
    g
}

fn main() -> batchdyn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let eps = 0.5;

    // A tiny c_t shrinks the bundles so the chain samples.
    let g = random_graph(60, 1200, &mut rng);
    let params = SparsifierParams::new(eps).with_c_t(1e-9);
    let (chain, out) = SparsifierChain::new(&g, params, &mut rng)?;
    println!("chain: m={} t={} threshold={}", g.m(), chain.bundle_size(), chain.threshold());
    for j in 0..chain.depth() {
        let l = chain.level(j);
        println!("  level {}: bundle {} residual {}", j + 1, l.bundle().edges().len(), l.residual().m());
    }
    let mut by_weight: BTreeMap<u64, usize> = BTreeMap::new();
    for w in &out {
        *by_weight.entry(w.weight).or_default() += 1;
    }
    println!("  output weights: {by_weight:?}");

    let n = 12u32;
    let g = random_graph(n, 40, &mut rng);
    let (mut s, _) = FullyDynamicSparsifier::new(&g, SparsifierParams::new(eps), 2)?;
    let mut present: BTreeSet<Edge> = g.sorted_edges().into_iter().collect();
    for round in 0..6 {
        let del: Vec<Edge> = present.iter().copied().filter(|_| rng.gen_bool(0.15)).collect();
        let mut ins = Vec::new();
        for _ in 0..4 {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                let e = Edge::new(a, b)?;
                if !present.contains(&e) && !ins.contains(&e) && !del.contains(&e) {
                    ins.push(e);
                }
            }
        }
        for e in &del {
            present.remove(e);
        }
        present.extend(ins.iter().copied());
        s.delete_batch(&del)?;
        s.insert_batch(&ins)?;
        let edges: Vec<Edge> = present.iter().copied().collect();
        let report = check_cuts(n as usize, &edges, &s.output(), eps, &mut rng);
        println!(
            "round {round}: m={} |H|={} classes {:?} cuts within eps: {}",
            edges.len(),
            s.output().len(),
            s.wrapper().class_sizes(),
            report.pass
        );
    }
    Ok(())
}
