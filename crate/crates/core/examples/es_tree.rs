//! Bounded-depth BFS tree under arc deletions.
//!
//! Builds a layered digraph, deletes arcs in batches and prints which
//! vertices moved or fell off the tree.

use batchdyn::estree::{ArcSpec, EsTree};
use batchdyn::oracle::directed_bounded_dist;

fn main() -> batchdyn::Result<()> {
    let n = 10;
    let mut arcs = Vec::new();
    for v in 0..n as u32 - 1 {
        arcs.push((v, v + 1));
        if v + 3 < n as u32 {
            arcs.push((v, v + 3));
        }
    }
    // Distinct priorities; larger wins the parent choice.
    let specs: Vec<ArcSpec> = arcs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| ArcSpec::new(a, b, i as u64 + 1))
        .collect();
    let depth = 4;
    let mut es = EsTree::init(n, &specs, 0, depth)?;
    println!("initial dist: {:?}", es.distances());

    let mut live = arcs.clone();
    for batch in [vec![(0, 3)], vec![(3, 6), (1, 2)]] {
        let report = es.delete_batch(&batch);
        live.retain(|a| !batch.contains(a));
        println!("deleted {batch:?}: {report:?}");
        println!("  dist: {:?}", es.distances());
        assert_eq!(es.distances(), directed_bounded_dist(n, &live, 0, depth).as_slice());
    }
    println!("counters: {:?}", es.counters());
    Ok(())
}
