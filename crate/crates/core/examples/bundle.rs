//! Decremental t-bundle: edges leave the bundle but never re-enter.

use std::collections::BTreeSet;

use batchdyn::bundle::{BundleChain, MonotoneConfig};
use batchdyn::{Edge, Graph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> batchdyn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 128u32;
    let mut g = Graph::new(n as usize);
    while g.m() < 1500 {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            g.insert(Edge::new(a, b)?);
        }
    }
    let (mut c, out) = BundleChain::new(&g, 3, MonotoneConfig::default(), &mut rng)?;
    println!("t=3 bundle over m={}: {} edges", g.m(), out.len());
    for i in 0..c.depth() {
        println!("  level {i}: {} edges", c.level_edges(i).len());
    }

    let mut seen: BTreeSet<Edge> = out.into_iter().collect();
    let mut order = g.sorted_edges();
    order.shuffle(&mut rng);
    for batch in order.chunks(300) {
        let d = c.delete_batch(batch)?;
        for e in &d.inserted {
            assert!(seen.insert(*e), "{e} entered twice");
        }
        println!(
            "deleted {:3}: bundle {:4} +{} -{}",
            batch.len(),
            c.edges().len(),
            d.inserted.len(),
            d.deleted.len()
        );
    }
    println!("spanner recourse {}", c.spanner_recourse());
    Ok(())
}
