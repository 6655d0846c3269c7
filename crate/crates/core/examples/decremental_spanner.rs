//! Decremental (2k-1)-spanner with cluster bookkeeping.

use batchdyn::oracle::{brute_cluster, check_stretch};
use batchdyn::spanner::DecrementalSpanner;
use batchdyn::{Edge, Graph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> batchdyn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 200u32;
    let mut g = Graph::new(n as usize);
    while g.m() < 3000 {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            g.insert(Edge::new(a, b)?);
        }
    }
    let k = 3;
    let mut s = DecrementalSpanner::init(g.clone(), k, &mut rng)?;
    println!("n={n} m={} k={k}: |H| = {}", g.m(), s.len());

    let mut order = g.sorted_edges();
    order.shuffle(&mut rng);
    for (i, batch) in order.chunks(500).enumerate() {
        let d = s.delete_batch(batch)?;
        check_stretch(s.graph(), &s.edges(), 2 * k - 1).expect("stretch");
        assert_eq!(
            brute_cluster(s.graph(), s.cluster_tree().offsets()),
            s.cluster_tree().clusters()
        );
        println!(
            "batch {i}: m={} |H|={} +{} -{}",
            s.graph().m(),
            s.len(),
            d.inserted.len(),
            d.deleted.len()
        );
    }
    Ok(())
}
