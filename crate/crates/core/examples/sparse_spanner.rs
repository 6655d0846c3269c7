//! Nested-contraction spanner with O(n) edges.

use std::collections::BTreeSet;

use batchdyn::contraction::NestedSpanner;
use batchdyn::oracle::sampled_pair_stretch;
use batchdyn::{Edge, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> batchdyn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 3000u32;
    let mut g = Graph::new(n as usize);
    while g.m() < 12 * n as usize {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            g.insert(Edge::new(a, b)?);
        }
    }
    let (mut s, _) = NestedSpanner::new(&g, 1)?;
    println!(
        "schedule {:?}, depth {}, stretch bound {}",
        s.config().schedule.factors,
        s.depth(),
        s.stretch_bound()
    );
    println!("initial |H| = {} ({:.2} n)", s.len(), s.len() as f64 / n as f64);

    let mut present: BTreeSet<Edge> = g.sorted_edges().into_iter().collect();
    for round in 0..5 {
        let del: Vec<Edge> = present.iter().copied().filter(|_| rng.gen_bool(0.05)).collect();
        let mut ins = Vec::new();
        while ins.len() < del.len() {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                let e = Edge::new(a, b)?;
                if !present.contains(&e) && !ins.contains(&e) {
                    ins.push(e);
                }
            }
        }
        for e in &del {
            present.remove(e);
        }
        present.extend(ins.iter().copied());
        let d = s.full_update(&ins, &del)?;
        println!(
            "round {round}: |H| = {} delta {} propagation {:?}",
            s.len(),
            d.len(),
            s.propagation_factor()
        );
    }
    let worst = sampled_pair_stretch(s.graph(), &s.edges(), 10, &mut rng);
    println!("sampled stretch {worst:?}");
    s.check_consistency()?;
    Ok(())
}
