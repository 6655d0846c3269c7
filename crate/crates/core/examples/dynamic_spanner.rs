//! Fully-dynamic spanner: insertions and deletions through the
//! logarithmic-method wrapper.

use std::collections::BTreeSet;

use batchdyn::oracle::check_stretch;
use batchdyn::spanner::FullyDynamicSpanner;
use batchdyn::wrapper::WrapperConfig;
use batchdyn::{Edge, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> batchdyn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 60u32;
    let k = 2;
    let g = Graph::new(n as usize);
    // Small classes so the logarithmic structure is visible.
    let config = WrapperConfig::with_cubic_rebuild(64, n as usize);
    let (mut s, _) = FullyDynamicSpanner::with_config(&g, k, config, 11)?;
    let mut present = BTreeSet::new();

    for round in 0..20 {
        let mut ins = Vec::new();
        while ins.len() < 120 {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b {
                continue;
            }
            let e = Edge::new(a, b)?;
            if !present.contains(&e) && !ins.contains(&e) {
                ins.push(e);
            }
        }
        let del: Vec<Edge> = present.iter().copied().filter(|_| rng.gen_bool(0.1)).collect();
        for e in &del {
            present.remove(e);
        }
        present.extend(ins.iter().copied());

        let d = s.delete_batch(&del)?.merge(s.insert_batch(&ins)?);
        let cur = Graph::from_edges(n as usize, present.iter().copied())?;
        check_stretch(&cur, &s.edges(), s.stretch_bound()).expect("stretch");
        s.wrapper().check_invariants()?;
        println!(
            "round {round:2}: m={:4} |H|={:4} delta={:3} classes={:?}",
            cur.m(),
            s.edges().len(),
            d.len(),
            s.wrapper().class_sizes()
        );
    }
    Ok(())
}
