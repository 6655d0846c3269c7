//! Sparse spanners by nested contraction.

pub mod layer;
pub mod nested;
pub mod schedule;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

pub use layer::{Layer, LayerCounters, LayerDelta};
pub use nested::{NestedConfig, NestedSpanner};
pub use schedule::{build_schedule, schedule_for_log, Schedule};

pub const MAX_SAMPLE_ATTEMPTS: usize = 50;

/// Samples each vertex with probability `1/x`, redrawing an empty sample up
/// to [`MAX_SAMPLE_ATTEMPTS`] times before falling back to `{0}`.
pub fn sample_vertices<R: Rng + ?Sized>(n: usize, x: f64, rng: &mut R) -> Vec<bool> {
    if n == 0 {
        return Vec::new();
    }
    let p = (1.0 / x).clamp(0.0, 1.0);
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let s: Vec<bool> = (0..n).map(|_| rng.gen_bool(p)).collect();
        if s.iter().any(|&b| b) {
            return s;
        }
    }
    let mut s = vec![false; n];
    s[0] = true;
    s
}

/// Result of one static contraction.
#[derive(Clone, Debug)]
pub struct ContractionResult {
    /// The contracted graph on the sampled vertices, in sample order.
    pub contracted: Graph,
    /// Edges kept at this level.
    pub kept: Vec<Edge>,
    /// `Head(v)` as a contracted-graph vertex; `None` is the bottom value.
    pub head: Vec<Option<u32>>,
    /// Contracted edge -> one original edge it came from.
    pub witness: BTreeMap<Edge, Edge>,
}

/// Static contraction with sampling rate `1/x` (`x >= 1`).
pub fn contract_static<R: Rng + ?Sized>(g: &Graph, x: f64, rng: &mut R) -> Result<ContractionResult> {
    if !(x >= 1.0) {
        return Err(Error::InvalidParameter(format!("contraction factor {x} < 1")));
    }
    let sampled = sample_vertices(g.n(), x, rng);
    let layer_rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let (layer, next) = Layer::new(g.n(), &g.sorted_edges(), sampled, layer_rng);
    let contracted = Graph::from_edges(layer.next_n(), next.iter().copied())?;
    let head = (0..g.n() as u32)
        .map(|v| layer.head(v).and_then(|h| layer.next_index(h)))
        .collect();
    let witness = next
        .iter()
        .map(|p| (*p, layer.witness(p).expect("every contracted edge has a witness")))
        .collect();
    Ok(ContractionResult {
        contracted,
        kept: layer.kept(),
        head,
        witness,
    })
}

/// `kept ∪ {witness(e') : e' in h_prime}`.
pub fn lift_spanner(h_prime: &[Edge], result: &ContractionResult) -> Result<Vec<Edge>> {
    let mut out = result.kept.clone();
    for e in h_prime {
        let w = result
            .witness
            .get(e)
            .ok_or_else(|| Error::Invariant(format!("no witness for contracted edge {e}")))?;
        out.push(*w);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Stretch after lifting an `s`-spanner through one contraction.
pub fn lifted_stretch(s: u32) -> u32 {
    3 * s + 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::check_stretch;

    fn e(a: u32, b: u32) -> Edge {
        Edge::of(a, b)
    }

    #[test]
    fn x_one_contracts_nothing() {
        let g = Graph::from_edges(5, [e(0, 1), e(1, 2), e(3, 4)]).unwrap();
        let r = contract_static(&g, 1.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(r.contracted.n(), 5);
        assert!(r.kept.is_empty());
        assert_eq!(r.contracted.sorted_edges(), g.sorted_edges());
    }

    #[test]
    fn star_with_sampled_center() {
        let g = Graph::from_edges(6, (1..6).map(|v| e(0, v))).unwrap();
        for seed in 0..200 {
            let r = contract_static(&g, 3.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            if r.contracted.n() == 1 && r.head.iter().all(|h| *h == Some(0)) {
                assert_eq!(r.contracted.m(), 0);
                assert_eq!(r.kept, g.sorted_edges());
                return;
            }
        }
        panic!("center never sampled alone");
    }

    #[test]
    fn sample_rate_near_one_quarter() {
        let g = Graph::new(1000);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mean: f64 = (0..200)
            .map(|_| contract_static(&g, 4.0, &mut rng).unwrap().contracted.n() as f64 / 1000.0)
            .sum::<f64>()
            / 200.0;
        assert!((0.2..=0.3).contains(&mean), "{mean}");
    }

    #[test]
    fn empty_h_prime_lifts_to_kept() {
        let g = Graph::from_edges(4, [e(0, 1), e(2, 3)]).unwrap();
        let r = contract_static(&g, 2.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        if r.contracted.m() == 0 {
            assert_eq!(lift_spanner(&[], &r).unwrap(), r.kept);
        }
    }

    #[test]
    fn lifting_full_contracted_graph_has_stretch_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = rng.gen_range(2..64u32);
            let mut list = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.15) {
                        list.push(e(a, b));
                    }
                }
            }
            let g = Graph::from_edges(n as usize, list).unwrap();
            let r = contract_static(&g, 3.0, &mut rng).unwrap();
            let h = lift_spanner(&r.contracted.sorted_edges(), &r).unwrap();
            check_stretch(&g, &h, lifted_stretch(1)).unwrap();
        }
    }

    #[test]
    fn intra_cluster_bypass_is_two_hops() {
        // 1 and 2 both head to sampled 0; the edge 1-2 is dropped.
        let g = Graph::from_edges(3, [e(0, 1), e(0, 2), e(1, 2)]).unwrap();
        for seed in 0..500 {
            let r = contract_static(&g, 3.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            if r.contracted.n() == 1 && r.head.iter().all(|h| h.is_some()) {
                let h = lift_spanner(&[], &r).unwrap();
                assert!(!h.contains(&e(1, 2)) || r.head[1] != r.head[2]);
                check_stretch(&g, &h, 2).unwrap();
                return;
            }
        }
        panic!("no single-center sample");
    }
}
