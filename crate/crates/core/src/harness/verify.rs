//! Standalone certificates for a graph and a structure file.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{Edge, Graph};
use crate::harness::trace::StructureFile;
use crate::oracle::{check_cuts, max_edge_stretch, quadratic_form_check, CutReport, Laplacian, QuadReport};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StretchReport {
    pub bound: Option<u32>,
    /// Largest `dist_H(u, v)` over edges of `G`; `None` if some edge is cut.
    pub max_stretch: Option<u32>,
    /// An edge of `G` over the bound or disconnected in `H`.
    pub witness: Option<Edge>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub kind: &'static str,
    pub pass: bool,
    pub n: usize,
    pub m: usize,
    pub size: usize,
    /// Edges of the structure that are not in the graph.
    pub foreign_edges: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretch: Option<StretchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cuts: Option<CutReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic_form: Option<QuadReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyParams {
    /// Spanner bound; without one only connectivity of every edge is required.
    pub stretch: Option<u32>,
    pub eps: f64,
    pub seed: u64,
}

pub fn verify(g: &Graph, s: &StructureFile, params: &VerifyParams) -> Certificate {
    match s {
        StructureFile::Spanner(h) => {
            let foreign: Vec<Edge> = h.iter().copied().filter(|e| !g.contains(e)).collect();
            let adj: Vec<Vec<u32>> = {
                let mut a = vec![Vec::new(); g.n()];
                for e in h {
                    a[e.u as usize].push(e.v);
                    a[e.v as usize].push(e.u);
                }
                a
            };
            let max_stretch = max_edge_stretch(g, h);
            let bound = params.stretch.unwrap_or(u32::MAX - 1);
            let mut witness = None;
            for e in g.sorted_edges() {
                let d = crate::oracle::bfs(&adj, e.u)[e.v as usize];
                if d as usize >= g.n() || d > bound {
                    witness = Some(e);
                    break;
                }
            }
            Certificate {
                kind: "spanner",
                pass: foreign.is_empty() && witness.is_none(),
                n: g.n(),
                m: g.m(),
                size: h.len(),
                foreign_edges: foreign,
                stretch: Some(StretchReport {
                    bound: params.stretch,
                    max_stretch,
                    witness,
                }),
                cuts: None,
                quadratic_form: None,
            }
        }
        StructureFile::Sparsifier(h) => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let foreign: Vec<Edge> = h.iter().map(|w| w.edge).filter(|e| !g.contains(e)).collect();
            let edges = g.sorted_edges();
            let cuts = check_cuts(g.n(), &edges, h, params.eps, &mut rng);
            let lg = Laplacian::unweighted(g.n(), &edges);
            let lh = Laplacian::of_sparsifier(g.n(), h);
            let quad = quadratic_form_check(&lg, &lh, params.eps, crate::harness::run::QUAD_TRIALS, &mut rng);
            Certificate {
                kind: "sparsifier",
                pass: foreign.is_empty() && cuts.pass && quad.pass,
                n: g.n(),
                m: g.m(),
                size: h.len(),
                foreign_edges: foreign,
                stretch: None,
                cuts: Some(cuts),
                quadratic_form: Some(quad),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedEdge;

    fn params() -> VerifyParams {
        VerifyParams {
            stretch: None,
            eps: 0.3,
            seed: 0,
        }
    }

    fn cycle(n: u32) -> Graph {
        Graph::from_edges(n as usize, (0..n).map(|v| Edge::of(v, (v + 1) % n))).unwrap()
    }

    #[test]
    fn identity_spanner_passes() {
        let g = cycle(6);
        let c = verify(&g, &StructureFile::Spanner(g.sorted_edges()), &params());
        assert!(c.pass);
        assert_eq!(c.stretch.unwrap().max_stretch, Some(1));
    }

    #[test]
    fn empty_spanner_fails_with_witness() {
        let g = cycle(5);
        let c = verify(&g, &StructureFile::Spanner(Vec::new()), &params());
        assert!(!c.pass);
        assert_eq!(c.stretch.unwrap().witness, Some(Edge::of(0, 1)));
    }

    #[test]
    fn bounded_stretch() {
        let g = cycle(6);
        let mut h = g.sorted_edges();
        h.retain(|e| *e != Edge::of(0, 1));
        let mut p = params();
        p.stretch = Some(4);
        assert!(!verify(&g, &StructureFile::Spanner(h.clone()), &p).pass);
        p.stretch = Some(5);
        assert!(verify(&g, &StructureFile::Spanner(h), &p).pass);
    }

    #[test]
    fn sparsifier_reports_worst_ratio() {
        let g = cycle(10);
        let mut h: Vec<WeightedEdge> = g.sorted_edges().into_iter().map(|e| WeightedEdge { edge: e, weight: 1 }).collect();
        h[0].weight = 4;
        let c = verify(&g, &StructureFile::Sparsifier(h), &params());
        assert!(!c.pass);
        let cuts = c.cuts.unwrap();
        assert!(cuts.exhaustive);
        assert!((cuts.min_ratio - 2.0 / 5.0).abs() < 1e-12);
    }
}
