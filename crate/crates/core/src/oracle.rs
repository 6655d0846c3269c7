//! Brute-force verifiers: hop distances, stretch, cluster argmin, cut and
//! Laplacian checks. Nothing here reuses the maintained structures.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::graph::{Edge, Graph, WeightedEdge};
use crate::spanner::ExpOffsets;

/// Largest vertex count for exhaustive cut enumeration.
pub const EXHAUSTIVE_CUT_LIMIT: usize = 14;
/// Sampled cuts used above [`EXHAUSTIVE_CUT_LIMIT`].
pub const SAMPLED_CUTS: usize = 100_000;

fn adjacency(n: usize, edges: &[Edge]) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.u as usize].push(e.v);
        adj[e.v as usize].push(e.u);
    }
    adj
}

/// Hop distances from `s`; unreachable vertices get `n`.
pub fn bfs(adj: &[Vec<u32>], s: u32) -> Vec<u32> {
    let n = adj.len();
    let mut dist = vec![n as u32; n];
    dist[s as usize] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x as usize] {
            if dist[y as usize] == n as u32 {
                dist[y as usize] = dist[x as usize] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// All-pairs hop distances; unreachable pairs hold `n`.
pub fn all_pairs_dist(g: &Graph) -> Vec<Vec<u32>> {
    let adj = adjacency(g.n(), &g.sorted_edges());
    (0..g.n() as u32).map(|s| bfs(&adj, s)).collect()
}

/// Directed distances from `s` capped at `depth + 1`.
pub fn directed_bounded_dist(n: usize, arcs: &[(u32, u32)], s: u32, depth: u32) -> Vec<u32> {
    let mut out = vec![Vec::new(); n];
    for &(a, b) in arcs {
        out[a as usize].push(b);
    }
    let mut dist = vec![u32::MAX; n];
    dist[s as usize] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for &y in &out[x as usize] {
            if dist[y as usize] == u32::MAX {
                dist[y as usize] = dist[x as usize] + 1;
                queue.push_back(y);
            }
        }
    }
    dist.into_iter().map(|d| d.min(depth + 1)).collect()
}

/// First edge of `g` whose endpoints are farther than the bound in `h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StretchViolation {
    pub edge: Edge,
    /// Distance in `h`, `None` if disconnected.
    pub dist: Option<u32>,
}

/// Checks `dist_h(u, v) <= s` for every edge `(u, v)` of `g`.
pub fn check_stretch(g: &Graph, h: &[Edge], s: u32) -> Result<(), StretchViolation> {
    let n = g.n();
    let adj = adjacency(n, h);
    let mut by_source: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in g.sorted_edges() {
        by_source[e.u as usize].push(e.v);
    }
    for (u, targets) in by_source.iter().enumerate() {
        if targets.is_empty() {
            continue;
        }
        let dist = bfs(&adj, u as u32);
        for &v in targets {
            let d = dist[v as usize];
            if d > s || d >= n as u32 {
                return Err(StretchViolation {
                    edge: Edge::of(u as u32, v),
                    dist: (d < n as u32).then_some(d),
                });
            }
        }
    }
    Ok(())
}

/// Largest `dist_h(u, v)` over edges of `g`; `None` if some edge is not
/// connected in `h`.
pub fn max_edge_stretch(g: &Graph, h: &[Edge]) -> Option<u32> {
    let n = g.n();
    let adj = adjacency(n, h);
    let mut worst = 0;
    let mut by_source: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in g.sorted_edges() {
        by_source[e.u as usize].push(e.v);
    }
    for (u, targets) in by_source.iter().enumerate() {
        if targets.is_empty() {
            continue;
        }
        let dist = bfs(&adj, u as u32);
        for &v in targets {
            let d = dist[v as usize];
            if d >= n as u32 {
                return None;
            }
            worst = worst.max(d);
        }
    }
    Some(worst)
}

/// Checks `dist_h(u, v) <= s * dist_g(u, v)` on `pairs` random vertex pairs
/// drawn from `sources` BFS roots. Returns the worst observed ratio.
pub fn sampled_pair_stretch<R: Rng + ?Sized>(
    g: &Graph,
    h: &[Edge],
    sources: usize,
    rng: &mut R,
) -> Option<f64> {
    let n = g.n();
    if n == 0 {
        return Some(0.0);
    }
    let ga = adjacency(n, &g.sorted_edges());
    let ha = adjacency(n, h);
    let mut worst: f64 = 0.0;
    for _ in 0..sources {
        let s = rng.gen_range(0..n as u32);
        let dg = bfs(&ga, s);
        let dh = bfs(&ha, s);
        for v in 0..n {
            if v as u32 == s || dg[v] >= n as u32 {
                continue;
            }
            if dh[v] >= n as u32 {
                return None;
            }
            worst = worst.max(dh[v] as f64 / dg[v] as f64);
        }
    }
    Some(worst)
}

/// `argmin_u (dist(u, v) - delta_u)`, ties toward the larger fractional part.
pub fn brute_cluster(g: &Graph, offsets: &ExpOffsets) -> Vec<u32> {
    let n = g.n();
    let dist = all_pairs_dist(g);
    (0..n)
        .map(|v| {
            let mut best: Option<(i64, f64, u32)> = None;
            for u in 0..n {
                let d = dist[u][v];
                if d >= n as u32 && u != v {
                    continue;
                }
                let shift = d as i64 - offsets.whole(u as u32) as i64;
                let f = offsets.frac(u as u32);
                let better = match best {
                    None => true,
                    Some((bs, bf, _)) => shift < bs || (shift == bs && f > bf),
                };
                if better {
                    best = Some((shift, f, u as u32));
                }
            }
            best.map(|b| b.2).unwrap_or(v as u32)
        })
        .collect()
}

fn cut_value(side: &[bool], edges: &[(Edge, f64)]) -> f64 {
    edges
        .iter()
        .filter(|(e, _)| side[e.u as usize] != side[e.v as usize])
        .map(|(_, w)| w)
        .sum()
}

/// Outcome of a cut comparison between `G` and a weighted `H`.
#[derive(Clone, Debug, Serialize)]
pub struct CutReport {
    pub pass: bool,
    pub cuts_checked: u64,
    pub exhaustive: bool,
    /// Smallest and largest `w_G / w_H` over cuts with `w_H > 0`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// One violating side (vertex membership bitmask over the low ids).
    pub witness: Option<Vec<u32>>,
}

/// Checks `(1-eps) w_H(U) <= w_G(U) <= (1+eps) w_H(U)` over every proper cut
/// when `n <= 14`, else over [`SAMPLED_CUTS`] random cuts.
pub fn check_cuts<R: Rng + ?Sized>(
    n: usize,
    g: &[Edge],
    h: &[WeightedEdge],
    eps: f64,
    rng: &mut R,
) -> CutReport {
    let gw: Vec<(Edge, f64)> = g.iter().map(|e| (*e, 1.0)).collect();
    let hw: Vec<(Edge, f64)> = h.iter().map(|w| (w.edge, w.weight as f64)).collect();
    let mut report = CutReport {
        pass: true,
        cuts_checked: 0,
        exhaustive: n <= EXHAUSTIVE_CUT_LIMIT,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        witness: None,
    };
    if n < 2 {
        return report;
    }
    let mut side = vec![false; n];
    let visit = |side: &[bool], report: &mut CutReport| {
        report.cuts_checked += 1;
        let wg = cut_value(side, &gw);
        let wh = cut_value(side, &hw);
        if wh > 0.0 {
            let r = wg / wh;
            report.min_ratio = report.min_ratio.min(r);
            report.max_ratio = report.max_ratio.max(r);
        }
        let ok = (1.0 - eps) * wh <= wg && wg <= (1.0 + eps) * wh;
        if !ok && report.pass {
            report.pass = false;
            report.witness = Some(
                side.iter()
                    .enumerate()
                    .filter(|(_, &s)| s)
                    .map(|(v, _)| v as u32)
                    .collect(),
            );
        }
    };
    if report.exhaustive {
        // Vertex n-1 stays outside, so each cut is seen once.
        for mask in 1u32..(1u32 << (n - 1)) {
            for (v, s) in side.iter_mut().enumerate().take(n - 1) {
                *s = mask >> v & 1 == 1;
            }
            visit(&side, &mut report);
        }
    } else {
        for _ in 0..SAMPLED_CUTS {
            for s in side.iter_mut() {
                *s = rng.gen_bool(0.5);
            }
            if side.iter().all(|&s| s) || side.iter().all(|&s| !s) {
                continue;
            }
            visit(&side, &mut report);
        }
    }
    report
}

/// Dense weighted Laplacian.
#[derive(Clone, Debug, PartialEq)]
pub struct Laplacian {
    n: usize,
    data: Vec<f64>,
}

impl Laplacian {
    pub fn from_weighted(n: usize, edges: impl IntoIterator<Item = (Edge, f64)>) -> Self {
        let mut data = vec![0.0; n * n];
        for (e, w) in edges {
            let (a, b) = (e.u as usize, e.v as usize);
            data[a * n + a] += w;
            data[b * n + b] += w;
            data[a * n + b] -= w;
            data[b * n + a] -= w;
        }
        Laplacian { n, data }
    }

    pub fn unweighted(n: usize, edges: &[Edge]) -> Self {
        Self::from_weighted(n, edges.iter().map(|e| (*e, 1.0)))
    }

    pub fn of_sparsifier(n: usize, edges: &[WeightedEdge]) -> Self {
        Self::from_weighted(n, edges.iter().map(|w| (w.edge, w.weight as f64)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Laplacian {
            n: self.n,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// `x^T L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let y: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            total += x[i] * y;
        }
        total
    }

    pub fn is_valid(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            let s: f64 = (0..n).map(|j| self.entry(i, j)).sum();
            s.abs() < 1e-9 && (0..n).all(|j| self.entry(i, j) == self.entry(j, i))
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadReport {
    pub pass: bool,
    pub trials: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Samples `trials` vectors (alternating random signs and standard normals,
/// skipping constant vectors) and checks
/// `(1-eps) x'L_H x <= x'L_G x <= (1+eps) x'L_H x`.
pub fn quadratic_form_check<R: Rng + ?Sized>(
    lg: &Laplacian,
    lh: &Laplacian,
    eps: f64,
    trials: usize,
    rng: &mut R,
) -> QuadReport {
    let n = lg.n();
    let mut report = QuadReport {
        pass: true,
        trials: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
    };
    if n < 2 {
        return report;
    }
    let mut drawn = 0;
    while report.trials < trials && drawn < trials * 20 {
        drawn += 1;
        let x: Vec<f64> = if drawn % 2 == 0 {
            (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect()
        } else {
            (0..n).map(|_| rng.sample(StandardNormal)).collect()
        };
        if x.iter().all(|&v| v == x[0]) {
            continue;
        }
        report.trials += 1;
        let qg = lg.quadratic_form(&x);
        let qh = lh.quadratic_form(&x);
        if qh > 0.0 {
            report.min_ratio = report.min_ratio.min(qg / qh);
            report.max_ratio = report.max_ratio.max(qg / qh);
        }
        let tol = 1e-9 * (qg.abs() + qh.abs());
        if !((1.0 - eps) * qh <= qg + tol && qg <= (1.0 + eps) * qh + tol) {
            report.pass = false;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edges(list: &[(u32, u32)]) -> Vec<Edge> {
        list.iter().map(|&(a, b)| Edge::of(a, b)).collect()
    }

    fn complete(n: u32) -> Vec<Edge> {
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| Edge::of(a, b)))
            .collect()
    }

    fn unit(list: &[Edge]) -> Vec<WeightedEdge> {
        list.iter().map(|&e| WeightedEdge { edge: e, weight: 1 }).collect()
    }

    #[test]
    fn distances() {
        let path = Graph::from_edges(3, edges(&[(0, 1), (1, 2)])).unwrap();
        assert_eq!(all_pairs_dist(&path)[0][2], 2);
        let pair = Graph::new(2);
        assert_eq!(all_pairs_dist(&pair)[0][1], 2);
        let k = Graph::from_edges(5, complete(5)).unwrap();
        let d = all_pairs_dist(&k);
        for (i, row) in d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, u32::from(i != j));
            }
        }
    }

    #[test]
    fn directed_distances_cap() {
        assert_eq!(
            directed_bounded_dist(4, &[(0, 1), (1, 2), (2, 3)], 0, 2),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn stretch_checks() {
        let g = Graph::from_edges(4, complete(4)).unwrap();
        assert!(check_stretch(&g, &g.sorted_edges(), 1).is_ok());
        let star = edges(&[(0, 1), (0, 2), (0, 3)]);
        assert!(check_stretch(&g, &star, 2).is_ok());
        let err = check_stretch(&g, &star, 1).unwrap_err();
        assert_eq!(err.dist, Some(2));
        let path = Graph::from_edges(4, edges(&[(0, 1), (1, 2), (2, 3)])).unwrap();
        let cut = edges(&[(0, 1), (2, 3)]);
        let err = check_stretch(&path, &cut, 100).unwrap_err();
        assert_eq!(err.edge, Edge::of(1, 2));
        assert_eq!(err.dist, None);
    }

    #[test]
    fn cluster_brute_force() {
        let one = Graph::new(1);
        let o = ExpOffsets::from_values(vec![0.4]).unwrap();
        assert_eq!(brute_cluster(&one, &o), vec![0]);
        // Equal whole parts: nearest center wins, then the larger fraction.
        let path = Graph::from_edges(3, edges(&[(0, 1), (1, 2)])).unwrap();
        let o = ExpOffsets::from_values(vec![1.2, 0.1, 1.3]).unwrap();
        assert_eq!(brute_cluster(&path, &o), vec![0, 2, 2]);
    }

    #[test]
    fn cut_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = edges(&[(0, 1), (1, 2), (2, 0), (2, 3)]);
        assert!(check_cuts(4, &g, &unit(&g), 0.0, &mut rng).pass);
        let no_bridge = unit(&g[..3]);
        assert!(!check_cuts(4, &g, &no_bridge, 0.9, &mut rng).pass);
        let single = edges(&[(0, 1)]);
        let doubled = vec![WeightedEdge {
            edge: Edge::of(0, 1),
            weight: 2,
        }];
        // w_G = 1, w_H = 2: the lower inequality needs eps >= 1/2.
        assert!(!check_cuts(2, &single, &doubled, 0.4, &mut rng).pass);
        assert!(check_cuts(2, &single, &doubled, 0.5, &mut rng).pass);
        assert!(check_cuts(2, &single, &doubled, 1.0, &mut rng).pass);
    }

    #[test]
    fn cut_count_is_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = complete(6);
        let r = check_cuts(6, &g, &unit(&g), 0.0, &mut rng);
        assert_eq!(r.cuts_checked, (1 << 5) - 1);
    }

    #[test]
    fn quadratic_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = complete(6);
        let lg = Laplacian::unweighted(6, &g);
        assert!(lg.is_valid());
        assert!(quadratic_form_check(&lg, &lg, 0.0, 50, &mut rng).pass);
        assert!(!quadratic_form_check(&lg, &lg.scaled(2.0), 0.3, 50, &mut rng).pass);
        assert!(lg.quadratic_form(&[1.0; 6]).abs() < 1e-12);
    }

    #[test]
    fn indicator_form_equals_cut() {
        let g = edges(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let lg = Laplacian::unweighted(4, &g);
        for mask in 1u32..8 {
            let side: Vec<bool> = (0..4).map(|v| mask >> v & 1 == 1).collect();
            let x: Vec<f64> = side.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect();
            let gw: Vec<(Edge, f64)> = g.iter().map(|e| (*e, 1.0)).collect();
            assert_eq!(lg.quadratic_form(&x), cut_value(&side, &gw));
        }
    }
}
