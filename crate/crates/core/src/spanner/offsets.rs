//! Exponential start-time offsets.

use rand::Rng;

use crate::error::{Error, Result};

pub const MAX_SAMPLING_ROUNDS: usize = 200;

/// One draw from `Exp(beta)` by inversion, with `U` uniform in `(0, 1]`.
pub fn exp_sample<R: Rng + ?Sized>(rng: &mut R, beta: f64) -> f64 {
    let u = 1.0 - rng.gen::<f64>();
    -u.ln() / beta
}

/// Per-vertex offsets `delta_u = d_u + f_u` and the priority permutation
/// (rank of `f_u`, ascending, in `1..=n`).
#[derive(Clone, Debug, PartialEq)]
pub struct ExpOffsets {
    beta: f64,
    delta: Vec<f64>,
    priority: Vec<u32>,
    rounds: usize,
}

impl ExpOffsets {
    /// Offsets for the decremental spanner: `beta = ln(10n)/k`, conditioned
    /// on `max delta < k`.
    pub fn for_spanner<R: Rng + ?Sized>(n: usize, k: u32, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let beta = (10.0 * n.max(1) as f64).ln() / k as f64;
        Self::sample(n, beta, k as f64, rng)
    }

    /// Draws i.i.d. `Exp(beta)` offsets, redrawing the whole vector while the
    /// maximum reaches `bound` or two fractional parts coincide.
    pub fn sample<R: Rng + ?Sized>(n: usize, beta: f64, bound: f64, rng: &mut R) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta}")));
        }
        for round in 1..=MAX_SAMPLING_ROUNDS {
            let delta: Vec<f64> = (0..n).map(|_| exp_sample(rng, beta)).collect();
            if delta.iter().any(|&x| x >= bound) {
                continue;
            }
            if let Some(priority) = rank_fractions(&delta) {
                return Ok(ExpOffsets {
                    beta,
                    delta,
                    priority,
                    rounds: round,
                });
            }
        }
        Err(Error::SamplingExhausted(MAX_SAMPLING_ROUNDS))
    }

    /// Builds offsets from explicit values. Fractional parts must be
    /// distinct.
    pub fn from_values(delta: Vec<f64>) -> Result<Self> {
        if delta.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidParameter("offsets must be finite and >= 0".into()));
        }
        let priority = rank_fractions(&delta).ok_or(Error::KeyCollision)?;
        Ok(ExpOffsets {
            beta: f64::NAN,
            delta,
            priority,
            rounds: 1,
        })
    }

    pub fn n(&self) -> usize {
        self.delta.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self, v: u32) -> f64 {
        self.delta[v as usize]
    }

    pub fn deltas(&self) -> &[f64] {
        &self.delta
    }

    /// Integer part `d_v`.
    pub fn whole(&self, v: u32) -> u32 {
        self.delta[v as usize].floor() as u32
    }

    /// Fractional part `f_v`.
    pub fn frac(&self, v: u32) -> f64 {
        let x = self.delta[v as usize];
        x - x.floor()
    }

    pub fn priority(&self, v: u32) -> u32 {
        self.priority[v as usize]
    }

    pub fn max_whole(&self) -> u32 {
        (0..self.n() as u32).map(|v| self.whole(v)).max().unwrap_or(0)
    }

    pub fn max_delta(&self) -> f64 {
        self.delta.iter().copied().fold(0.0, f64::max)
    }

    /// Number of full draws the retry loop needed.
    pub fn rounds(&self) -> usize {
        self.rounds
    }
}

fn rank_fractions(delta: &[f64]) -> Option<Vec<u32>> {
    let frac: Vec<f64> = delta.iter().map(|x| x - x.floor()).collect();
    let mut order: Vec<usize> = (0..delta.len()).collect();
    order.sort_by(|&a, &b| frac[a].total_cmp(&frac[b]));
    if order.windows(2).any(|w| frac[w[0]] == frac[w[1]]) {
        return None;
    }
    let mut priority = vec![0; delta.len()];
    for (rank, &v) in order.iter().enumerate() {
        priority[v] = rank as u32 + 1;
    }
    Some(priority)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conditioned_below_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..6 {
            let o = ExpOffsets::for_spanner(200, k, &mut rng).unwrap();
            assert!(o.max_delta() < k as f64);
            assert!(o.max_whole() < k);
        }
    }

    #[test]
    fn same_seed_same_offsets() {
        let a = ExpOffsets::for_spanner(50, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = ExpOffsets::for_spanner(50, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn priority_is_rank_of_fraction() {
        let o = ExpOffsets::from_values(vec![0.5, 1.25, 2.75, 0.0]).unwrap();
        assert_eq!(
            (0..4).map(|v| o.priority(v)).collect::<Vec<_>>(),
            vec![3, 2, 4, 1]
        );
        assert_eq!(o.whole(2), 2);
        assert!(ExpOffsets::from_values(vec![0.5, 1.5]).is_err());
    }

    #[test]
    fn acceptance_rate_near_nine_tenths() {
        let (n, k, trials) = (100usize, 3u32, 10_000);
        let beta = (10.0 * n as f64).ln() / k as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let accepted = (0..trials)
            .filter(|_| (0..n).all(|_| exp_sample(&mut rng, beta) < k as f64))
            .count();
        let rate = accepted as f64 / trials as f64;
        assert!((rate - 0.9).abs() <= 0.05, "rate {rate}");
    }
}
