//! Contraction factors `x_0, ..., x_{L-1}` whose product is `log2 n`.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub factors: Vec<f64>,
}

impl Schedule {
    pub fn empty() -> Self {
        Schedule {
            factors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn product(&self) -> f64 {
        self.factors.iter().product()
    }
}

/// Schedule for an `n`-vertex graph.
pub fn build_schedule(n: usize) -> Schedule {
    schedule_for_log(n.max(1) as f64).0
}

/// Schedule for a graph with `2^log_n` vertices, plus the layer cap
/// `ceil(3 log log log n) + 1`.
pub fn schedule_for_log(n: f64) -> (Schedule, usize) {
    let lg = n.log2();
    let cap = layer_cap(lg);
    if lg < 4.0 {
        return (Schedule::empty(), cap);
    }
    if lg <= 100.0 {
        return (
            Schedule {
                factors: vec![lg.clamp(2.0, 100.0)],
            },
            cap,
        );
    }
    let mut factors: Vec<f64> = Vec::new();
    let mut product = 1.0;
    let mut i = 0i32;
    while product < lg {
        let x = if i == 0 {
            100.0
        } else {
            100f64.powf(1.5f64.powi(i) - 1.5f64.powi(i - 1))
        };
        if product * x >= lg {
            let last = lg / product;
            if last < 2.0 {
                if let Some(prev) = factors.last_mut() {
                    *prev *= last;
                } else {
                    factors.push(lg);
                }
            } else {
                factors.push(last);
            }
            product = lg;
        } else {
            factors.push(x);
            product *= x;
        }
        i += 1;
    }
    (Schedule { factors }, cap)
}

fn layer_cap(lg: f64) -> usize {
    let lll = lg.max(2.0).log2().max(2.0).log2();
    (3.0 * lll).ceil().max(0.0) as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_graphs_have_no_layers() {
        assert!(build_schedule(2).is_empty());
        assert!(build_schedule(15).is_empty());
    }

    #[test]
    fn moderate_graphs_have_one_layer() {
        let s = build_schedule(1 << 10);
        assert_eq!(s.factors, vec![10.0]);
        let s = build_schedule(1_000_000);
        assert_eq!(s.len(), 1);
        let lg = 1e6f64.log2();
        assert!((s.product() / lg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn huge_graphs_follow_the_growth_rule() {
        // log2 n = 1000: 100 * 100^{0.5} = 1000 exactly.
        let (s, cap) = schedule_for_log(2f64.powi(1000));
        assert_eq!(s.len(), 2);
        assert!((s.factors[0] - 100.0).abs() < 1e-9);
        assert!((s.factors[1] - 10.0).abs() < 1e-6);
        assert!(s.len() <= cap);
        for p in [150, 400, 1023] {
            let (s, cap) = schedule_for_log(2f64.powi(p));
            assert!(s.factors.iter().all(|&x| x >= 2.0), "{s:?}");
            assert!((s.product() / p as f64 - 1.0).abs() < 1e-9);
            assert!(s.len() <= cap);
        }
    }
}
