//! Random test games: signed LTFs for the Chow side, monotone η-restricted
//! games for the Shapley side, each with a random set of revealed positions.

use rand::seq::index::sample;
use rand::Rng;

use crate::ltf::WeightedLtf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// At most three relevant coordinates.
    Junta,
    /// Weights of comparable size.
    Regular,
    /// One or two heavy coordinates over a regular tail.
    Mixed,
}

impl Shape {
    pub fn cycle(i: usize) -> Self {
        [Shape::Junta, Shape::Regular, Shape::Mixed][i % 3]
    }
}

#[derive(Clone, Debug)]
pub struct SuiteGame {
    pub ltf: WeightedLtf<f64>,
    pub shape: Shape,
    /// Revealed positions (0 = degree-0 coefficient, Chow side only).
    pub positions: Vec<usize>,
}

fn signed<R: Rng + ?Sized>(rng: &mut R, magnitude: f64, monotone: bool) -> f64 {
    if monotone || rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// Weights of the given shape; signed unless `monotone`.
pub fn random_weights<R: Rng + ?Sized>(n: usize, shape: Shape, monotone: bool, rng: &mut R) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match shape {
        Shape::Junta => {
            let k = rng.random_range(1..=n.min(3));
            for i in sample(rng, n, k) {
                let m = rng.random_range(1..=5) as f64;
                w[i] = signed(rng, m, monotone);
            }
        }
        Shape::Regular => {
            for x in w.iter_mut() {
                let m = rng.random_range(0.8..1.25);
                *x = signed(rng, m, monotone);
            }
        }
        Shape::Mixed => {
            for x in w.iter_mut() {
                let m = rng.random_range(0.5..1.0);
                *x = signed(rng, m, monotone);
            }
            let heavy = rng.random_range(1..=2.min(n));
            let scale = (n as f64).sqrt() * 0.75;
            for i in sample(rng, n, heavy) {
                let m = rng.random_range(0.6..1.4) * scale;
                w[i] = signed(rng, m, monotone);
            }
        }
    }
    w
}

/// `k` of the positions `lo..=hi` with `k` covering a uniform fraction in
/// `[0.3, 1]`, sorted.
pub fn random_positions<R: Rng + ?Sized>(lo: usize, hi: usize, rng: &mut R) -> Vec<usize> {
    let total = hi + 1 - lo;
    let frac = rng.random_range(0.3..=1.0);
    let k = ((frac * total as f64).ceil() as usize).clamp(1, total);
    let mut v: Vec<usize> = sample(rng, total, k).into_iter().map(|j| j + lo).collect();
    v.sort_unstable();
    v
}

/// Signed LTFs with `n` in `4..=max_n` and `|θ| ≤ ‖w‖₁/2`; positions drawn
/// from `0..=n`.
pub fn chow_suite<R: Rng + ?Sized>(count: usize, max_n: usize, rng: &mut R) -> Vec<SuiteGame> {
    (0..count)
        .map(|i| {
            let n = rng.random_range(4..=max_n);
            let shape = Shape::cycle(i);
            let w = random_weights(n, shape, false, rng);
            let l1: f64 = w.iter().map(|x| x.abs()).sum();
            let theta = rng.random_range(-0.5..=0.5) * l1;
            SuiteGame {
                ltf: WeightedLtf::new(w, theta).expect("finite"),
                shape,
                positions: random_positions(0, n, rng),
            }
        })
        .collect()
}

/// Monotone η-restricted games (`|θ| ≤ (1-η)‖w‖₁`) with `n` in `4..=max_n`;
/// positions drawn from `1..=n`.
pub fn shapley_suite<R: Rng + ?Sized>(count: usize, max_n: usize, eta: f64, rng: &mut R) -> Vec<SuiteGame> {
    (0..count)
        .map(|i| {
            let n = rng.random_range(4..=max_n);
            let shape = Shape::cycle(i);
            let w = random_weights(n, shape, true, rng);
            let l1: f64 = w.iter().sum();
            let theta = rng.random_range(-1.0..=1.0) * (1.0 - eta) * l1;
            SuiteGame {
                ltf: WeightedLtf::monotone(w, theta).expect("nonnegative"),
                shape,
                positions: random_positions(1, n, rng),
            }
        })
        .collect()
}

/// Monotone LTF with integer weights in `0..=max_weight` and a threshold
/// anywhere in `[-‖w‖₁ - 1, ‖w‖₁ + 1]` (constants included).
pub fn random_monotone<R: Rng + ?Sized>(n: usize, max_weight: u32, rng: &mut R) -> WeightedLtf<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0..=max_weight) as f64).collect();
    let l1: f64 = w.iter().sum();
    let theta = rng.random_range(-l1 - 1.0..=l1 + 1.0);
    WeightedLtf::monotone(w, theta).expect("nonnegative")
}

/// Signed LTF with real weights in `[-1, 1]`.
pub fn random_signed<R: Rng + ?Sized>(n: usize, rng: &mut R) -> WeightedLtf<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let l1: f64 = w.iter().map(|x| x.abs()).sum();
    let theta = rng.random_range(-l1..=l1);
    WeightedLtf::new(w, theta).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn suites_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in chow_suite(30, 12, &mut rng) {
            let n = g.ltf.n();
            assert!((4..=12).contains(&n));
            assert!(g.positions.len() * 10 >= 3 * (n + 1));
            assert!(g.positions.iter().all(|&p| p <= n));
        }
        for g in shapley_suite(30, 10, 0.5, &mut rng) {
            assert!(g.ltf.is_monotone());
            assert!(g.ltf.is_eta_restricted(0.5).unwrap());
            assert!(g.positions.iter().all(|&p| p >= 1 && p <= g.ltf.n()));
        }
    }
}
