//! Power indices: Chow parameters, generalized Shapley indices and their
//! p-biased and Gaussian relatives, exact and sampled, plus distances.
//!
//! Positions follow the usual convention: position 0 is the degree-0
//! coefficient and position `i ≥ 1` is coordinate `i`. In memory,
//! `values[i - 1]` holds position `i`.
//!
//! Shapley indices use the ±1 normalization, so they range over `[0, 2]`;
//! the classical Shapley–Shubik value is half of it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{
    add_vecs, binomial, binomial_u128, check_cap, chunk_ranges, pm, BooleanFunction,
    SliceProfile, TruthTable,
};
use crate::counting::IntegerGame;
use crate::error::{invalid, Error, Result};
use crate::gaussian::BiasParams;
use crate::ltf::WeightedLtf;
use crate::real::{count, lit, Real};

/// Default dimension cap for the `2^n` Shapley pivot count.
pub const SHAPLEY_ENUMERATION_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    /// `f̂(i) = E[f(x) x_i]` under the uniform distribution.
    Chow,
    /// `f̂(i, p) = E_{u_p}[f(x) ψ_p(x_i)]`.
    ChowP,
    /// `f◇(i)`, expected marginal contribution in a random ordering.
    Shapley,
    /// `f*(i, p) = E_{u_p}[f(x) x_i]`.
    CorrP,
    /// `f̃(e_i) = E_{N(0,1)^n}[f(x) x_i]`.
    Hermite,
}

impl IndexKind {
    pub fn has_degree0(self) -> bool {
        !matches!(self, IndexKind::Shapley)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct IndexVector<T> {
    pub kind: IndexKind,
    pub values: Vec<T>,
    pub degree0: Option<T>,
    pub p: Option<T>,
}

impl<T: Real> IndexVector<T> {
    pub fn new(kind: IndexKind, values: Vec<T>) -> Self {
        Self {
            kind,
            values,
            degree0: None,
            p: None,
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Value at a position (0 = degree-0, `i ≥ 1` = coordinate i).
    pub fn get(&self, pos: usize) -> Option<T> {
        if pos == 0 {
            self.degree0
        } else {
            self.values.get(pos - 1).copied()
        }
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// Keeps only the listed positions.
    pub fn restrict(&self, positions: &[usize]) -> Result<PartialIndexVector<T>> {
        let entries = positions
            .iter()
            .map(|&pos| {
                self.get(pos)
                    .map(|v| (pos, v))
                    .ok_or_else(|| invalid("positions", format!("position {pos} not available")))
            })
            .collect::<Result<Vec<_>>>()?;
        PartialIndexVector::new(self.kind, self.n(), entries)
    }
}

/// Index values known only on a subset of positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PartialIndexVector<T> {
    kind: IndexKind,
    n: usize,
    entries: Vec<(usize, T)>,
}

impl<T: Real> PartialIndexVector<T> {
    /// Entries are sorted by position; duplicates and out-of-range positions
    /// are rejected.
    pub fn new(kind: IndexKind, n: usize, mut entries: Vec<(usize, T)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(invalid("indices", format!("position {} repeated", w[0].0)));
            }
        }
        let lo = if kind.has_degree0() { 0 } else { 1 };
        if let Some((pos, _)) = entries.iter().find(|(pos, _)| *pos < lo || *pos > n) {
            return Err(invalid(
                "indices",
                format!("position {pos} outside {lo}..={n}"),
            ));
        }
        if let Some((pos, _)) = entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(invalid("values", format!("value at position {pos} not finite")));
        }
        Ok(Self { kind, n, entries })
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn positions(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, pos: usize) -> Option<T> {
        self.entries
            .binary_search_by_key(&pos, |e| e.0)
            .ok()
            .map(|j| self.entries[j].1)
    }

    /// Degree-one entries as (0-based coordinate, value).
    pub fn coordinates(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.entries
            .iter()
            .filter(|e| e.0 > 0)
            .map(|&(pos, v)| (pos - 1, v))
    }
}

// ---------------------------------------------------------------------------
// Chow parameters

/// Degree-0 and degree-1 Fourier coefficients by full enumeration.
///
/// Values are computed from integer counts, so they are exact multiples of
/// `2^{1-n}`.
pub fn chow_exact<T: Real, F: BooleanFunction>(f: &F, cap: usize) -> Result<IndexVector<T>> {
    let n = f.n();
    check_cap(n, cap)?;
    // counts[0] = #{f = +1}; counts[1 + i] = #{f = +1, x_i = +1}
    let counts = chunk_ranges(n)
        .into_par_iter()
        .fold(
            || vec![0i64; n + 1],
            |mut acc, (lo, hi)| {
                for mask in lo..hi {
                    if f.eval_mask(mask) {
                        acc[0] += 1;
                        let mut bits = mask;
                        while bits != 0 {
                            acc[1 + bits.trailing_zeros() as usize] += 1;
                            bits &= bits - 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0i64; n + 1], add_vecs);
    let total = 1i128 << n;
    let pos = counts[0] as i128;
    let scale: T = count(total);
    let values = counts[1..]
        .iter()
        .map(|&a| count::<T>(2 * (2 * a as i128 - pos)) / scale)
        .collect();
    Ok(IndexVector {
        kind: IndexKind::Chow,
        values,
        degree0: Some(count::<T>(2 * pos - total) / scale),
        p: None,
    })
}

/// Exact Chow parameters at selected positions (0 = degree-0).
pub fn chow_at_positions<F: BooleanFunction>(f: &F, positions: &[usize], cap: usize) -> Result<Vec<f64>> {
    let n = f.n();
    check_cap(n, cap)?;
    if let Some(&pos) = positions.iter().find(|&&p| p > n) {
        return Err(invalid("positions", format!("position {pos} outside 0..={n}")));
    }
    let len = positions.len();
    // acc[j] = Σ_x f(x) χ_j(x) with χ = 1 or x_i
    let acc = if len == 0 {
        Vec::new()
    } else {
        chunk_ranges(n)
            .into_par_iter()
            .fold(
                || vec![0i64; len],
                |mut acc, (lo, hi)| {
                    for mask in lo..hi {
                        let v = pm(f.eval_mask(mask));
                        for (a, &pos) in acc.iter_mut().zip(positions) {
                            if pos == 0 || mask >> (pos - 1) & 1 == 1 {
                                *a += v;
                            } else {
                                *a -= v;
                            }
                        }
                    }
                    acc
                },
            )
            .reduce(|| vec![0i64; len], add_vecs)
    };
    let scale = (1u64 << n) as f64;
    Ok(acc.iter().map(|&a| a as f64 / scale).collect())
}

fn check_bias<T: Real>(p: T) -> Result<BiasParams<T>> {
    BiasParams::new(p)
}

/// `f̂(i, p)` by weighted enumeration, each string weighted by
/// `p^{#(+1)} (1-p)^{#(-1)}`.
pub fn chow_pbiased_exact<T: Real, F: BooleanFunction>(
    f: &F,
    p: T,
    cap: usize,
) -> Result<IndexVector<T>> {
    let bias = check_bias(p)?;
    let n = f.n();
    check_cap(n, cap)?;
    let q = T::one() - p;
    let masses: Vec<T> = (0..=n)
        .map(|k| p.powi(k as i32) * q.powi((n - k) as i32))
        .collect();
    let psi_plus = bias.psi(T::one());
    let psi_minus = bias.psi(-T::one());
    // Block partial sums collected in order, then added sequentially.
    let blocks: Vec<Vec<T>> = chunk_ranges(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = vec![T::zero(); n + 1];
            for mask in lo..hi {
                let mass = masses[mask.count_ones() as usize];
                let v = if f.eval_mask(mask) { mass } else { -mass };
                acc[0] = acc[0] + v;
                for i in 0..n {
                    let psi = if mask >> i & 1 == 1 { psi_plus } else { psi_minus };
                    acc[1 + i] = acc[1 + i] + v * psi;
                }
            }
            acc
        })
        .collect();
    let mut acc = vec![T::zero(); n + 1];
    for b in blocks {
        for (a, x) in acc.iter_mut().zip(b) {
            *a = *a + x;
        }
    }
    Ok(IndexVector {
        kind: IndexKind::ChowP,
        values: acc[1..].to_vec(),
        degree0: Some(acc[0]),
        p: Some(p),
    })
}

/// `f*(i, p) = E_{u_p}[f(x) x_i]`, from slice sums.
pub fn coordinate_correlation_pbiased<T: Real, F: BooleanFunction>(
    f: &F,
    p: T,
    cap: usize,
) -> Result<IndexVector<T>> {
    check_bias(p)?;
    let profile = SliceProfile::of(f, cap)?;
    Ok(correlation_from_profile(&profile, p))
}

pub fn correlation_from_profile<T: Real>(profile: &SliceProfile, p: T) -> IndexVector<T> {
    IndexVector {
        kind: IndexKind::CorrP,
        values: profile.correlations_pbiased(p),
        degree0: Some(profile.mean_pbiased(p)),
        p: Some(p),
    }
}

// ---------------------------------------------------------------------------
// Shapley indices

/// Exact generalized Shapley indices by counting, for every `i` and every
/// predecessor-set size `k`, the net change `f(P ∪ {i}) - f(P)`.
///
/// A predecessor set of size k occurs with probability `1/(n·C(n-1,k))`.
pub fn shapley_exact<T: Real, F: BooleanFunction>(f: &F, cap: usize) -> Result<IndexVector<T>> {
    let n = f.n();
    check_cap(n, cap)?;
    let table = TruthTable::of(f, cap)?;
    let bits = table.bits();
    // piv[i * n + k]: Σ over |P| = k, i ∉ P of (f(P+i) - f(P)) / 2
    let piv = chunk_ranges(n)
        .into_par_iter()
        .fold(
            || vec![0i64; n * n],
            |mut acc, (lo, hi)| {
                for mask in lo..hi {
                    let k = mask.count_ones() as usize;
                    let here = bits[mask as usize];
                    for i in 0..n {
                        if mask >> i & 1 == 0 {
                            let up = bits[(mask | 1 << i) as usize];
                            if up != here {
                                acc[i * n + k] += if up { 1 } else { -1 };
                            }
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0i64; n * n], add_vecs);
    Ok(shapley_from_pivots(n, |i, k| piv[i * n + k] as f64))
}

fn shapley_from_pivots<T: Real>(n: usize, piv: impl Fn(usize, usize) -> f64) -> IndexVector<T> {
    let values = (0..n)
        .map(|i| {
            let s: f64 = (0..n)
                .map(|k| 2.0 * piv(i, k) / (n as f64 * binomial(n - 1, k)))
                .sum();
            lit(s)
        })
        .collect();
    IndexVector::new(IndexKind::Shapley, values)
}

/// Exact Shapley indices for monotone LTFs with integer weights, by a
/// (coalition size × weight sum) counting table. Works up to n = 120.
pub fn shapley_dp<T: Real>(f: &WeightedLtf<T>) -> Result<IndexVector<T>> {
    let game = IntegerGame::new(f)?;
    let n = game.n;
    let piv: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let without = game.without(i);
            (0..n)
                .map(|k| {
                    let c = game.pivots(&without, i, k);
                    debug_assert!(c <= binomial_u128(n - 1, k));
                    c as f64
                })
                .collect()
        })
        .collect();
    Ok(shapley_from_pivots(n, |i, k| piv[i][k]))
}

/// Number of random orderings used by [`shapley_estimate`]:
/// `m = ceil(2 n ln(2n/δ) / γ²)`.
///
/// Each coordinate average of m values in `[0, 2]` is within `γ/√n` of its
/// mean except with probability `δ/n` (Hoeffding), so the ℓ₂ error is at most
/// γ with probability `1 - δ`. Each ordering costs `n + 1` oracle calls.
pub fn shapley_sample_count(n: usize, gamma: f64, delta_fail: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", "must lie in (0, 1)"));
    }
    if !(delta_fail > 0.0 && delta_fail < 1.0) {
        return Err(invalid("delta_fail", "must lie in (0, 1)"));
    }
    let n = n as f64;
    Ok((2.0 * n * (2.0 * n / delta_fail).ln() / (gamma * gamma)).ceil() as usize)
}

const SAMPLE_BLOCK: usize = 256;

/// Splits `total` samples into fixed blocks, each with its own seed drawn
/// from `rng`, so results do not depend on the thread count.
fn sample_blocks<R: RngCore + ?Sized>(total: usize, rng: &mut R) -> Vec<(u64, usize)> {
    (0..total.div_ceil(SAMPLE_BLOCK))
        .map(|b| {
            let len = SAMPLE_BLOCK.min(total - b * SAMPLE_BLOCK);
            (rng.next_u64(), len)
        })
        .collect()
}

/// Permutation-sampling estimate of the Shapley indices.
///
/// Each sampled ordering is walked once, adding players one at a time, and
/// every step contributes an observation for the player just added.
pub fn shapley_estimate<T: Real, F: BooleanFunction, R: RngCore + ?Sized>(
    f: &F,
    gamma: f64,
    delta_fail: f64,
    rng: &mut R,
) -> Result<(IndexVector<T>, usize)> {
    let n = f.n();
    if n > 64 {
        return Err(Error::CapExceeded { n, cap: 64 });
    }
    let m = shapley_sample_count(n, gamma, delta_fail)?;
    let sums = sample_blocks(m, rng)
        .into_par_iter()
        .map(|(seed, len)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = vec![0i64; n];
            let mut order: Vec<usize> = (0..n).collect();
            for _ in 0..len {
                shuffle(&mut order, &mut rng);
                let mut mask = 0u64;
                let mut prev = pm(f.eval_mask(mask));
                for &i in &order {
                    mask |= 1 << i;
                    let cur = pm(f.eval_mask(mask));
                    acc[i] += cur - prev;
                    prev = cur;
                }
            }
            acc
        })
        .reduce(|| vec![0i64; n], add_vecs);
    let values = sums
        .iter()
        .map(|&s| lit::<T>(s as f64 / m as f64))
        .collect();
    Ok((IndexVector::new(IndexKind::Shapley, values), m))
}

fn shuffle(v: &mut [usize], rng: &mut impl Rng) {
    for i in (1..v.len()).rev() {
        v.swap(i, rng.random_range(0..=i));
    }
}

/// Samples used by [`chow_estimate`] for `|S|` positions:
/// `N = ceil(2 ln(2|S|/δ) / Δ²)` with `Δ = ε/√|S|`.
pub fn chow_sample_count(set_size: usize, eps: f64, delta: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", "must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "must lie in (0, 1)"));
    }
    if set_size == 0 {
        return Ok(0);
    }
    let s = set_size as f64;
    let tol = eps / s.sqrt();
    Ok((2.0 * (2.0 * s / delta).ln() / (tol * tol)).ceil() as usize)
}

/// Uniform-sample estimates of the Chow parameters at the given positions.
/// Each estimate is within `ε/√|S|` with probability `1 - δ/|S|`.
pub fn chow_estimate<T: Real, F: BooleanFunction, R: RngCore + ?Sized>(
    f: &F,
    positions: &[usize],
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<(PartialIndexVector<T>, usize)> {
    let n = f.n();
    if n > 64 {
        return Err(Error::CapExceeded { n, cap: 64 });
    }
    let samples = chow_sample_count(positions.len(), eps, delta)?;
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let full = crate::cube::full_mask(n);
    let sums = sample_blocks(samples, rng)
        .into_par_iter()
        .map(|(seed, len)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = vec![0i64; sorted.len()];
            for _ in 0..len {
                let mask = rng.next_u64() & full;
                let v = pm(f.eval_mask(mask));
                for (a, &pos) in acc.iter_mut().zip(&sorted) {
                    let x = if pos == 0 { 1 } else { pm(mask >> (pos - 1) & 1 == 1) };
                    *a += v * x;
                }
            }
            acc
        })
        .reduce(|| vec![0i64; sorted.len()], add_vecs);
    let entries = sorted
        .iter()
        .zip(&sums)
        .map(|(&pos, &s)| (pos, lit::<T>(s as f64 / samples.max(1) as f64)))
        .collect();
    Ok((PartialIndexVector::new(IndexKind::Chow, n, entries)?, samples))
}

/// Monte Carlo estimate of `E_{x~N(0,1)^n}[f(x) x_i]` and `E[f]` for an LTF
/// with unit-norm weights.
pub fn hermite_degree1_estimate<T: Real, R: RngCore + ?Sized>(
    f: &WeightedLtf<T>,
    samples: usize,
    rng: &mut R,
) -> Result<IndexVector<T>> {
    let norm = f.l2().to_f64().unwrap();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!("‖w‖₂ = {norm}, expected 1")));
    }
    if samples == 0 {
        return Err(invalid("samples", "must be positive"));
    }
    let n = f.n();
    let w: Vec<f64> = f.weights().iter().map(|x| x.to_f64().unwrap()).collect();
    let theta = f.threshold().to_f64().unwrap();
    let blocks: Vec<Vec<f64>> = sample_blocks(samples, rng)
        .into_par_iter()
        .map(|(seed, len)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = vec![0.0f64; n + 1];
            let mut x = vec![0.0f64; n];
            for _ in 0..len {
                for xi in x.iter_mut() {
                    *xi = rng.sample(StandardNormal);
                }
                let dot: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
                let v = if dot - theta >= 0.0 { 1.0 } else { -1.0 };
                acc[0] += v;
                for i in 0..n {
                    acc[1 + i] += v * x[i];
                }
            }
            acc
        })
        .collect();
    let mut acc = vec![0.0f64; n + 1];
    for b in blocks {
        for (a, x) in acc.iter_mut().zip(b) {
            *a += x;
        }
    }
    let m = samples as f64;
    Ok(IndexVector {
        kind: IndexKind::Hermite,
        values: acc[1..].iter().map(|s| lit(s / m)).collect(),
        degree0: Some(lit(acc[0] / m)),
        p: None,
    })
}

// ---------------------------------------------------------------------------
// Distances

/// `Pr_x[f(x) ≠ g(x)]` under the uniform distribution.
pub fn d_hamming<F: BooleanFunction, G: BooleanFunction>(f: &F, g: &G, cap: usize) -> Result<f64> {
    let n = f.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.n(),
        });
    }
    check_cap(n, cap)?;
    let diff: u64 = chunk_ranges(n)
        .into_par_iter()
        .map(|(lo, hi)| (lo..hi).filter(|&m| f.eval_mask(m) != g.eval_mask(m)).count() as u64)
        .sum();
    Ok(diff as f64 / (1u64 << n) as f64)
}

fn check_pair<T: Real>(a: &IndexVector<T>, b: &IndexVector<T>) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    if a.kind != b.kind {
        return Err(invalid("kind", format!("{:?} vs {:?}", a.kind, b.kind)));
    }
    Ok(())
}

fn l2_over<T: Real>(a: &IndexVector<T>, b: &IndexVector<T>, positions: &[usize]) -> Result<T> {
    check_pair(a, b)?;
    let mut acc = T::zero();
    for &pos in positions {
        let (x, y) = match (a.get(pos), b.get(pos)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(invalid("positions", format!("position {pos} not available"))),
        };
        acc = acc + (x - y) * (x - y);
    }
    Ok(acc.sqrt())
}

/// `(Σ_{i=1}^n (f̂(i) - ĝ(i))²)^{1/2}`.
pub fn d_chow<T: Real>(a: &IndexVector<T>, b: &IndexVector<T>) -> Result<T> {
    l2_over(a, b, &(1..=a.n()).collect::<Vec<_>>())
}

/// Chow distance restricted to positions in `S ⊆ {0, ..., n}`.
pub fn d_chow_partial<T: Real>(a: &IndexVector<T>, b: &IndexVector<T>, s: &[usize]) -> Result<T> {
    l2_over(a, b, s)
}

pub fn d_shapley<T: Real>(a: &IndexVector<T>, b: &IndexVector<T>) -> Result<T> {
    l2_over(a, b, &(1..=a.n()).collect::<Vec<_>>())
}

/// Shapley distance restricted to coordinates in `S ⊆ {1, ..., n}`.
pub fn d_shapley_partial<T: Real>(
    a: &IndexVector<T>,
    b: &IndexVector<T>,
    s: &[usize],
) -> Result<T> {
    if s.contains(&0) {
        return Err(invalid("positions", "Shapley indices start at 1"));
    }
    l2_over(a, b, s)
}

/// ℓ₂ distance between given partial values and a full vector, over the
/// partial vector's positions.
pub fn partial_distance<T: Real>(target: &PartialIndexVector<T>, g: &IndexVector<T>) -> Result<T> {
    if target.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: target.n(),
            got: g.n(),
        });
    }
    let mut acc = T::zero();
    for &(pos, v) in target.entries() {
        let y = g
            .get(pos)
            .ok_or_else(|| invalid("positions", format!("position {pos} not available")))?;
        acc = acc + (v - y) * (v - y);
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::DEFAULT_ENUMERATION_CAP as CAP;
    use crate::ltf::GameSpec;
    use rand::SeedableRng;

    type L = WeightedLtf<f64>;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn chow_of_majority_and_dictator() {
        let c = chow_exact::<f64, _>(&L::majority(3), CAP).unwrap();
        assert_eq!(c.degree0, Some(0.0));
        assert_eq!(c.values, vec![0.5; 3]);
        let d = chow_exact::<f64, _>(&L::dictator(4, 0), CAP).unwrap();
        assert_eq!(d.values, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(d.degree0, Some(0.0));
        let w = vec![1.0, 2.0, 3.0];
        let k = L::new(w, -7.0).unwrap();
        let c = chow_exact::<f64, _>(&k, CAP).unwrap();
        assert_eq!(c.degree0, Some(1.0));
        assert_eq!(c.values, vec![0.0; 3]);
    }

    #[test]
    fn pbiased_dictator() {
        for &p in &[0.2, 0.5, 0.75] {
            let sigma = 2.0 * (p * (1.0 - p) as f64).sqrt();
            let c = chow_pbiased_exact(&L::dictator(3, 0), p, CAP).unwrap();
            assert!(close(c.values[0], sigma, 1e-12));
            assert!(close(c.values[1], 0.0, 1e-12));
        }
        // E[x_1 · x_1] = 1; the centered part σ_p f̂(1,p) = σ_p² = 0.75
        let c = coordinate_correlation_pbiased(&L::dictator(3, 0), 0.75, CAP).unwrap();
        assert!(close(c.values[0], 1.0, 1e-12));
        let h: IndexVector<f64> = chow_pbiased_exact(&L::dictator(3, 0), 0.75, CAP).unwrap();
        assert!(close(h.values[0] * 3f64.sqrt() / 2.0, 0.75, 1e-12));
        let one = L::constant(3, true);
        let c = coordinate_correlation_pbiased(&one, 0.3, CAP).unwrap();
        for v in c.values {
            assert!(close(v, 2.0 * 0.3 - 1.0, 1e-12));
        }
        let c: IndexVector<f64> = chow_pbiased_exact(&one, 0.3, CAP).unwrap();
        assert!(c.values.iter().all(|v| v.abs() < 1e-12));
        assert!(chow_pbiased_exact(&one, 1.0, CAP).is_err());
    }

    #[test]
    fn shapley_examples() {
        let g = GameSpec::new(vec![49.0, 49.0, 2.0], 51.0).unwrap().to_ltf();
        let s = shapley_exact::<f64, _>(&g, CAP).unwrap();
        for v in &s.values {
            assert!(close(*v, 2.0 / 3.0, 1e-12));
        }
        let eu = GameSpec::new(vec![4.0, 4.0, 4.0, 2.0, 2.0, 1.0], 12.0)
            .unwrap()
            .to_ltf();
        let s = shapley_exact::<f64, _>(&eu, CAP).unwrap();
        assert_eq!(s.values[5], 0.0);
        let d = shapley_exact::<f64, _>(&L::dictator(5, 2), CAP).unwrap();
        assert_eq!(d.values, vec![0.0, 0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn shapley_dp_matches_enumeration() {
        let eu = GameSpec::new(vec![4.0, 4.0, 4.0, 2.0, 2.0, 1.0], 12.0)
            .unwrap()
            .to_ltf();
        let a = shapley_exact::<f64, _>(&eu, CAP).unwrap();
        let b = shapley_dp(&eu).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(close(*x, *y, 1e-12));
        }
        let f = L::new(vec![0.5, 1.0], 0.0).unwrap();
        assert!(matches!(shapley_dp(&f), Err(Error::NotIntegral(_))));
        let big = L::new(vec![1.0; 64], 0.0).unwrap();
        let s = shapley_dp(&big).unwrap();
        assert!(close(s.sum(), 2.0, 1e-9));
    }

    #[test]
    fn distances_majority_vs_dictator() {
        let f = L::majority(3);
        let g = L::dictator(3, 0);
        let h = d_hamming(&f, &g, CAP).unwrap();
        assert_eq!(h, 0.25);
        let cf = chow_exact::<f64, _>(&f, CAP).unwrap();
        let cg = chow_exact::<f64, _>(&g, CAP).unwrap();
        let d = d_chow(&cf, &cg).unwrap();
        assert!(close(d, 3f64.sqrt() / 2.0, 1e-15));
        assert!(d <= 2.0 * h.sqrt());
        assert_eq!(d_chow_partial(&cf, &cg, &[]).unwrap(), 0.0);
        assert_eq!(d_chow(&cf, &cf).unwrap(), 0.0);
        assert!(d_chow_partial(&cf, &cg, &[0, 1]).unwrap() <= d);
    }

    #[test]
    fn sample_counts() {
        // n = 8, γ = 0.1, δ = 0.05: 2·8·ln(320)/0.01
        let m = shapley_sample_count(8, 0.1, 0.05).unwrap();
        assert_eq!(m, (1600.0 * 320f64.ln()).ceil() as usize);
        assert_eq!(chow_sample_count(0, 0.1, 0.1).unwrap(), 0);
        assert_eq!(chow_sample_count(1, 2.0, 0.5).unwrap(), 1);
    }

    #[test]
    fn estimators_near_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (s, _) = shapley_estimate::<f64, _, _>(&L::dictator(4, 0), 0.1, 0.01, &mut rng).unwrap();
        assert_eq!(s.values, vec![2.0, 0.0, 0.0, 0.0]);
        let (s, _) = shapley_estimate::<f64, _, _>(&L::majority(3), 0.1, 0.01, &mut rng).unwrap();
        for v in s.values {
            assert!(close(v, 2.0 / 3.0, 0.1));
        }
        let (c, _) = chow_estimate::<f64, _, _>(&L::majority(3), &[1, 2, 3], 0.1, 0.01, &mut rng)
            .unwrap();
        for (_, v) in c.entries() {
            assert!(close(*v, 0.5, 0.1 / 3f64.sqrt()));
        }
        let (c, _) = chow_estimate::<f64, _, _>(&L::dictator(3, 0), &[1], 0.1, 0.01, &mut rng)
            .unwrap();
        assert_eq!(c.get(1), Some(1.0));
    }

    #[test]
    fn partial_vectors() {
        let v = IndexVector::new(IndexKind::Shapley, vec![1.0, 0.5, 0.5]);
        let p = v.restrict(&[3, 1]).unwrap();
        assert_eq!(p.positions(), vec![1, 3]);
        assert!(v.restrict(&[0]).is_err());
        assert!(PartialIndexVector::new(IndexKind::Chow, 3, vec![(1, 0.1), (1, 0.2)]).is_err());
        assert!(PartialIndexVector::new(IndexKind::Chow, 3, vec![(4, 0.1)]).is_err());
        assert!(PartialIndexVector::new(IndexKind::Chow, 3, vec![(0, 0.1)]).is_ok());
    }
}
