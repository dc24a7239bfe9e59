//! The Boolean hypercube {-1,1}^n, encoded as bit masks.
//!
//! Bit `i` of a mask is set iff coordinate `i` (0-based) is `+1`. A function
//! value of `true` stands for `+1`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::{count, Real};

/// Largest dimension for which full enumeration is attempted by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// A Boolean function on {-1,1}^n, queried through masks.
pub trait BooleanFunction: Sync {
    fn n(&self) -> usize;
    fn eval_mask(&self, mask: u64) -> bool;

    /// Value at the all-ones string, as ±1.
    fn top(&self) -> i64 {
        pm(self.eval_mask(full_mask(self.n())))
    }

    /// Value at the all-minus-ones string, as ±1.
    fn bottom(&self) -> i64 {
        pm(self.eval_mask(0))
    }
}

impl<F: BooleanFunction + ?Sized> BooleanFunction for &F {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn eval_mask(&self, mask: u64) -> bool {
        (**self).eval_mask(mask)
    }
}

#[inline]
pub(crate) fn pm(b: bool) -> i64 {
    if b {
        1
    } else {
        -1
    }
}

#[inline]
pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 40 {
        return Err(Error::CapExceeded { n, cap: cap.min(40) });
    }
    Ok(())
}

pub fn mask_to_pm1(mask: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn pm1_to_mask(x: &[i8]) -> Result<u64> {
    if x.len() > 64 {
        return Err(Error::DimensionMismatch {
            expected: 64,
            got: x.len(),
        });
    }
    let mut mask = 0u64;
    for (i, &v) in x.iter().enumerate() {
        match v {
            1 => mask |= 1 << i,
            -1 => {}
            other => return Err(Error::Format(format!("entry {i} is {other}, expected ±1"))),
        }
    }
    Ok(mask)
}

/// Splits {0..2^n} into fixed blocks so chunked reductions do not depend on
/// the thread count.
pub(crate) fn chunk_ranges(n: usize) -> Vec<(u64, u64)> {
    const BLOCK: u64 = 1 << 12;
    let total = 1u64 << n;
    (0..total.div_ceil(BLOCK))
        .map(|b| (b * BLOCK, ((b + 1) * BLOCK).min(total)))
        .collect()
}

pub(crate) fn add_vecs(mut a: Vec<i64>, b: Vec<i64>) -> Vec<i64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Explicit truth table, indexed by mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn from_fn(n: usize, cap: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        check_cap(n, cap)?;
        Ok(Self {
            n,
            bits: (0..1u64 << n).map(f).collect(),
        })
    }

    pub fn of<F: BooleanFunction>(f: &F, cap: usize) -> Result<Self> {
        Self::from_fn(f.n(), cap, |m| f.eval_mask(m))
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl BooleanFunction for TruthTable {
    fn n(&self) -> usize {
        self.n
    }
    fn eval_mask(&self, mask: u64) -> bool {
        self.bits[mask as usize]
    }
}

/// Integer slice sums of a Boolean function.
///
/// `value_sums[k] = Σ_{|x|=k} f(x)` and `coord_sums[k*n + i] = Σ_{|x|=k} f(x)·x_i`,
/// where `|x|` is the number of `+1` coordinates. Every exchangeable
/// expectation (uniform, p-biased, Shapley distribution) is a linear
/// functional of these sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceProfile {
    pub(crate) n: usize,
    pub(crate) value_sums: Vec<i128>,
    pub(crate) coord_sums: Vec<i128>,
}

impl SliceProfile {
    pub fn of<F: BooleanFunction>(f: &F, cap: usize) -> Result<Self> {
        let n = f.n();
        check_cap(n, cap)?;
        let width = (n + 1) * (n + 1);
        // acc[k*(n+1)] = Σ_{|x|=k} f,  acc[k*(n+1) + 1 + i] = Σ_{|x|=k, x_i=+1} f
        let acc = chunk_ranges(n)
            .into_par_iter()
            .fold(
                || vec![0i64; width],
                |mut acc, (lo, hi)| {
                    for mask in lo..hi {
                        let k = mask.count_ones() as usize;
                        let v = pm(f.eval_mask(mask));
                        let row = &mut acc[k * (n + 1)..(k + 1) * (n + 1)];
                        row[0] += v;
                        let mut bits = mask;
                        while bits != 0 {
                            let i = bits.trailing_zeros() as usize;
                            row[1 + i] += v;
                            bits &= bits - 1;
                        }
                    }
                    acc
                },
            )
            .reduce(|| vec![0i64; width], add_vecs);
        let value_sums: Vec<i128> = (0..=n).map(|k| acc[k * (n + 1)] as i128).collect();
        let positives: Vec<i128> = (0..=n)
            .flat_map(|k| acc[k * (n + 1) + 1..(k + 1) * (n + 1)].iter().map(|&v| v as i128))
            .collect();
        // Σ f x_i = Σ_{x_i=+1} f - Σ_{x_i=-1} f = 2 Σ_{x_i=+1} f - Σ f
        let coord_sums = positives
            .iter()
            .enumerate()
            .map(|(idx, &p)| 2 * p - value_sums[idx / n.max(1)])
            .collect();
        Ok(Self {
            n,
            value_sums,
            coord_sums,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value_sum(&self, k: usize) -> i128 {
        self.value_sums[k]
    }

    pub fn coord_sum(&self, i: usize, k: usize) -> i128 {
        self.coord_sums[k * self.n + i]
    }

    /// f(1^n) as ±1.
    pub fn top(&self) -> i128 {
        self.value_sums[self.n]
    }

    /// f((-1)^n) as ±1.
    pub fn bottom(&self) -> i128 {
        self.value_sums[0]
    }

    /// `p^k (1-p)^(n-k)` for k = 0..=n.
    fn point_masses<T: Real>(&self, p: T) -> Vec<T> {
        let q = T::one() - p;
        (0..=self.n)
            .map(|k| p.powi(k as i32) * q.powi((self.n - k) as i32))
            .collect()
    }

    /// E_{x ~ u_p^n}[f(x)].
    pub fn mean_pbiased<T: Real>(&self, p: T) -> T {
        let masses = self.point_masses(p);
        (0..=self.n)
            .map(|k| count::<T>(self.value_sums[k]) * masses[k])
            .sum()
    }

    /// E_{x ~ u_p^n}[f(x) x_i] for every i.
    pub fn correlations_pbiased<T: Real>(&self, p: T) -> Vec<T> {
        let masses = self.point_masses(p);
        (0..self.n)
            .map(|i| {
                (0..=self.n)
                    .map(|k| count::<T>(self.coord_sum(i, k)) * masses[k])
                    .sum()
            })
            .collect()
    }

    /// Expectation of f under an exchangeable distribution with per-string
    /// mass `slice_mass[k]` on each string of weight k.
    pub fn mean_exchangeable<T: Real>(&self, slice_mass: &[T]) -> T {
        (0..=self.n)
            .map(|k| count::<T>(self.value_sums[k]) * slice_mass[k])
            .sum()
    }

    /// E[f(x) x_i] under an exchangeable distribution with per-string mass
    /// `slice_mass[k]`.
    pub fn correlations_exchangeable<T: Real>(&self, slice_mass: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                (0..=self.n)
                    .map(|k| count::<T>(self.coord_sum(i, k)) * slice_mass[k])
                    .sum()
            })
            .collect()
    }
}

/// Binomial coefficient as `f64` (exact up to 2^53).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc.round()
}

/// Binomial coefficient as `u128`.
pub fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}
