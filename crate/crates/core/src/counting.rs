//! Pseudo-polynomial counting for monotone LTFs with integer weights.
//!
//! `c[k][s]` is the number of coalitions of size `k` and total weight `s`.
//! Removing one player is a deconvolution of the same table, so every
//! per-player quantity costs `O(n · Σw)` after one `O(n² · Σw)` build.

use crate::cube::SliceProfile;
use crate::error::{Error, Result};
use crate::ltf::WeightedLtf;
use crate::real::Real;

/// Largest total weight accepted by the counting routines.
pub const MAX_TOTAL_WEIGHT: u64 = 1 << 20;

/// Largest `n` whose signed slice sums fit in `i128`.
pub const MAX_COUNTING_N: usize = 120;

pub(crate) struct IntegerGame {
    pub n: usize,
    pub weights: Vec<u64>,
    /// Coalition `P` wins iff `w(P) ≥ quota`.
    pub quota: i64,
    width: usize,
    all: Vec<u128>,
}

impl IntegerGame {
    pub fn new<T: Real>(f: &WeightedLtf<T>) -> Result<Self> {
        let n = f.n();
        if n > MAX_COUNTING_N {
            return Err(Error::CapExceeded { n, cap: MAX_COUNTING_N });
        }
        if !f.is_monotone() {
            return Err(Error::InvalidWeights(
                "counting table needs nonnegative weights".into(),
            ));
        }
        let mut weights = Vec::with_capacity(n);
        for (i, x) in f.weights().iter().enumerate() {
            let x = x.to_f64().unwrap();
            if x.fract() != 0.0 {
                return Err(Error::NotIntegral(format!("weight {} = {x}", i + 1)));
            }
            weights.push(x as u64);
        }
        let total: u64 = weights.iter().sum();
        if total > MAX_TOTAL_WEIGHT {
            return Err(Error::NotIntegral(format!(
                "total weight {total} exceeds {MAX_TOTAL_WEIGHT}"
            )));
        }
        // 2 w(P) - Σw - θ ≥ 0  ⟺  w(P) ≥ (θ + Σw)/2
        let quota = ((f.threshold().to_f64().unwrap() + total as f64) / 2.0).ceil() as i64;
        let width = total as usize + 1;
        let mut all = vec![0u128; (n + 1) * width];
        all[0] = 1;
        for (j, &wj) in weights.iter().enumerate() {
            let wj = wj as usize;
            for k in (0..=j).rev() {
                for s in (0..width - wj).rev() {
                    let c = all[k * width + s];
                    if c != 0 {
                        all[(k + 1) * width + s + wj] += c;
                    }
                }
            }
        }
        Ok(Self {
            n,
            weights,
            quota,
            width,
            all,
        })
    }

    /// Counts over coalitions that exclude player `i`, laid out `[k][s]`
    /// for `k < n`.
    pub fn without(&self, i: usize) -> Vec<u128> {
        let (n, width) = (self.n, self.width);
        let wi = self.weights[i] as usize;
        let mut out = vec![0u128; n * width];
        for k in 0..n {
            for s in 0..width {
                let mut c = self.all[k * width + s];
                if k > 0 && s >= wi {
                    c -= out[(k - 1) * width + s - wi];
                }
                out[k * width + s] = c;
            }
        }
        out
    }

    /// Number of entries in `row` with weight sum in `[lo, hi]`.
    fn range_sum(&self, row: &[u128], lo: i64, hi: i64) -> u128 {
        let lo = lo.max(0);
        let hi = hi.min(self.width as i64 - 1);
        if hi < lo {
            return 0;
        }
        row[lo as usize..=hi as usize].iter().sum()
    }

    /// Size-`k` coalitions without `i` for which `i` is pivotal.
    pub fn pivots(&self, without: &[u128], i: usize, k: usize) -> u128 {
        let row = &without[k * self.width..(k + 1) * self.width];
        let wi = self.weights[i] as i64;
        self.range_sum(row, self.quota - wi, self.quota - 1)
    }

    /// `Σ_{|P|=k} f(P)` as (#wins - #losses).
    fn slice_value(&self, k: usize) -> i128 {
        let row = &self.all[k * self.width..(k + 1) * self.width];
        let wins = self.range_sum(row, self.quota, self.width as i64) as i128;
        let total: u128 = row.iter().sum();
        2 * wins - total as i128
    }

    /// Slice sums identical to [`SliceProfile::of`], without enumeration.
    pub fn profile(&self) -> SliceProfile {
        let n = self.n;
        let value_sums: Vec<i128> = (0..=n).map(|k| self.slice_value(k)).collect();
        let mut coord_sums = vec![0i128; (n + 1) * n];
        for i in 0..n {
            let wo = self.without(i);
            let wi = self.weights[i] as i64;
            for k in 1..=n {
                // coalitions of size k containing i: P' ∪ {i} with |P'| = k-1
                let row = &wo[(k - 1) * self.width..k * self.width];
                let size: u128 = row.iter().sum();
                let wins = self.range_sum(row, self.quota - wi, self.width as i64) as i128;
                let with_i = 2 * wins - size as i128;
                coord_sums[k * n + i] = 2 * with_i - value_sums[k];
            }
            coord_sums[i] = -value_sums[0];
        }
        SliceProfile {
            n,
            value_sums,
            coord_sums,
        }
    }
}

/// Slice sums of a monotone integer-weight LTF by counting (n ≤ 120).
pub fn profile_by_counting<T: Real>(f: &WeightedLtf<T>) -> Result<SliceProfile> {
    Ok(IntegerGame::new(f)?.profile())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::DEFAULT_ENUMERATION_CAP;

    #[test]
    fn counting_profile_matches_enumeration() {
        for (w, theta) in [
            (vec![4.0, 4.0, 4.0, 2.0, 2.0, 1.0], 7.0),
            (vec![3.0, 0.0, 1.0, 1.0], -1.0),
            (vec![1.0, 1.0, 1.0], 0.0),
            (vec![2.0, 1.0], 10.0),
            (vec![2.0, 1.0], -10.0),
        ] {
            let f = WeightedLtf::<f64>::new(w, theta).unwrap();
            let a = SliceProfile::of(&f, DEFAULT_ENUMERATION_CAP).unwrap();
            let b = profile_by_counting(&f).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_fractional() {
        let f = WeightedLtf::<f64>::new(vec![0.5], 0.0).unwrap();
        assert!(matches!(profile_by_counting(&f), Err(Error::NotIntegral(_))));
    }
}
