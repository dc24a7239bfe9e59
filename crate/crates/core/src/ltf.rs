//! Weighted linear threshold functions `f(x) = sign(w·x - θ)` with `sign(0) = +1`.

use serde::{Deserialize, Serialize};

use crate::cube::{pm1_to_mask, BooleanFunction};
use crate::error::{invalid, Error, Result};
use crate::real::{lit, Real};

/// A linear threshold function over {-1,1}^n.
///
/// Weights may carry either sign so that arbitrary threshold juntas can be
/// represented; game-theoretic operations check [`WeightedLtf::is_monotone`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct WeightedLtf<T> {
    weights: Vec<T>,
    threshold: T,
}

impl<T: Real> WeightedLtf<T> {
    pub fn new(weights: Vec<T>, threshold: T) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("n must be at least 1".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("weight {i} is not finite")));
        }
        if !threshold.is_finite() {
            return Err(invalid("threshold", "not finite"));
        }
        Ok(Self { weights, threshold })
    }

    /// Like [`new`](Self::new) but rejects negative weights.
    pub fn monotone(weights: Vec<T>, threshold: T) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| *w < T::zero()) {
            return Err(Error::InvalidWeights(format!("weight {i} is negative")));
        }
        Self::new(weights, threshold)
    }

    pub fn majority(n: usize) -> Self {
        Self::new(vec![T::one(); n], T::zero()).expect("valid majority")
    }

    /// The dictator `x_i` on n variables.
    pub fn dictator(n: usize, i: usize) -> Self {
        let mut w = vec![T::zero(); n];
        w[i] = T::one();
        Self::new(w, T::zero()).expect("valid dictator")
    }

    /// Constant function on n variables.
    pub fn constant(n: usize, value: bool) -> Self {
        let theta = if value { T::zero() } else { T::one() };
        Self::new(vec![T::zero(); n], theta).expect("valid constant")
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn is_monotone(&self) -> bool {
        self.weights.iter().all(|w| *w >= T::zero())
    }

    pub fn l1(&self) -> T {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn l2(&self) -> T {
        self.weights.iter().map(|w| *w * *w).sum::<T>().sqrt()
    }

    /// `w·x - θ`, summed left to right.
    pub fn linear_form(&self, x: &[i8]) -> Result<T> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        let mut s = T::zero();
        for (w, &xi) in self.weights.iter().zip(x) {
            match xi {
                1 => s = s + *w,
                -1 => s = s - *w,
                other => return Err(Error::Format(format!("entry {other} is not ±1"))),
            }
        }
        Ok(s - self.threshold)
    }

    pub fn evaluate(&self, x: &[i8]) -> Result<i8> {
        Ok(if self.linear_form(x)? >= T::zero() { 1 } else { -1 })
    }

    /// `w·x` on the string encoded by `mask`, summed left to right.
    #[inline]
    pub fn dot_mask(&self, mask: u64) -> T {
        let mut s = T::zero();
        for (i, w) in self.weights.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s = s + *w;
            } else {
                s = s - *w;
            }
        }
        s
    }

    /// Same function with the threshold lowered by half a grid step.
    ///
    /// When weights and threshold are multiples of `step`, every value of
    /// `w·x - θ` is a multiple of `step` too, so this only moves exact ties
    /// (which evaluate to +1 either way) off zero.
    pub fn tie_broken(&self, step: T) -> Self {
        Self {
            weights: self.weights.clone(),
            threshold: self.threshold - step / lit(2.0),
        }
    }

    /// Applies `perm` (new index → original index) to the weights.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: perm.len(),
            });
        }
        Self::new(perm.iter().map(|&j| self.weights[j]).collect(), self.threshold)
    }

    /// Whether `θ ∈ [-(1-η)‖w‖₁, (1-η)‖w‖₁]`.
    pub fn is_eta_restricted(&self, eta: T) -> Result<bool> {
        if !(eta > T::zero() && eta <= T::one()) {
            return Err(invalid("eta", "must lie in (0, 1]"));
        }
        let bound = (T::one() - eta) * self.l1();
        Ok(self.threshold.abs() <= bound)
    }

    pub fn cast<U: Real>(&self) -> WeightedLtf<U> {
        WeightedLtf {
            weights: self.weights.iter().map(|w| lit(w.to_f64().unwrap())).collect(),
            threshold: lit(self.threshold.to_f64().unwrap()),
        }
    }
}

impl<T: Real> BooleanFunction for WeightedLtf<T> {
    fn n(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    fn eval_mask(&self, mask: u64) -> bool {
        self.dot_mask(mask) - self.threshold >= T::zero()
    }
}

/// A weighted voting game: coalition `S` wins iff `Σ_{i∈S} v_i ≥ q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec<T> {
    raw_weights: Vec<T>,
    quota: T,
}

impl<T: Real> GameSpec<T> {
    pub fn new(raw_weights: Vec<T>, quota: T) -> Result<Self> {
        if raw_weights.is_empty() {
            return Err(Error::InvalidWeights("n must be at least 1".into()));
        }
        if let Some(i) = raw_weights
            .iter()
            .position(|w| !w.is_finite() || *w < T::zero())
        {
            return Err(Error::InvalidWeights(format!(
                "weight {i} must be finite and nonnegative"
            )));
        }
        let total: T = raw_weights.iter().copied().sum();
        if !(quota > T::zero() && quota <= total) {
            return Err(invalid("quota", format!("must lie in (0, {total}]")));
        }
        Ok(Self { raw_weights, quota })
    }

    pub fn raw_weights(&self) -> &[T] {
        &self.raw_weights
    }

    pub fn quota(&self) -> T {
        self.quota
    }

    /// Whether the coalition given by `mask` reaches the quota.
    pub fn wins(&self, mask: u64) -> bool {
        let s: T = self
            .raw_weights
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, w)| *w)
            .sum();
        s >= self.quota
    }

    /// The ±1 view: `θ = 2q - Σv`.
    pub fn to_ltf(&self) -> WeightedLtf<T> {
        let total: T = self.raw_weights.iter().copied().sum();
        WeightedLtf::new(self.raw_weights.clone(), lit::<T>(2.0) * self.quota - total)
            .expect("game weights are valid")
    }
}

pub fn from_game<T: Real>(g: &GameSpec<T>) -> WeightedLtf<T> {
    g.to_ltf()
}

/// Stable sort by nonincreasing magnitude. `perm[new] = original`.
pub fn sort_by_magnitude<T: Real>(f: &WeightedLtf<T>) -> (WeightedLtf<T>, Vec<usize>) {
    let perm = magnitude_order(f.weights());
    let sorted = f.permuted(&perm).expect("permutation has length n");
    (sorted, perm)
}

/// Indices of `w` ordered by nonincreasing `|w_i|`, ties in original order.
pub fn magnitude_order<T: Real>(w: &[T]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..w.len()).collect();
    perm.sort_by(|&a, &b| {
        w[b].abs()
            .partial_cmp(&w[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    perm
}

/// `‖w‖∞ / ‖w‖₂`.
pub fn regularity<T: Real>(w: &[T]) -> Result<T> {
    let l2 = w.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if !(l2 > T::zero()) {
        return Err(Error::ZeroVector);
    }
    let linf = w.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    Ok(linf / l2)
}

/// Tail norms `σ_k = sqrt(Σ_{i≥k} w_i²)` (returned 0-based: entry k-1 is σ_k).
pub fn tail_norms<T: Real>(w: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); w.len()];
    let mut acc = T::zero();
    for i in (0..w.len()).rev() {
        acc = acc + w[i] * w[i];
        out[i] = acc.sqrt();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalIndex {
    /// 1-based position at which the tail becomes regular.
    At(usize),
    Infinite,
}

impl CriticalIndex {
    pub fn is_infinite(&self) -> bool {
        matches!(self, CriticalIndex::Infinite)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalIndexReport<T> {
    pub tau: T,
    pub critical_index: CriticalIndex,
    /// `tail_norms[k-1] = σ_k`.
    pub tail_norms: Vec<T>,
}

/// The τ-critical index: smallest `i` with `|w_i| ≤ τ σ_i`.
pub fn critical_index<T: Real>(w: &[T], tau: T) -> Result<CriticalIndexReport<T>> {
    if !(tau > T::zero() && tau <= T::one()) {
        return Err(invalid("tau", "must lie in (0, 1]"));
    }
    if let Some(i) = (1..w.len()).find(|&i| w[i].abs() > w[i - 1].abs()) {
        return Err(Error::Unsorted(i));
    }
    let tail_norms = tail_norms(w);
    let critical_index = (0..w.len())
        .find(|&i| w[i].abs() <= tau * tail_norms[i])
        .map_or(CriticalIndex::Infinite, |i| CriticalIndex::At(i + 1));
    Ok(CriticalIndexReport {
        tau,
        critical_index,
        tail_norms,
    })
}

pub fn is_eta_restricted<T: Real>(f: &WeightedLtf<T>, eta: T) -> Result<bool> {
    f.is_eta_restricted(eta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discretized<T> {
    pub ltf: WeightedLtf<T>,
    /// Factor the input was divided by so its largest weight became 1.
    pub scale: T,
    /// Indices of nonzero weights that rounded to zero.
    pub collapsed: Vec<usize>,
}

impl<T> Discretized<T> {
    /// Set when rounding wiped out some nonzero weights.
    pub fn warning(&self) -> bool {
        !self.collapsed.is_empty()
    }
}

/// Rescales so the largest weight magnitude is 1, then rounds every weight
/// and the threshold to the nearest multiple of `gamma`.
pub fn discretize<T: Real>(f: &WeightedLtf<T>, gamma: T) -> Result<Discretized<T>> {
    if !(gamma > T::zero() && gamma.is_finite()) {
        return Err(invalid("gamma", "must be positive"));
    }
    let scale = f.weights().iter().fold(T::zero(), |m, w| m.max(w.abs()));
    if !(scale > T::zero()) {
        return Err(Error::ZeroVector);
    }
    let round = |x: T| (x / scale / gamma).round() * gamma;
    let weights: Vec<T> = f.weights().iter().map(|&w| round(w)).collect();
    let collapsed = f
        .weights()
        .iter()
        .zip(&weights)
        .enumerate()
        .filter(|(_, (w, r))| **w != T::zero() && **r == T::zero())
        .map(|(i, _)| i)
        .collect();
    Ok(Discretized {
        ltf: WeightedLtf::new(weights, round(f.threshold()))?,
        scale,
        collapsed,
    })
}

/// Evaluates on an explicit ±1 vector; convenience for tests and the CLI.
pub fn evaluate<T: Real>(f: &WeightedLtf<T>, x: &[i8]) -> Result<i8> {
    f.evaluate(x)
}

/// Mask of a ±1 vector, validated against `n`.
pub fn checked_mask(x: &[i8], n: usize) -> Result<u64> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    pm1_to_mask(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::mask_to_pm1;

    type L = WeightedLtf<f64>;

    #[test]
    fn sign_of_zero_is_plus() {
        let f = L::new(vec![49.0, 49.0, 2.0], 2.0).unwrap();
        assert_eq!(f.evaluate(&[1, -1, 1]).unwrap(), 1);
        let maj = L::majority(3);
        assert_eq!(maj.evaluate(&[1, 1, -1]).unwrap(), 1);
        assert!(f.evaluate(&[1, 1]).is_err());
    }

    #[test]
    fn eu_game_conversion() {
        let g = GameSpec::new(vec![4.0, 4.0, 4.0, 2.0, 2.0, 1.0], 12.0).unwrap();
        let f = g.to_ltf();
        assert_eq!(f.threshold(), 7.0);
        assert_eq!(f.evaluate(&[1, 1, 1, -1, -1, -1]).unwrap(), 1);
        for mask in 0..64u64 {
            assert_eq!(g.wins(mask), f.eval_mask(mask));
            assert_eq!(
                f.evaluate(&mask_to_pm1(mask, 6)).unwrap() == 1,
                f.eval_mask(mask)
            );
        }
    }

    #[test]
    fn small_games() {
        let g = GameSpec::new(vec![49.0, 49.0, 2.0], 51.0).unwrap();
        assert_eq!(g.to_ltf().threshold(), 2.0);
        for mask in 0..8 {
            assert_eq!(g.wins(mask), g.to_ltf().eval_mask(mask));
        }
        let d = GameSpec::new(vec![1.0], 1.0).unwrap();
        assert_eq!(d.to_ltf().threshold(), 1.0);
        assert!(GameSpec::new(vec![1.0, 1.0], 0.0).is_err());
        assert!(GameSpec::new(vec![1.0, 1.0], 2.5).is_err());
        assert!(GameSpec::new(vec![-1.0, 1.0], 0.5).is_err());
    }

    #[test]
    fn sorting() {
        let f = L::new(vec![1.0, 3.0, 2.0], 0.0).unwrap();
        let (s, perm) = sort_by_magnitude(&f);
        assert_eq!(s.weights(), &[3.0, 2.0, 1.0]);
        let one_based: Vec<usize> = perm.iter().map(|p| p + 1).collect();
        assert_eq!(one_based, vec![2, 3, 1]);

        let f = L::new(vec![3.0, 2.0, 1.0], 0.0).unwrap();
        assert_eq!(sort_by_magnitude(&f).1, vec![0, 1, 2]);

        let f = L::new(vec![2.0, 1.0, 2.0], 0.0).unwrap();
        assert_eq!(sort_by_magnitude(&f).1, vec![0, 2, 1]);
    }

    #[test]
    fn regularity_values() {
        assert_eq!(regularity(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.5);
        assert_eq!(regularity(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((regularity(&[3.0, 4.0]).unwrap() - 0.8f64).abs() < 1e-15);
        assert_eq!(regularity::<f64>(&[0.0, 0.0]), Err(Error::ZeroVector));
    }

    #[test]
    fn critical_indices() {
        let r = critical_index(&[4.0, 2.0, 1.0, 1.0, 1.0, 1.0], 0.5).unwrap();
        assert_eq!(r.critical_index, CriticalIndex::At(3));
        assert_eq!(r.tail_norms[2], 2.0);
        let r = critical_index(&[8.0, 4.0, 2.0, 1.0], 0.1).unwrap();
        assert_eq!(r.critical_index, CriticalIndex::Infinite);
        let r = critical_index(&[5.0, 1.0], 1.0).unwrap();
        assert_eq!(r.critical_index, CriticalIndex::At(1));
        assert_eq!(critical_index(&[1.0, 2.0], 0.5).unwrap_err(), Error::Unsorted(1));
        assert!(critical_index(&[1.0], 0.0).is_err());
    }

    #[test]
    fn eta_restriction() {
        assert!(L::majority(3).is_eta_restricted(1.0).unwrap());
        assert!(!L::new(vec![1.0, 1.0], 2.0).unwrap().is_eta_restricted(0.5).unwrap());
        let eu = GameSpec::new(vec![4.0, 4.0, 4.0, 2.0, 2.0, 1.0], 12.0)
            .unwrap()
            .to_ltf();
        assert!(eu.is_eta_restricted(0.5).unwrap());
    }

    #[test]
    fn discretization() {
        let f = L::new(vec![1.0, 0.333], 0.5).unwrap();
        let d = discretize(&f, 0.25).unwrap();
        assert_eq!(d.ltf.weights(), &[1.0, 0.25]);
        assert_eq!(d.ltf.threshold(), 0.5);
        assert!(!d.warning());

        let f = L::new(vec![1.0, 0.1, 0.3], 0.0).unwrap();
        let d = discretize(&f, 2.0).unwrap();
        assert!(d.ltf.weights()[1..].iter().all(|w| *w == 0.0 || *w == 2.0));
        assert!(d.warning());

        let f = L::new(vec![1.0, 0.5, 0.25], 0.75).unwrap();
        assert_eq!(discretize(&f, 0.25).unwrap().ltf, f);
        assert!(discretize(&f, 0.0).is_err());
    }

    #[test]
    fn tie_breaking_preserves_function() {
        let f = L::new(vec![1.0, 1.0, 1.0, 1.0], 0.0).unwrap();
        let g = f.tie_broken(1.0);
        for m in 0..16 {
            assert_eq!(f.eval_mask(m), g.eval_mask(m));
        }
    }
}
