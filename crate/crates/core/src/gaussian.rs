//! Gaussian surrogates (`φ`, `Φ`, `m`, `W`, `α`) and p-biased moment maps.
//!
//! Special functions are evaluated in `f64` through `libm` and converted to
//! the caller's scalar type.

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};
use crate::real::{lit, Real};

/// Beyond this magnitude `m` is clamped to ±1 and `φ` to 0.
pub const THETA_CLAMP: f64 = 40.0;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().expect("finite scalar")
}

/// Standard normal density.
pub fn phi<T: Real>(x: T) -> T {
    let x = f(x);
    if x.abs() > THETA_CLAMP {
        return T::zero();
    }
    lit(INV_SQRT_2PI * (-0.5 * x * x).exp())
}

/// Standard normal cdf, via `erfc` so both tails keep relative accuracy.
pub fn normal_cdf<T: Real>(x: T) -> T {
    let x = f(x);
    if x.is_nan() {
        return T::nan();
    }
    lit(0.5 * libm::erfc(-x / std::f64::consts::SQRT_2))
}

/// `m(θ) = 2(1 - Φ(θ)) - 1`, the mean of `sign(x - θ)` for `x ~ N(0,1)`.
pub fn m<T: Real>(theta: T) -> T {
    let t = f(theta);
    if t >= THETA_CLAMP {
        return -T::one();
    }
    if t <= -THETA_CLAMP {
        return T::one();
    }
    lit(-libm::erf(t / std::f64::consts::SQRT_2))
}

fn m64(t: f64) -> f64 {
    m::<f64>(t)
}

/// The θ with `m(θ) = ν`, by bisection on `[-40, 40]` followed by Newton
/// polishing with `m'(θ) = -2φ(θ)`.
pub fn m_inverse<T: Real>(nu: T) -> Result<T> {
    let nu = f(nu);
    if !(nu.abs() < 1.0) {
        return Err(invalid("nu", "must satisfy |nu| < 1"));
    }
    if nu == 0.0 {
        return Ok(T::zero());
    }
    let (mut lo, mut hi) = (-THETA_CLAMP, THETA_CLAMP);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // m is decreasing
        if m64(mid) > nu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = -2.0 * phi(t);
        if d == 0.0 {
            break;
        }
        let next = t - (m64(t) - nu) / d;
        if !next.is_finite() || next.abs() > THETA_CLAMP {
            break;
        }
        t = next;
    }
    Ok(lit(t))
}

/// `W(ν) = (2φ(m⁻¹(ν)))²`, with `W(±1) = 0`.
pub fn w_function<T: Real>(nu: T) -> Result<T> {
    let v = f(nu);
    if !(v.abs() <= 1.0) {
        return Err(invalid("nu", "must lie in [-1, 1]"));
    }
    if v.abs() == 1.0 {
        return Ok(T::zero());
    }
    let t: f64 = m_inverse(v)?;
    let a = 2.0 * phi(t);
    Ok(lit(a * a))
}

/// `α(θ) = √W(m(θ)) = 2φ(θ)`.
pub fn alpha_theta<T: Real>(theta: T) -> T {
    lit::<T>(2.0) * phi(theta)
}

/// Mean and spread of a p-biased ±1 bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasParams<T> {
    pub p: T,
    pub mu: T,
    pub sigma: T,
}

impl<T: Real> BiasParams<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p > T::zero() && p < T::one()) {
            return Err(invalid("p", "must lie in (0, 1)"));
        }
        let two: T = lit(2.0);
        Ok(Self {
            p,
            mu: two * p - T::one(),
            sigma: two * (p * (T::one() - p)).sqrt(),
        })
    }

    /// `ψ_p(x) = (x - μ_p)/σ_p`.
    pub fn psi(&self, x: T) -> T {
        (x - self.mu) / self.sigma
    }

    /// `ψ_p^{[w]}(x) = (x - μ_p Σw)/(σ_p ‖w‖₂)`, given `Σw` and `‖w‖₂`.
    pub fn psi_weighted(&self, x: T, sum: T, l2: T) -> T {
        (x - self.mu * sum) / (self.sigma * l2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadMode {
    /// Sum over all `2^|H|` head assignments.
    Exact,
    /// Average over this many sampled head assignments.
    MonteCarlo(usize),
}

/// Largest head for [`HeadMode::Exact`].
pub const EXACT_HEAD_CAP: usize = 20;

/// `E_{ρ~u_p^{|H|}}[α(ψ_p^{[w_T]}(θ - w_H·ρ))]`.
///
/// The tail enters only through `tail_sum = Σ w_T` and `tail_l2 = ‖w_T‖₂`.
pub fn alpha_head_tail<T: Real>(
    theta: T,
    head: &[T],
    tail_sum: T,
    tail_l2: T,
    p: T,
    mode: HeadMode,
    rng: Option<&mut dyn RngCore>,
) -> Result<T> {
    if !(tail_l2 > T::zero()) {
        return Err(Error::InvalidWeights("empty tail".into()));
    }
    let bias = BiasParams::new(p)?;
    let at = |dot: T| alpha_theta(bias.psi_weighted(theta - dot, tail_sum, tail_l2));
    match mode {
        HeadMode::Exact => {
            let h = head.len();
            if h > EXACT_HEAD_CAP {
                return Err(Error::CapExceeded {
                    n: h,
                    cap: EXACT_HEAD_CAP,
                });
            }
            let q = T::one() - p;
            let mut acc = T::zero();
            for mask in 0u64..1 << h {
                let mut dot = T::zero();
                let mut mass = T::one();
                for (i, w) in head.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        dot = dot + *w;
                        mass = mass * p;
                    } else {
                        dot = dot - *w;
                        mass = mass * q;
                    }
                }
                acc = acc + mass * at(dot);
            }
            Ok(acc)
        }
        HeadMode::MonteCarlo(budget) => {
            let rng = rng.ok_or_else(|| invalid("rng", "Monte Carlo mode needs an rng"))?;
            if budget == 0 {
                return Err(invalid("budget", "must be positive"));
            }
            let pf = f(p);
            let mut acc = T::zero();
            for _ in 0..budget {
                let mut dot = T::zero();
                for w in head {
                    if rng.random::<f64>() < pf {
                        dot = dot + *w;
                    } else {
                        dot = dot - *w;
                    }
                }
                acc = acc + at(dot);
            }
            Ok(acc / lit(budget as f64))
        }
    }
}

/// Gaussian approximation of `Pr_{x~u_p^n}[w·x ∈ [a, b]]` with its
/// Berry–Esseen error bound `4·‖w‖∞/‖w‖₂/σ_p`.
pub fn pbiased_cdf_gaussian_bound<T: Real>(w: &[T], p: T, a: T, b: T) -> Result<(T, T)> {
    let bias = BiasParams::new(p)?;
    let reg = crate::ltf::regularity(w)?;
    let sum: T = w.iter().copied().sum();
    let l2 = w.iter().map(|x| *x * *x).sum::<T>().sqrt();
    let mean = bias.mu * sum;
    let sd = bias.sigma * l2;
    let prob = if b <= a {
        T::zero()
    } else {
        normal_cdf((b - mean) / sd) - normal_cdf((a - mean) / sd)
    };
    Ok((prob, lit::<T>(4.0) * reg / bias.sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn m_values() {
        assert_eq!(m(0.0f64), 0.0);
        assert_eq!(m(f64::NEG_INFINITY), 1.0);
        assert_eq!(m(f64::INFINITY), -1.0);
        assert!((m(1.0f64) + 0.682_689_492_137_085_9).abs() < 1e-14);
        assert!(m(1.0f32) < 0.0);
    }

    #[test]
    fn inverse_round_trip() {
        assert_eq!(m_inverse(0.0f64).unwrap(), 0.0);
        for k in -40..=40 {
            let t = k as f64 / 10.0;
            let back: f64 = m_inverse(m(t)).unwrap();
            assert!((back - t).abs() < 1e-10, "{t} -> {back}");
        }
        for &nu in &[0.3, -0.999, 0.999_999, 1.0 - 1e-15] {
            let t: f64 = m_inverse(nu).unwrap();
            assert!((m(t) - nu).abs() <= 1e-12);
        }
        let t: f64 = m_inverse(1.0 - f64::EPSILON / 2.0).unwrap();
        assert!(t.is_finite() && t.abs() <= THETA_CLAMP);
        assert!(m_inverse(1.0f64).is_err());
    }

    #[test]
    fn w_shape() {
        assert!((w_function(0.0f64).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert_eq!(w_function(1.0f64).unwrap(), 0.0);
        assert_eq!(w_function(-1.0f64).unwrap(), 0.0);
        let h = 1e-6;
        for k in -99..=99 {
            let v = k as f64 / 100.0;
            let a = w_function(v).unwrap();
            let b = w_function(-v).unwrap();
            assert!((a - b).abs() < 1e-13);
            if v.abs() < 0.98 {
                let d = (w_function(v + h).unwrap() - w_function(v - h).unwrap()) / (2.0 * h);
                assert!(d.abs() < 1.0);
            }
        }
    }

    #[test]
    fn alpha_matches_w() {
        assert!((alpha_theta(0.0f64) - (2.0 / PI).sqrt()).abs() < 1e-15);
        for k in -30..=30 {
            let t = k as f64 / 10.0;
            let via_w = w_function(m(t)).unwrap().sqrt();
            assert!((alpha_theta(t) - via_w).abs() < 1e-10);
        }
        assert!(alpha_theta(30.0f64) < 1e-100);
    }

    #[test]
    fn head_tail_alpha() {
        let bias = BiasParams::new(0.3f64).unwrap();
        let a = alpha_head_tail(0.4, &[], 2.0, 1.0, 0.3, HeadMode::Exact, None).unwrap();
        assert!((a - alpha_theta(bias.psi_weighted(0.4, 2.0, 1.0))).abs() < 1e-15);

        let a: f64 = alpha_head_tail(0.0, &[0.7], 0.0, 1.0, 0.5, HeadMode::Exact, None).unwrap();
        let two_point = 0.5 * (alpha_theta(-0.7) + alpha_theta(0.7));
        assert!((a - two_point).abs() < 1e-15);

        assert!(alpha_head_tail(0.0, &[], 0.0, 0.0, 0.5, HeadMode::Exact, None).is_err());
    }

    #[test]
    fn degenerate_interval() {
        let (g, bound) = pbiased_cdf_gaussian_bound(&[1.0f64, 1.0, 1.0, 1.0], 0.5, 0.3, 0.3).unwrap();
        assert_eq!(g, 0.0);
        assert!((bound - 2.0).abs() < 1e-15);
    }
}
