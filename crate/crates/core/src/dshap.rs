//! The Shapley distribution on {-1,1}^n, its orthonormal linear basis, and
//! the truncated p-biased mixture that approximates it.
//!
//! A string of `k` ones (`1 ≤ k ≤ n-1`) gets mass `Q(n,k)/(Λ(n)·C(n,k))`
//! with `Q(n,k) = 1/k + 1/(n-k)` and `Λ(n) = 2 H_{n-1}`; the two constant
//! strings get none.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::cube::{binomial, BooleanFunction, SliceProfile};
use crate::error::{invalid, Error, Result};
use crate::gaussian::BiasParams;
use crate::quadrature::{integrate, integrate_vec, QuadratureConfig};
use crate::real::{count, lit, Field, Real};

/// `Q(n, k) = 1/k + 1/(n-k)`.
pub fn slice_weight<T: Field>(n: usize, k: usize) -> T {
    let one = T::one();
    one.clone() / count::<T>(k as i128) + one / count::<T>((n - k) as i128)
}

/// `Λ(n) = 2 H_{n-1} = Σ_{k=1}^{n-1} Q(n, k)`.
pub fn lambda<T: Field>(n: usize) -> T {
    (1..n).fold(T::zero(), |acc, k| {
        acc + lit_div::<T>(2, k)
    })
}

fn lit_div<T: Field>(num: i128, den: usize) -> T {
    count::<T>(num) / count::<T>(den as i128)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DShapParams<T> {
    pub n: usize,
    pub lambda: T,
    /// `slice_probs[k] = Q(n,k)/Λ(n)`, zero at `k = 0` and `k = n`.
    pub slice_probs: Vec<T>,
}

impl<T: Field> DShapParams<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", "the Shapley distribution needs n ≥ 2"));
        }
        let lambda: T = lambda(n);
        let slice_probs = (0..=n)
            .map(|k| {
                if k == 0 || k == n {
                    T::zero()
                } else {
                    slice_weight::<T>(n, k) / lambda.clone()
                }
            })
            .collect();
        Ok(Self {
            n,
            lambda,
            slice_probs,
        })
    }

    /// Mass of each individual string in slice k.
    pub fn string_masses(&self) -> Vec<T> {
        (0..=self.n)
            .map(|k| self.slice_probs[k].clone() / count::<T>(crate::cube::binomial_u128(self.n, k) as i128))
            .collect()
    }
}

/// `Pr_{D_Shap}[x]` for the string encoded by `mask`.
pub fn dshap_pmf<T: Field>(n: usize, mask: u64) -> Result<T> {
    let params = DShapParams::<T>::new(n)?;
    let k = mask.count_ones() as usize;
    if k > n {
        return Err(invalid("mask", "has bits beyond n"));
    }
    Ok(params.string_masses()[k].clone())
}

/// Two-stage sampler: a slice `k` with probability `Q(n,k)/Λ(n)`, then a
/// uniform string of that weight.
#[derive(Clone, Debug)]
pub struct DShapSampler {
    n: usize,
    slices: WeightedIndex<f64>,
}

impl DShapSampler {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=64).contains(&n) {
            return Err(invalid("n", "must lie in 2..=64"));
        }
        let params = DShapParams::<f64>::new(n)?;
        let slices = WeightedIndex::new(&params.slice_probs[1..n])
            .map_err(|e| invalid("n", e.to_string()))?;
        Ok(Self { n, slices })
    }

    pub fn sample_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let k = self.slices.sample(rng) + 1;
        rand::seq::index::sample(rng, self.n, k)
            .iter()
            .fold(0u64, |m, i| m | 1 << i)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i8> {
        crate::cube::mask_to_pm1(self.sample_mask(rng), self.n)
    }
}

/// Orthonormal basis `L_0 = 1`, `L_i(x) = a·Σx_j + b·x_i` under D_Shap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapleyBasis<T> {
    pub n: usize,
    pub a: T,
    pub b: T,
}

/// `E_{D_Shap}[(Σ x_j)²]`.
pub fn second_moment<T: Real>(n: usize) -> Result<T> {
    let params = DShapParams::<T>::new(n)?;
    Ok((1..n)
        .map(|k| {
            let s: T = count((2 * k as i128) - n as i128);
            params.slice_probs[k] * s * s
        })
        .sum())
}

impl<T: Real> ShapleyBasis<T> {
    /// Solves `⟨L_i, L_i⟩ = 1` and `⟨L_i, L_j⟩ = 0` from the exact moments
    /// `M = E[s²]`, `E[x_i s] = M/n`, `E[x_i x_j] = ρ = (M-n)/(n(n-1))`:
    /// `b = 1/√(1-ρ)` and `a` is the root of `M a² + (2bM/n) a + b²ρ = 0`
    /// closest to zero among the negative ones.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(
                "n",
                "for n = 2 every non-constant string has Σx = 0, so no such basis exists",
            ));
        }
        let mm: T = second_moment(n)?;
        let nf: T = count(n as i128);
        let rho = (mm - nf) / (nf * (nf - T::one()));
        let b = T::one() / (T::one() - rho).sqrt();
        let disc = (mm * (nf * nf - mm)).sqrt() / (nf * (nf - T::one()).sqrt());
        let center = -mm / nf;
        let plus = b / mm * (center + disc);
        let minus = b / mm * (center - disc);
        let a = if plus < T::zero() { plus } else { minus };
        Ok(Self { n, a, b })
    }

    pub fn eval(&self, i: usize, x: &[i8]) -> T {
        if i == 0 {
            return T::one();
        }
        let s: i64 = x.iter().map(|&v| v as i64).sum();
        self.a * count::<T>(s as i128) + self.b * count::<T>(x[i - 1] as i128)
    }
}

/// Per-string D_Shap masses by slice, in `T`.
fn masses<T: Real>(n: usize) -> Result<Vec<T>> {
    Ok(DShapParams::<T>::new(n)?.string_masses())
}

/// `f*(i) = E_{D_Shap}[f(x) x_i]` for every coordinate.
pub fn correlations_shap<T: Real>(profile: &SliceProfile) -> Result<Vec<T>> {
    Ok(profile.correlations_exchangeable(&masses::<T>(profile.n())?))
}

pub fn coordinate_correlation_shap<T: Real, F: BooleanFunction>(f: &F, cap: usize) -> Result<Vec<T>> {
    correlations_shap(&SliceProfile::of(f, cap)?)
}

/// Shapley indices from Shapley-distribution correlations:
/// `(f(1^n) - f(-1^n))/n + (Λ/2)(f*(i) - avg_j f*(j))`.
pub fn shapley_via_correlations<T: Real>(profile: &SliceProfile) -> Result<Vec<T>> {
    let n = profile.n();
    let corr: Vec<T> = correlations_shap(profile)?;
    let nf: T = count(n as i128);
    let avg = corr.iter().copied().sum::<T>() / nf;
    let lam: T = lambda(n);
    let ends: T = count::<T>(profile.top() - profile.bottom()) / nf;
    Ok(corr
        .iter()
        .map(|&c| ends + lam / lit(2.0) * (c - avg))
        .collect())
}

/// `(f△(0), ..., f△(n))` with `f△(i) = E_{D_Shap}[f L_i]`.
pub fn shapley_fourier_coeffs<T: Real>(profile: &SliceProfile) -> Result<Vec<T>> {
    let n = profile.n();
    let basis = ShapleyBasis::<T>::new(n)?;
    let m = masses::<T>(n)?;
    let mean = profile.mean_exchangeable(&m);
    let corr = profile.correlations_exchangeable(&m);
    let total: T = corr.iter().copied().sum();
    let mut out = Vec::with_capacity(n + 1);
    out.push(mean);
    out.extend(corr.iter().map(|&c| basis.a * total + basis.b * c));
    Ok(out)
}

pub fn shapley_fourier_coeff<T: Real, F: BooleanFunction>(f: &F, i: usize, cap: usize) -> Result<T> {
    if i > f.n() {
        return Err(invalid("i", "must lie in 0..=n"));
    }
    Ok(shapley_fourier_coeffs(&SliceProfile::of(f, cap)?)?[i])
}

pub fn shapley_fourier_distance<T: Real, F: BooleanFunction, G: BooleanFunction>(
    f: &F,
    g: &G,
    cap: usize,
) -> Result<T> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: g.n(),
        });
    }
    let a: Vec<T> = shapley_fourier_coeffs(&SliceProfile::of(f, cap)?)?;
    let b: Vec<T> = shapley_fourier_coeffs(&SliceProfile::of(g, cap)?)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum::<T>()
        .sqrt())
}

/// `Pr_{D_Shap}[f ≠ g]`.
pub fn dshap_disagreement<F: BooleanFunction, G: BooleanFunction>(
    f: &F,
    g: &G,
    cap: usize,
) -> Result<f64> {
    let n = f.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.n(),
        });
    }
    crate::cube::check_cap(n, cap)?;
    let m = masses::<f64>(n)?;
    Ok((0..1u64 << n)
        .filter(|&x| f.eval_mask(x) != g.eval_mask(x))
        .map(|x| m[x.count_ones() as usize])
        .sum())
}

/// The truncated bias distribution K(δ) on `[δ, 1-δ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KDeltaParams {
    pub n: usize,
    pub delta: f64,
    /// `C_δ = Λ(n)/(2 ln(1/δ - 1))`.
    pub c_delta: f64,
}

impl KDeltaParams {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", "must be at least 2"));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(invalid("delta", "must lie in (0, 1/2)"));
        }
        let lam: f64 = lambda(n);
        Ok(Self {
            n,
            delta,
            c_delta: lam / (2.0 * (1.0 / delta - 1.0).ln()),
        })
    }

    /// Whether δ is below `1/n`, the regime in which the mixture is close to
    /// the Shapley distribution.
    pub fn is_small(&self) -> bool {
        self.delta < 1.0 / self.n as f64
    }

    pub fn density(&self, p: f64) -> f64 {
        if p < self.delta || p > 1.0 - self.delta {
            return 0.0;
        }
        let lam: f64 = lambda(self.n);
        self.c_delta * (1.0 / p + 1.0 / (1.0 - p)) / lam
    }

    /// `(1/p + 1/(1-p))/Λ(n)`, the integration weight of `(1/C_δ) E_{Q(δ)}`.
    pub fn mixture_weight(&self, p: f64) -> f64 {
        let lam: f64 = lambda(self.n);
        (1.0 / p + 1.0 / (1.0 - p)) / lam
    }
}

/// `(1/C_δ) E_{Q(δ)}[f]` with the two constant strings removed, i.e.
/// `∫_δ^{1-δ} (1/p + 1/(1-p))/Λ · (E_{u_p}[f] - f(1)pⁿ - f(-1)(1-p)ⁿ) dp`.
pub fn qdelta_expectation(profile: &SliceProfile, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let k = KDeltaParams::new(profile.n(), delta)?;
    let n = profile.n() as i32;
    let (top, bottom) = (profile.top() as f64, profile.bottom() as f64);
    let q = integrate(
        |p: f64| {
            let mean: f64 = profile.mean_pbiased(p);
            k.mixture_weight(p) * (mean - top * p.powi(n) - bottom * (1.0 - p).powi(n))
        },
        delta,
        1.0 - delta,
        cfg,
    )?;
    Ok(q.value)
}

/// The mixture approximation of the Shapley indices,
/// `(f(1)-f(-1))/n + (Λ/2) ∫_δ^{1-δ} (1/p+1/(1-p))/Λ · (f*(i,p) - avg_j f*(j,p)) dp`.
pub fn qdelta_correlations(
    profile: &SliceProfile,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let k = KDeltaParams::new(profile.n(), delta)?;
    let n = profile.n();
    let q = integrate_vec(
        |p: f64| {
            let c: Vec<f64> = profile.correlations_pbiased(p);
            let avg = c.iter().sum::<f64>() / n as f64;
            let w = k.mixture_weight(p);
            c.iter().map(|x| w * (x - avg)).collect()
        },
        n,
        delta,
        1.0 - delta,
        cfg,
    )?;
    let lam: f64 = lambda(n);
    let ends = (profile.top() - profile.bottom()) as f64 / n as f64;
    Ok(q.value.iter().map(|v| ends + lam / 2.0 * v).collect())
}

/// `Σ_{1≤|x|≤n-1} |(1/C_δ) Pr_{Q(δ)}[x] - Pr_{D_Shap}[x]|` together with the
/// per-slice bound `Σ_k C(n,k)/Λ · (δ^k + δ^{k+1} + δ^{n-k} + δ^{n-k+1})`.
pub fn qdelta_tv(n: usize, delta: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let k = KDeltaParams::new(n, delta)?;
    let shap = masses::<f64>(n)?;
    let lam: f64 = lambda(n);
    let mut tv = 0.0;
    let mut bound = 0.0;
    for j in 1..n {
        let q = integrate(
            |p: f64| k.mixture_weight(p) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32),
            delta,
            1.0 - delta,
            cfg,
        )?;
        let c = binomial(n, j);
        tv += c * (q.value - shap[j]).abs();
        let (jf, rest) = (j as i32, (n - j) as i32);
        bound += c / lam
            * (delta.powi(jf) + delta.powi(jf + 1) + delta.powi(rest) + delta.powi(rest + 1));
    }
    Ok((tv, bound))
}

/// Checks the identity `f*(i,p) = σ_p f̂(i,p) + μ_p E_{u_p}[f]` inputs.
pub fn correlation_identity_rhs<T: Real>(chow_p: T, mean: T, p: T) -> Result<T> {
    let b = BiasParams::new(p)?;
    Ok(b.sigma * chow_p + b.mu * mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{mask_to_pm1, DEFAULT_ENUMERATION_CAP as CAP};
    use crate::ltf::WeightedLtf;
    use num_rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmf_n3() {
        for mask in 1..7u64 {
            let p: Ratio<i64> = dshap_pmf(3, mask).unwrap();
            assert_eq!(p, Ratio::new(1, 6));
        }
        assert_eq!(dshap_pmf::<Ratio<i64>>(3, 7).unwrap(), Ratio::new(0, 1));
        assert_eq!(dshap_pmf::<Ratio<i64>>(3, 0).unwrap(), Ratio::new(0, 1));
    }

    #[test]
    fn pmf_normalized_exactly() {
        for n in 2..=10 {
            let p = DShapParams::<Ratio<i64>>::new(n).unwrap();
            let m = p.string_masses();
            let total = (0..=n).fold(Ratio::new(0, 1), |acc, k| {
                acc + m[k] * Ratio::from_integer(binomial(n, k) as i64)
            });
            assert_eq!(total, Ratio::new(1, 1), "n = {n}");
        }
    }

    #[test]
    fn basis_n3_values() {
        let b = ShapleyBasis::<f64>::new(3).unwrap();
        assert!((b.b - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((b.a + b.b).abs() < 1e-15);
        assert!(ShapleyBasis::<f64>::new(2).is_err());
    }

    #[test]
    fn basis_orthonormal_by_enumeration() {
        for n in 3..=10 {
            let basis = ShapleyBasis::<f64>::new(n).unwrap();
            assert!(basis.a < 0.0 && basis.b > 0.0);
            let masses: Vec<f64> = masses(n).unwrap();
            let mut gram = vec![vec![0.0; n + 1]; n + 1];
            for mask in 0..1u64 << n {
                let w = masses[mask.count_ones() as usize];
                if w == 0.0 {
                    continue;
                }
                let x = mask_to_pm1(mask, n);
                let vals: Vec<f64> = (0..=n).map(|i| basis.eval(i, &x)).collect();
                for i in 0..=n {
                    for j in 0..=n {
                        gram[i][j] += w * vals[i] * vals[j];
                    }
                }
            }
            for i in 0..=n {
                for j in 0..=n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[i][j] - want).abs() < 1e-9, "n={n} ({i},{j}) {}", gram[i][j]);
                }
            }
        }
    }

    #[test]
    fn sampler_avoids_constants() {
        let s = DShapSampler::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let m = s.sample_mask(&mut rng);
            assert!(m != 0 && m != 31);
        }
    }

    #[test]
    fn kdelta_density_integrates_to_one() {
        for n in [3, 8, 20] {
            let k = KDeltaParams::new(n, 1.0 / (n * n) as f64).unwrap();
            let q = integrate(|p: f64| k.density(p), k.delta, 1.0 - k.delta, &QuadratureConfig::default())
                .unwrap();
            assert!((q.value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn expshap_on_eu_game() {
        let f = WeightedLtf::<f64>::new(vec![4.0, 4.0, 4.0, 2.0, 2.0, 1.0], 7.0).unwrap();
        let prof = SliceProfile::of(&f, CAP).unwrap();
        let via = shapley_via_correlations::<f64>(&prof).unwrap();
        let direct = crate::indices::shapley_exact::<f64, _>(&f, CAP).unwrap();
        for (a, b) in via.iter().zip(&direct.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_function_expectation() {
        // f ≡ +1 minus its endpoint contributions leaves only the interior;
        // the constant 0 function is emulated by weighting nothing.
        let prof = SliceProfile {
            n: 4,
            value_sums: vec![0; 5],
            coord_sums: vec![0; 20],
        };
        let v = qdelta_expectation(&prof, 1.0 / 16.0, &QuadratureConfig::default()).unwrap();
        assert_eq!(v, 0.0);
    }
}
