//! Reconstruction of a monotone LTF from Shapley indices given on a subset of
//! positions: head juntas, then head weights plus a tail recovered by a
//! dynamic program from the affine relation between tail weights and tail
//! Shapley indices.
//!
//! All weights, thresholds and norms live on the lattice `γ·ℤ`; candidates are
//! returned in lattice units (integer weights), which describe the same
//! function.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chow_inverse::{consistent_juntas, VerifyMode};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{alpha_head_tail, BiasParams, HeadMode};
use crate::indices::{shapley_dp, shapley_estimate, IndexKind, IndexVector, PartialIndexVector};
use crate::ltf::{discretize, Discretized, WeightedLtf};
use crate::quadrature::{integrate, QuadratureConfig};

/// Which of the two stated forms of the head-size bound `k` to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterForm {
    /// `k = max{4 log⁹ n / ε⁴, 1/ε¹²}`
    Direct,
    /// `k = max{4 log n / τ², 1/ε¹²}`
    ViaTau,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapReconConfig {
    pub eps: f64,
    pub delta_fail: f64,
    /// Tail regularity: every recovered tail weight is at most `τ·W₂`.
    pub tau_star: f64,
    pub head_cap: usize,
    /// Lattice step for weights, thresholds and `W₁`; `W₂²` lives on `γ²·ℤ`.
    pub gamma: f64,
    pub junta_weight_bound: u32,
    /// Values per head weight, spread over `[0, 1]`.
    pub head_points: usize,
    pub theta_points: usize,
    pub w1_points: usize,
    pub w2_points: usize,
    /// Largest tail ℓ₁ norm in lattice units.
    pub max_tail_units: u32,
    pub verify_mode: VerifyMode,
    pub accept_factor: f64,
    pub max_candidates: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub quadrature: QuadratureConfig,
}

impl ShapReconConfig {
    /// Runnable defaults: `γ = 1/16`, heads up to 3, every grid at most 16
    /// points.
    pub fn desk(eps: f64, delta_fail: f64) -> Self {
        Self {
            eps,
            delta_fail,
            tau_star: 0.5,
            head_cap: 3,
            gamma: 1.0 / 16.0,
            junta_weight_bound: 8,
            head_points: 5,
            theta_points: 9,
            w1_points: 8,
            w2_points: 4,
            max_tail_units: 32,
            verify_mode: VerifyMode::Exact,
            accept_factor: 2.0,
            max_candidates: 40_000,
            batch_size: 256,
            seed: 0,
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid("eps", "must lie in (0, 1)"));
        }
        if !(self.delta_fail > 0.0 && self.delta_fail < 1.0) {
            return Err(invalid("delta_fail", "must lie in (0, 1)"));
        }
        if !(self.tau_star > 0.0 && self.tau_star <= 1.0) {
            return Err(invalid("tau_star", "must lie in (0, 1]"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(invalid("gamma", "must lie in (0, 1]"));
        }
        if self.head_points < 2
            || self.theta_points == 0
            || self.w1_points == 0
            || self.w2_points == 0
            || self.batch_size == 0
        {
            return Err(invalid("grid caps", "must be positive (head grid at least 2)"));
        }
        if !(self.accept_factor >= 0.0) {
            return Err(invalid("accept_factor", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.accept_factor * self.eps
    }

    fn units_per_one(&self) -> u32 {
        (1.0 / self.gamma + 1e-9).floor() as u32
    }
}

/// Literal asymptotic settings; `γ = 1/(n² k^{k/2})` is reported as a base-10
/// logarithm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapleyAsymptoticParameters {
    pub eps: f64,
    pub n: usize,
    pub form: ParameterForm,
    pub tau_star: f64,
    pub k_star: f64,
    pub log10_gamma: f64,
    pub delta: f64,
}

pub fn shapley_asymptotic_parameters(eps: f64, n: usize, form: ParameterForm) -> ShapleyAsymptoticParameters {
    let ln = (n.max(2) as f64).ln();
    let tau_star = eps * eps / ln.powi(4);
    let cap = 1.0 / eps.powi(12);
    let k_star = match form {
        ParameterForm::Direct => (4.0 * ln.powi(9) / eps.powi(4)).max(cap),
        ParameterForm::ViaTau => (4.0 * ln / (tau_star * tau_star)).max(cap),
    };
    let log10_gamma = -(2.0 * (n as f64).log10() + k_star / 2.0 * k_star.log10());
    ShapleyAsymptoticParameters {
        eps,
        n,
        form,
        tau_star,
        k_star,
        log10_gamma,
        delta: 1.0 / (n as f64 * n as f64),
    }
}

// ---------------------------------------------------------------------------
// Affine constants

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineConstants {
    /// Slope `A◇`: tail Shapley index ≈ `A◇·w_i + B◇`.
    pub a_diamond: f64,
    pub b_diamond: f64,
    /// `Γ◇` and `Δ◇` at unit tail norm.
    pub gamma: f64,
    pub delta_const: f64,
    pub head: Vec<f64>,
    pub w1: f64,
    pub w2: f64,
    pub theta: f64,
    pub delta: f64,
}

/// `Γ◇ = ½∫_δ^{1-δ} σ_p α(θ, w_H, w_T, p)(1/p + 1/(1-p)) dp` and
/// `Δ◇ = 2/n - Γ◇‖w_T‖₁/n` at `‖w_T‖₂ = 1`, then `A◇ = Γ◇/W₂`, `B◇ = Δ◇` after
/// dividing head, threshold and `W₁` by `W₂`.
pub fn affine_constants(
    n: usize,
    head: &[f64],
    w1: f64,
    w2: f64,
    theta: f64,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<AffineConstants> {
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    if !(w2 > 0.0 && w2.is_finite()) {
        return Err(invalid("w2", "must be positive"));
    }
    if !(w1 >= 0.0 && w1.is_finite()) {
        return Err(invalid("w1", "must be nonnegative"));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid("delta", "must lie in (0, 1/2)"));
    }
    if !theta.is_finite() || head.iter().any(|w| !w.is_finite()) {
        return Err(invalid("head", "weights and threshold must be finite"));
    }
    // α depends on the head only through its multiset
    let mut scaled: Vec<f64> = head.iter().map(|w| w / w2).collect();
    scaled.sort_by(|a, b| b.total_cmp(a));
    let (th, l1) = (theta / w2, w1 / w2);
    let mut failure = None;
    let q = integrate(
        |p: f64| {
            let sigma = BiasParams::new(p).map(|b| b.sigma).unwrap_or(0.0);
            match alpha_head_tail(th, &scaled, l1, 1.0, p, HeadMode::Exact, None) {
                Ok(a) => 0.5 * sigma * a * (1.0 / p + 1.0 / (1.0 - p)),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        delta,
        1.0 - delta,
        cfg,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let gamma = q.value;
    let delta_const = 2.0 / n as f64 - gamma * l1 / n as f64;
    Ok(AffineConstants {
        a_diamond: gamma / w2,
        b_diamond: delta_const,
        gamma,
        delta_const,
        head: head.to_vec(),
        w1,
        w2,
        theta,
        delta,
    })
}

// ---------------------------------------------------------------------------
// Weight recovery

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RecoverOutcome {
    Weights {
        weights: Vec<f64>,
        /// Weights in lattice units.
        units: Vec<u32>,
        cost: f64,
    },
    Infeasible,
}

impl RecoverOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Weights { .. })
    }
}

/// Prefix table of the weight-recovery program, in lattice units.
///
/// `entry(k, s, q)` is the least cost of `(α_i - A·w_i + B)²` summed over the
/// known positions among the first `k`, over prefixes `z_1..z_k` with
/// `Σz = s`, `Σz² = q`, `0 ≤ z_i ≤ cap`; `None` when no prefix exists.
#[derive(Clone, Debug)]
pub struct RecoverTable {
    alphas: Vec<Option<f64>>,
    slope: f64,
    offset: f64,
    s1: usize,
    m: usize,
    cap: u32,
    layers: Vec<Vec<f64>>,
}

impl RecoverTable {
    /// Builds the table for targets `s1 = W₁/γ`, `m = W₂²/γ²`; `slope` is
    /// `A·γ`, so a unit weight `z` contributes `(α - slope·z + offset)²`.
    pub fn build(alphas: &[Option<f64>], s1: u32, m: u32, cap: u32, slope: f64, offset: f64) -> Self {
        let (s1, m) = (s1 as usize, m as usize);
        let width = m + 1;
        let cell = |s: usize, q: usize| s * width + q;
        let mut layers: Vec<Vec<f64>> = Vec::with_capacity(alphas.len());
        for (k, alpha) in alphas.iter().enumerate() {
            let cost = |z: u32| {
                alpha.map_or(0.0, |a| {
                    let r = a - slope * z as f64 + offset;
                    r * r
                })
            };
            let costs: Vec<f64> = (0..=cap).map(cost).collect();
            let mut next = vec![f64::INFINITY; (s1 + 1) * width];
            if k == 0 {
                for z in 0..=cap as usize {
                    if z <= s1 && z * z <= m {
                        next[cell(z, z * z)] = costs[z];
                    }
                }
            } else {
                let prev = &layers[k - 1];
                for s in 0..=s1 {
                    for q in 0..=m {
                        let mut best = f64::INFINITY;
                        for z in 0..=(cap as usize).min(s) {
                            if z * z > q {
                                break;
                            }
                            let before = prev[cell(s - z, q - z * z)];
                            if before.is_finite() {
                                let c = before + costs[z];
                                if c < best {
                                    best = c;
                                }
                            }
                        }
                        next[cell(s, q)] = best;
                    }
                }
            }
            layers.push(next);
        }
        Self {
            alphas: alphas.to_vec(),
            slope,
            offset,
            s1,
            m,
            cap,
            layers,
        }
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Least prefix cost for layer `k` (1-based), or `None` for ⊥.
    pub fn entry(&self, k: usize, s: usize, q: usize) -> Option<f64> {
        if k == 0 {
            return (s == 0 && q == 0).then_some(0.0);
        }
        if s > self.s1 || q > self.m {
            return None;
        }
        let v = self.layers.get(k - 1)?[s * (self.m + 1) + q];
        v.is_finite().then_some(v)
    }

    fn unit_cost(&self, k: usize, z: u32) -> f64 {
        self.alphas[k].map_or(0.0, |a| {
            let r = a - self.slope * z as f64 + self.offset;
            r * r
        })
    }

    /// An optimal prefix for `(k, s, q)`: the last weight is the smallest
    /// optimal one, then recursively, so among optimal sequences the one that
    /// is smallest comparing from the last position backwards wins.
    pub fn argmin(&self, k: usize, s: usize, q: usize) -> Option<Vec<u32>> {
        self.entry(k, s, q)?;
        let mut out = vec![0u32; k];
        let (mut s, mut q) = (s, q);
        for layer in (1..=k).rev() {
            let target = self.entry(layer, s, q).expect("reachable");
            let z = (0..=self.cap.min(s as u32))
                .find(|&z| {
                    let zz = (z * z) as usize;
                    if zz > q {
                        return false;
                    }
                    match self.entry(layer - 1, s - z as usize, q - zz) {
                        Some(before) if layer > 1 => before + self.unit_cost(layer - 1, z) == target,
                        Some(_) => self.unit_cost(0, z) == target,
                        None => false,
                    }
                })
                .expect("optimal predecessor");
            out[layer - 1] = z;
            s -= z as usize;
            q -= (z * z) as usize;
        }
        Some(out)
    }
}

/// Lattice form of [`recover_weights`]: `cap = ⌊τ√m⌋`.
pub fn recover_weights_units(
    alphas: &[Option<f64>],
    s1: u32,
    m: u32,
    tau: f64,
    slope: f64,
    offset: f64,
) -> (Option<Vec<u32>>, f64) {
    if alphas.is_empty() {
        return if s1 == 0 && m == 0 {
            (Some(Vec::new()), 0.0)
        } else {
            (None, f64::INFINITY)
        };
    }
    let cap = (tau * (m as f64).sqrt() + 1e-9).floor() as u32;
    let table = RecoverTable::build(alphas, s1, m, cap, slope, offset);
    let n = alphas.len();
    match table.argmin(n, s1 as usize, m as usize) {
        Some(z) => {
            let cost = table.entry(n, s1 as usize, m as usize).unwrap();
            (Some(z), cost)
        }
        None => (None, f64::INFINITY),
    }
}

fn lattice_units(x: f64, step: f64, name: &'static str) -> Result<u32> {
    let u = x / step;
    let r = u.round();
    if !(u >= -1e-9) || (u - r).abs() > 1e-6 * r.max(1.0) || r > u32::MAX as f64 {
        return Err(invalid(name, format!("{x} is not a nonnegative multiple of {step}")));
    }
    Ok(r as u32)
}

/// Nonnegative weights on the `γ` lattice with `‖w‖₁ = W₁`, `‖w‖₂ = W₂`,
/// `w_i ≤ τW₂`, minimizing `Σ_{i∈S}(α_i - A·w_i + B)²` over the positions of
/// `alphas` (positions `1..=n_T`).
pub fn recover_weights(
    alphas: &PartialIndexVector<f64>,
    gamma: f64,
    w1: f64,
    w2: f64,
    tau: f64,
    a: f64,
    b: f64,
) -> Result<RecoverOutcome> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "must be positive"));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(invalid("tau", "must lie in (0, 1]"));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(invalid("affine constants", "must be finite"));
    }
    let s1 = lattice_units(w1, gamma, "w1")?;
    let m = lattice_units(w2 * w2, gamma * gamma, "w2")?;
    let mut dense = vec![None; alphas.n()];
    for (c, v) in alphas.coordinates() {
        dense[c] = Some(v);
    }
    Ok(
        match recover_weights_units(&dense, s1, m, tau, a * gamma, b) {
            (Some(units), cost) => RecoverOutcome::Weights {
                weights: units.iter().map(|&z| z as f64 * gamma).collect(),
                units,
                cost,
            },
            (None, _) => RecoverOutcome::Infeasible,
        },
    )
}

/// Rescale-and-round with the configured `γ`.
pub fn discretize_for_reconstruction(f: &WeightedLtf<f64>, cfg: &ShapReconConfig) -> Result<Discretized<f64>> {
    discretize(f, cfg.gamma)
}

// ---------------------------------------------------------------------------
// Search

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapleyProvenance {
    Junta {
        head: Vec<usize>,
    },
    Structured {
        head: Vec<usize>,
        theta: f64,
        w1: f64,
        w2: f64,
        a_diamond: f64,
        b_diamond: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapleyReconstruction {
    /// Lattice-unit weights; multiply by `gamma` for the `[0, 1]` scale.
    pub ltf: WeightedLtf<f64>,
    pub gamma: f64,
    pub certified: bool,
    pub achieved_distance: f64,
    pub candidates_tried: usize,
    pub head_size_guess: usize,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub provenance: ShapleyProvenance,
}

#[derive(Clone, Debug)]
struct Candidate {
    ltf: WeightedLtf<f64>,
    provenance: ShapleyProvenance,
}

/// Head guesses: `|H|` ascending, then `|H ∩ S|` descending; `H ∩ S` holds
/// the positions of S with the largest indices, `H ∖ S` the lowest-numbered
/// positions outside S.
fn head_guesses(input: &PartialIndexVector<f64>, head_cap: usize) -> Vec<(Vec<(usize, f64)>, Vec<usize>)> {
    let n = input.n();
    let mut ranked: Vec<(usize, f64)> = input.entries().to_vec();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let in_s: HashSet<usize> = input.positions().into_iter().collect();
    let free: Vec<usize> = (1..=n).filter(|p| !in_s.contains(p)).collect();
    let mut out = Vec::new();
    for h in 0..=head_cap.min(n) {
        let hi = h.min(ranked.len());
        let lo = h.saturating_sub(free.len());
        if lo > hi {
            continue;
        }
        for hs in (lo..=hi).rev() {
            out.push((ranked[..hs].to_vec(), free[..h - hs].to_vec()));
        }
    }
    out
}

/// Evenly thins a sorted list, keeping both ends.
fn spread(lo: u32, hi: u32, points: usize) -> Vec<u32> {
    if hi < lo {
        return Vec::new();
    }
    let span = (hi - lo) as usize;
    if span < points || points == 1 {
        return if points == 1 { vec![lo] } else { (lo..=hi).collect() };
    }
    let mut v: Vec<u32> = (0..points)
        .map(|j| lo + ((span * j) as f64 / (points - 1) as f64).round() as u32)
        .collect();
    v.dedup();
    v
}

fn nonincreasing(len: usize, levels: &[u32]) -> Vec<Vec<u32>> {
    fn rec(len: usize, top: usize, levels: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for j in 0..=top {
            cur.push(levels[j]);
            rec(len, j, levels, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if !levels.is_empty() {
        rec(len, levels.len() - 1, levels, &mut Vec::new(), &mut out);
    }
    out
}

/// One structured grid cell: lattice-unit head weights, threshold and tail
/// norms.
#[derive(Clone, Debug)]
struct Cell {
    head_units: Vec<u32>,
    theta: u32,
    s1: u32,
    m: u32,
}

/// `(W₁, W₂²)` pairs in lattice units consistent with a `τ`-capped tail of
/// `n_t` weights: `W₂ ≤ τW₁` and `W₁ ≤ n_t·τW₂`, `W₁ ≤ √n_t·W₂`.
fn norm_grid(n_t: usize, cfg: &ShapReconConfig) -> Vec<(u32, u32)> {
    let tau = cfg.tau_star;
    let mut out = Vec::new();
    for s1 in spread(1, cfg.max_tail_units, cfg.w1_points) {
        let s = s1 as f64;
        let nt = n_t as f64;
        let lo = (s * s / nt).max((s / (nt * tau)).powi(2));
        let lo = (lo - 1e-9).ceil() as u32;
        let hi = (tau * tau * s * s + 1e-9).floor() as u32;
        if lo > hi {
            continue;
        }
        let (rl, rh) = ((lo as f64).sqrt(), (hi as f64).sqrt());
        let mut ms: Vec<u32> = if cfg.w2_points == 1 || hi == lo {
            vec![lo]
        } else {
            (0..cfg.w2_points)
                .map(|j| {
                    let r = rl + (rh - rl) * j as f64 / (cfg.w2_points - 1) as f64;
                    ((r * r).round() as u32).clamp(lo, hi)
                })
                .collect()
        };
        ms.dedup();
        out.extend(ms.into_iter().map(|m| (s1, m)));
    }
    out
}

struct Context<'a> {
    input: &'a PartialIndexVector<f64>,
    cfg: &'a ShapReconConfig,
    delta: f64,
}

impl Context<'_> {
    fn distance(&self, g: &WeightedLtf<f64>, index: u64) -> Result<f64> {
        let values = match self.cfg.verify_mode {
            VerifyMode::Exact => shapley_dp::<f64>(g)?,
            VerifyMode::Sampled => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
                rng.set_stream(index);
                let delta = self.cfg.delta_fail / self.cfg.max_candidates.max(1) as f64;
                shapley_estimate::<f64, _, _>(g, self.cfg.eps, delta, &mut rng)?.0
            }
        };
        Ok(partial(self.input, &values))
    }

    /// Builds the candidate of a cell, or `None` when its tail is infeasible.
    fn structured(&self, head: &[usize], tail: &[usize], cell: &Cell) -> Result<Option<Candidate>> {
        let cfg = self.cfg;
        let n = self.input.n();
        let g = cfg.gamma;
        let head_w: Vec<f64> = cell.head_units.iter().map(|&z| z as f64 * g).collect();
        let w1 = cell.s1 as f64 * g;
        let w2 = (cell.m as f64).sqrt() * g;
        let theta = cell.theta as f64 * g;
        let c = affine_constants(n, &head_w, w1, w2, theta, self.delta, &cfg.quadrature)?;
        let alphas: Vec<Option<f64>> = tail.iter().map(|&p| self.input.get(p)).collect();
        // the program fits α ≈ A·w - B, so the offset B◇ enters negated
        let (units, _) = recover_weights_units(
            &alphas,
            cell.s1,
            cell.m,
            cfg.tau_star,
            c.a_diamond * g,
            -c.b_diamond,
        );
        let Some(units) = units else {
            return Ok(None);
        };
        let mut w = vec![0.0; n];
        for (&p, &z) in head.iter().zip(&cell.head_units) {
            w[p - 1] = z as f64;
        }
        for (&p, &z) in tail.iter().zip(&units) {
            w[p - 1] = z as f64;
        }
        Ok(Some(Candidate {
            ltf: WeightedLtf::new(w, cell.theta as f64)?,
            provenance: ShapleyProvenance::Structured {
                head: head.to_vec(),
                theta,
                w1,
                w2,
                a_diamond: c.a_diamond,
                b_diamond: c.b_diamond,
            },
        }))
    }
}

fn partial(input: &PartialIndexVector<f64>, g: &IndexVector<f64>) -> f64 {
    input
        .entries()
        .iter()
        .map(|&(p, v)| {
            let d = v - g.get(p).unwrap_or(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

struct Search<'a> {
    ctx: Context<'a>,
    tried: usize,
    best: Option<(f64, Candidate, usize)>,
}

impl Search<'_> {
    fn budget_left(&self) -> bool {
        self.tried < self.ctx.cfg.max_candidates
    }

    fn record(&mut self, scored: Vec<Option<(Candidate, f64)>>, h: usize) -> Option<ShapleyReconstruction> {
        let limit = self.ctx.cfg.threshold();
        for (j, item) in scored.into_iter().enumerate() {
            let Some((c, d)) = item else { continue };
            if d <= limit {
                self.tried += j + 1;
                return Some(self.output(c, d, h, true));
            }
            if self.best.as_ref().is_none_or(|b| d < b.0) {
                self.best = Some((d, c, h));
            }
        }
        None
    }

    fn output(&self, c: Candidate, d: f64, h: usize, certified: bool) -> ShapleyReconstruction {
        let (w1, w2) = match &c.provenance {
            ShapleyProvenance::Structured { w1, w2, .. } => (Some(*w1), Some(*w2)),
            ShapleyProvenance::Junta { .. } => (None, None),
        };
        ShapleyReconstruction {
            ltf: c.ltf,
            gamma: self.ctx.cfg.gamma,
            certified,
            achieved_distance: d,
            candidates_tried: self.tried,
            head_size_guess: h,
            w1,
            w2,
            provenance: c.provenance,
        }
    }

    fn juntas(&mut self, in_s: &[(usize, f64)], outside: &[usize]) -> Result<Option<ShapleyReconstruction>> {
        let n = self.ctx.input.n();
        let h = in_s.len() + outside.len();
        let cands = consistent_juntas(n, in_s, outside, self.ctx.cfg.junta_weight_bound);
        for batch in cands.chunks(self.ctx.cfg.batch_size) {
            if !self.budget_left() {
                return Ok(None);
            }
            let batch = &batch[..batch.len().min(self.ctx.cfg.max_candidates - self.tried)];
            let base = self.tried as u64;
            let scored: Vec<Option<(Candidate, f64)>> = batch
                .par_iter()
                .enumerate()
                .map(|(j, c)| {
                    let cand = Candidate {
                        ltf: c.ltf.clone(),
                        provenance: ShapleyProvenance::Junta {
                            head: match &c.provenance {
                                crate::chow_inverse::Provenance::Junta { head } => head.clone(),
                                _ => unreachable!(),
                            },
                        },
                    };
                    let d = self.ctx.distance(&cand.ltf, base + j as u64)?;
                    Ok(Some((cand, d)))
                })
                .collect::<Result<_>>()?;
            if let Some(r) = self.record(scored, h) {
                return Ok(Some(r));
            }
            self.tried += batch.len();
        }
        Ok(None)
    }

    fn structured(&mut self, in_s: &[(usize, f64)], outside: &[usize]) -> Result<Option<ShapleyReconstruction>> {
        let cfg = self.ctx.cfg;
        let n = self.ctx.input.n();
        let head: Vec<usize> = in_s.iter().map(|e| e.0).chain(outside.iter().copied()).collect();
        let tail: Vec<usize> = (1..=n).filter(|p| !head.contains(p)).collect();
        if tail.is_empty() {
            return Ok(None);
        }
        let one = cfg.units_per_one();
        let levels = spread(0, one, cfg.head_points);
        let norms = norm_grid(tail.len(), cfg);
        let mut cells = Vec::new();
        for a in nonincreasing(in_s.len(), &levels) {
            for b in nonincreasing(outside.len(), &levels) {
                let head_units: Vec<u32> = a.iter().chain(&b).copied().collect();
                let head_l1: u32 = head_units.iter().sum();
                let top = head_l1 + cfg.max_tail_units;
                for theta in spread(0, top.saturating_sub(1), cfg.theta_points) {
                    for &(s1, m) in &norms {
                        // g(1ⁿ) = -1 beyond this point
                        if theta > head_l1 + s1 {
                            continue;
                        }
                        cells.push(Cell {
                            head_units: head_units.clone(),
                            theta,
                            s1,
                            m,
                        });
                    }
                }
            }
        }
        for batch in cells.chunks(cfg.batch_size) {
            if !self.budget_left() {
                return Ok(None);
            }
            let batch = &batch[..batch.len().min(cfg.max_candidates - self.tried)];
            let base = self.tried as u64;
            let scored: Vec<Option<(Candidate, f64)>> = batch
                .par_iter()
                .enumerate()
                .map(|(j, cell)| {
                    let Some(c) = self.ctx.structured(&head, &tail, cell)? else {
                        return Ok(None);
                    };
                    let d = self.ctx.distance(&c.ltf, base + j as u64)?;
                    Ok(Some((c, d)))
                })
                .collect::<Result<_>>()?;
            if let Some(r) = self.record(scored, head.len()) {
                return Ok(Some(r));
            }
            self.tried += batch.len();
        }
        Ok(None)
    }
}

/// Reconstructs a monotone LTF whose Shapley indices on the input positions
/// lie within `accept_factor · eps` of the given values; falls back to the
/// best candidate seen with `certified = false`.
pub fn reconstruct_partial_shapley(
    input: &PartialIndexVector<f64>,
    cfg: &ShapReconConfig,
) -> Result<ShapleyReconstruction> {
    cfg.validate()?;
    if !matches!(input.kind(), IndexKind::Shapley) {
        return Err(invalid("input", "expected Shapley indices"));
    }
    let n = input.n();
    if n == 0 {
        return Err(Error::InvalidWeights("n must be at least 1".into()));
    }
    if input.get(0).is_some() {
        return Err(invalid("input", "Shapley indices have no position 0"));
    }
    let mut search = Search {
        ctx: Context {
            input,
            cfg,
            delta: (1.0 / (n as f64 * n as f64)).min(0.25),
        },
        tried: 0,
        best: None,
    };
    for (in_s, outside) in head_guesses(input, cfg.head_cap) {
        if let Some(r) = search.juntas(&in_s, &outside)? {
            return finish(r, input, cfg);
        }
        if let Some(r) = search.structured(&in_s, &outside)? {
            return finish(r, input, cfg);
        }
        if !search.budget_left() {
            break;
        }
    }
    let (d, c, h) = search
        .best
        .take()
        .ok_or_else(|| invalid("max_candidates", "no candidate was evaluated"))?;
    let r = search.output(c, d, h, false);
    finish(r, input, cfg)
}

fn finish(
    mut r: ShapleyReconstruction,
    input: &PartialIndexVector<f64>,
    cfg: &ShapReconConfig,
) -> Result<ShapleyReconstruction> {
    if cfg.verify_mode == VerifyMode::Sampled {
        r.achieved_distance = partial(input, &shapley_dp::<f64>(&r.ltf)?);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::shapley_exact;
    use crate::ltf::{from_game, GameSpec};

    fn brute(alphas: &[Option<f64>], s1: u32, m: u32, cap: u32, slope: f64, offset: f64) -> Option<Vec<u32>> {
        fn rec(
            k: usize,
            cur: &mut Vec<u32>,
            n: usize,
            s1: u32,
            m: u32,
            cap: u32,
            out: &mut Vec<Vec<u32>>,
        ) {
            if k == n {
                let s: u32 = cur.iter().sum();
                let q: u32 = cur.iter().map(|z| z * z).sum();
                if s == s1 && q == m {
                    out.push(cur.clone());
                }
                return;
            }
            let used: u32 = cur.iter().sum();
            for z in 0..=cap.min(s1 - used) {
                cur.push(z);
                rec(k + 1, cur, n, s1, m, cap, out);
                cur.pop();
            }
        }
        let mut all = Vec::new();
        rec(0, &mut Vec::new(), alphas.len(), s1, m, cap, &mut all);
        let cost = |z: &Vec<u32>| {
            z.iter().zip(alphas).fold(0.0, |acc, (z, a)| {
                acc + a.map_or(0.0, |a| {
                    let r = a - slope * *z as f64 + offset;
                    r * r
                })
            })
        };
        all.into_iter().min_by(|x, y| {
            cost(x)
                .total_cmp(&cost(y))
                .then_with(|| x.iter().rev().cmp(y.iter().rev()))
        })
    }

    #[test]
    fn recover_example() {
        let alphas = PartialIndexVector::new(IndexKind::Shapley, 2, vec![(1, 2.2), (2, 0.9)]).unwrap();
        let r = recover_weights(&alphas, 1.0, 3.0, 5f64.sqrt(), 1.0, 1.0, 0.0).unwrap();
        let RecoverOutcome::Weights { units, cost, .. } = r else { panic!() };
        assert_eq!(units, vec![2, 1]);
        assert!((cost - 0.05).abs() < 1e-12);
        let r = recover_weights(&alphas, 1.0, 0.0, 0.0, 1.0, 1.0, 0.5).unwrap();
        let RecoverOutcome::Weights { units, cost, .. } = r else { panic!() };
        assert_eq!(units, vec![0, 0]);
        assert!((cost - (2.7f64 * 2.7 + 1.4 * 1.4)).abs() < 1e-12);
        // τW₂ = 0.5·√6 < W₁/n_T = 2: no weight vector fits
        let alphas = PartialIndexVector::new(IndexKind::Shapley, 2, vec![(1, 0.1)]).unwrap();
        let r = recover_weights(&alphas, 1.0, 4.0, 8f64.sqrt(), 0.5, 1.0, 0.0).unwrap();
        assert_eq!(r, RecoverOutcome::Infeasible);
        assert!(recover_weights(&alphas, 0.5, 0.3, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn recover_matches_brute_force() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.random_range(1..=5);
            let alphas: Vec<Option<f64>> = (0..n)
                .map(|_| rng.random_bool(0.7).then(|| rng.random_range(0..16) as f64 / 8.0))
                .collect();
            let s1 = rng.random_range(0..=8);
            let m = rng.random_range(0..=s1 * s1);
            let cap = rng.random_range(0..=8);
            let slope = rng.random_range(-4..=4) as f64 / 4.0;
            let offset = rng.random_range(-4..=4) as f64 / 8.0;
            let table = RecoverTable::build(&alphas, s1, m, cap, slope, offset);
            let dp = table.argmin(n, s1 as usize, m as usize);
            assert_eq!(dp, brute(&alphas, s1, m, cap, slope, offset));
        }
    }

    #[test]
    fn affine_constants_scale() {
        let qc = QuadratureConfig::default();
        let a = affine_constants(10, &[0.5, 0.25], 1.5, 0.7, 0.2, 0.01, &qc).unwrap();
        let b = affine_constants(10, &[1.5, 0.75], 4.5, 2.1, 0.6, 0.01, &qc).unwrap();
        assert!((a.a_diamond / 3.0 - b.a_diamond).abs() < 1e-10);
        assert!((a.b_diamond - b.b_diamond).abs() < 1e-10);
        let c = affine_constants(10, &[0.25, 0.5], 1.5, 0.7, 0.2, 0.01, &qc).unwrap();
        assert_eq!(a.a_diamond, c.a_diamond);
        assert_eq!(a.b_diamond, c.b_diamond);
        // empty head: the integrand is σ_p α(ψ(θ)) (1/p + 1/(1-p)) / 2
        let e = affine_constants(6, &[], 2.0, 1.0, 0.3, 0.05, &qc).unwrap();
        let direct = integrate(
            |p: f64| {
                let b = BiasParams::new(p).unwrap();
                0.5 * b.sigma
                    * crate::gaussian::alpha_theta(b.psi_weighted(0.3, 2.0, 1.0))
                    * (1.0 / p + 1.0 / (1.0 - p))
            },
            0.05,
            0.95,
            &qc,
        )
        .unwrap();
        assert!((e.gamma - direct.value).abs() < 1e-9);
    }

    #[test]
    fn luxembourg_round_trip() {
        let game = GameSpec::new(vec![4.0, 4.0, 4.0, 2.0, 2.0, 1.0], 12.0).unwrap();
        let f = from_game(&game);
        let sh = shapley_exact::<f64, _>(&f, 20).unwrap();
        let all: Vec<usize> = (1..=6).collect();
        let input = sh.restrict(&all).unwrap();
        let cfg = ShapReconConfig::desk(0.2, 0.1);
        let r = reconstruct_partial_shapley(&input, &cfg).unwrap();
        assert!(r.certified);
        let g = shapley_exact::<f64, _>(&r.ltf, 20).unwrap();
        assert!(g.values[5].abs() <= 0.05);
        assert!((partial(&input, &g) - r.achieved_distance).abs() < 1e-12);
        assert!(r.achieved_distance <= 0.4);
    }

    #[test]
    fn empty_input_certifies() {
        let input = PartialIndexVector::new(IndexKind::Shapley, 7, vec![]).unwrap();
        let r = reconstruct_partial_shapley(&input, &ShapReconConfig::desk(0.2, 0.1)).unwrap();
        assert!(r.certified && r.achieved_distance == 0.0);
    }

    #[test]
    fn structured_candidates_recover_regular_games() {
        let f = WeightedLtf::new(vec![3.0, 3.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0], 1.0).unwrap();
        let sh = shapley_exact::<f64, _>(&f, 20).unwrap();
        let input = sh.restrict(&[1, 3, 5, 7, 9]).unwrap();
        let mut cfg = ShapReconConfig::desk(0.05, 0.1);
        cfg.head_cap = 0;
        let r = reconstruct_partial_shapley(&input, &cfg).unwrap();
        assert!(matches!(r.provenance, ShapleyProvenance::Structured { .. }) || r.candidates_tried <= 2);
        assert!(r.certified, "{r:?}");
    }

    #[test]
    fn asymptotic_parameter_forms_coincide() {
        // 4 log n / τ² with τ = ε²/log⁴ n is 4 log⁹ n / ε⁴
        let a = shapley_asymptotic_parameters(0.2, 100, ParameterForm::Direct);
        let b = shapley_asymptotic_parameters(0.2, 100, ParameterForm::ViaTau);
        assert_eq!(a.tau_star, b.tau_star);
        assert!((a.k_star / b.k_star - 1.0).abs() < 1e-12);
        assert!(a.log10_gamma < -100.0);
    }
}
