//! Reconstruction of an LTF from Chow parameters given on a subset of
//! positions: guess the head, enumerate head juntas and head-plus-regular-tail
//! candidates, and return the first one whose Chow parameters match.
//!
//! Coordinates are named by position (1-based); position 0 is the degree-0
//! coefficient.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::check_cap;
use crate::error::{invalid, Error, Result};
use crate::indices::{chow_at_positions, chow_estimate, IndexKind, PartialIndexVector};
use crate::ltf::WeightedLtf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChowReconConfig {
    pub eps: f64,
    pub delta: f64,
    /// Head/tail split level; positions with `|f̂(i)| ≥ τ²` may enter the head.
    pub tau: f64,
    pub head_cap: usize,
    pub junta_weight_bound: u32,
    /// Head-weight lattice step; `None` means `√τ/|H|`.
    pub grid_step: Option<f64>,
    /// Step of the tail-norm guesses; `None` means `τ`.
    pub gamma_prime_step: Option<f64>,
    /// Largest head weight magnitude relative to the unit tail; `None` means
    /// `2√ln(1/τ)`.
    pub head_weight_max: Option<f64>,
    /// Points per head weight; the step is coarsened to fit.
    pub max_grid_points: usize,
    pub max_theta_points: usize,
    pub max_gamma_points: usize,
    pub verify_mode: VerifyMode,
    /// A candidate passes when its distance is at most `accept_factor · eps`.
    pub accept_factor: f64,
    pub max_candidates: usize,
    pub enumeration_cap: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl ChowReconConfig {
    /// Runnable defaults: `τ = ε²/4`, heads up to 6, junta weights up to 8.
    pub fn desk(eps: f64, delta: f64) -> Self {
        Self {
            eps,
            delta,
            tau: eps * eps / 4.0,
            head_cap: 6,
            junta_weight_bound: 8,
            grid_step: None,
            gamma_prime_step: None,
            head_weight_max: None,
            max_grid_points: 6,
            max_theta_points: 17,
            max_gamma_points: 8,
            verify_mode: VerifyMode::Exact,
            accept_factor: 2.0,
            max_candidates: 200_000,
            enumeration_cap: crate::cube::DEFAULT_ENUMERATION_CAP,
            batch_size: 512,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid("eps", "must lie in (0, 1)"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta", "must lie in (0, 1)"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(invalid("tau", "must lie in (0, 1]"));
        }
        if self.max_grid_points < 2 || self.max_theta_points < 1 || self.max_gamma_points < 1 {
            return Err(invalid("grid caps", "must be positive (head grid at least 2)"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be positive"));
        }
        if !(self.accept_factor >= 0.0) {
            return Err(invalid("accept_factor", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.accept_factor * self.eps
    }

    fn head_weight_max(&self) -> f64 {
        self.head_weight_max
            .unwrap_or_else(|| 2.0 * (1.0 / self.tau).ln().max(0.0).sqrt())
    }
}

/// The literal parameter settings of the asymptotic analysis, reported as
/// base-10 logarithms where they underflow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChowAsymptoticParameters {
    pub eps: f64,
    pub log10_tau: f64,
    pub log10_head_cap: f64,
    pub head_weight_bound: &'static str,
    pub grid_step: &'static str,
    pub gamma_prime_step: &'static str,
}

pub fn chow_asymptotic_parameters(eps: f64) -> ChowAsymptoticParameters {
    let log10_tau = 1000.0 * eps.log10();
    ChowAsymptoticParameters {
        eps,
        log10_tau,
        log10_head_cap: -4.0 * log10_tau,
        head_weight_bound: "2^{O(|H| log |H|)} * sqrt(ln(1/tau))",
        grid_step: "sqrt(tau)/|H|",
        gamma_prime_step: "tau",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    Junta { head: Vec<usize> },
    Structured { head: Vec<usize>, gamma_prime: f64, r: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateLtf {
    pub ltf: WeightedLtf<f64>,
    pub provenance: Provenance,
}

/// Splits the degree-one entries at `|f̂(i)| ≥ τ²` into head and tail
/// positions.
pub fn split_head_tail(input: &PartialIndexVector<f64>, tau: f64) -> (Vec<usize>, Vec<usize>) {
    let cut = tau * tau;
    let mut head = Vec::new();
    let mut tail = Vec::new();
    for &(pos, v) in input.entries() {
        if pos == 0 {
            continue;
        }
        if v.abs() >= cut {
            head.push(pos);
        } else {
            tail.push(pos);
        }
    }
    (head, tail)
}

/// Nonincreasing sequences of length `len` with entries in `0..=max`, in
/// lexicographic order.
fn nonincreasing(len: usize, max: u32) -> Vec<Vec<u32>> {
    fn rec(len: usize, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in 0..=cap {
            cur.push(v);
            rec(len, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, max, &mut Vec::with_capacity(len), &mut out);
    out
}

/// Integer threshold functions on `weights.len()` variables: for every
/// distinct value `v` of `w·x`, `θ = v`, plus one threshold above the maximum.
fn threshold_functions(weights: &[i64]) -> Vec<(i64, u64)> {
    let h = weights.len();
    let dots: Vec<i64> = (0..1u64 << h)
        .map(|m| {
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| if m >> i & 1 == 1 { *w } else { -*w })
                .sum()
        })
        .collect();
    let mut values = dots.clone();
    values.sort_unstable();
    values.dedup();
    let top = *values.last().expect("nonempty") + 1;
    values.push(top);
    values
        .into_iter()
        .map(|theta| {
            let table = if h <= 6 {
                dots.iter()
                    .enumerate()
                    .fold(0u64, |t, (m, d)| if *d >= theta { t | 1 << m } else { t })
            } else {
                0
            };
            (theta, table)
        })
        .collect()
}

fn junta_ltf(n: usize, head: &[usize], weights: &[i64], theta: i64) -> WeightedLtf<f64> {
    let mut w = vec![0.0; n];
    for (&pos, &wi) in head.iter().zip(weights) {
        w[pos - 1] = wi as f64;
    }
    WeightedLtf::new(w, theta as f64).expect("finite junta")
}

fn collect_juntas(
    n: usize,
    head: &[usize],
    weight_vectors: impl Iterator<Item = Vec<i64>>,
) -> Vec<CandidateLtf> {
    let dedupe = head.len() <= 6;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for w in weight_vectors {
        for (theta, table) in threshold_functions(&w) {
            if dedupe && !seen.insert(table) {
                continue;
            }
            out.push(CandidateLtf {
                ltf: junta_ltf(n, head, &w, theta),
                provenance: Provenance::Junta {
                    head: head.to_vec(),
                },
            });
        }
    }
    out
}

/// All integer-weight threshold functions on the head positions with
/// `|w_i| ≤ weight_bound`, in shells of increasing `max |w_i|`, weights in
/// lexicographic order within a shell, thresholds ascending.
pub fn enumerate_junta_candidates(
    n: usize,
    head: &[usize],
    weight_bound: u32,
    head_cap: usize,
) -> Result<Vec<CandidateLtf>> {
    if head.len() > head_cap {
        return Err(Error::CapExceeded {
            n: head.len(),
            cap: head_cap,
        });
    }
    check_positions(n, head)?;
    let h = head.len();
    let b = weight_bound as i64;
    let mut vectors: Vec<Vec<i64>> = Vec::new();
    let side = (2 * b + 1) as u64;
    for code in 0..side.pow(h as u32) {
        let mut c = code;
        let w: Vec<i64> = (0..h)
            .map(|_| {
                let v = (c % side) as i64 - b;
                c /= side;
                v
            })
            .collect();
        vectors.push(w);
    }
    let shell = |w: &Vec<i64>| w.iter().map(|x| x.abs()).max().unwrap_or(0);
    vectors.sort_by(|x, y| shell(x).cmp(&shell(y)).then_with(|| x.cmp(y)));
    Ok(collect_juntas(n, head, vectors.into_iter()))
}

/// Juntas whose weights agree in sign with the given head Chow values and
/// are ordered like their magnitudes, which every LTF satisfies; head
/// positions outside S only take nonnegative, nonincreasing weights since
/// reflecting or permuting them leaves the Chow values on S unchanged.
///
/// `in_s` lists (position, f̂) sorted by decreasing `|f̂|`.
pub(crate) fn consistent_juntas(
    n: usize,
    in_s: &[(usize, f64)],
    outside: &[usize],
    weight_bound: u32,
) -> Vec<CandidateLtf> {
    let head: Vec<usize> = in_s.iter().map(|e| e.0).chain(outside.iter().copied()).collect();
    let a = nonincreasing(in_s.len(), weight_bound);
    let b = nonincreasing(outside.len(), weight_bound);
    let mut vectors: Vec<Vec<i64>> = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            let w: Vec<i64> = x
                .iter()
                .zip(in_s)
                .map(|(m, (_, f))| if *f < 0.0 { -(*m as i64) } else { *m as i64 })
                .chain(y.iter().map(|m| *m as i64))
                .collect();
            vectors.push(w);
        }
    }
    let shell = |w: &Vec<i64>| w.iter().map(|x| x.abs()).max().unwrap_or(0);
    vectors.sort_by_key(shell);
    collect_juntas(n, &head, vectors.into_iter())
}

fn check_positions(n: usize, head: &[usize]) -> Result<()> {
    if let Some(&p) = head.iter().find(|&&p| p == 0 || p > n) {
        return Err(invalid("head", format!("position {p} outside 1..={n}")));
    }
    Ok(())
}

/// Radicands this close below zero are rounding noise.
const RADICAND_TOLERANCE: f64 = 1e-12;

/// `sign(Σ_H v_i x_i + (1/γ')(Σ_{T∩S} f̂(i) x_i + Σ_{T∖S} r x_i) - θ')` with
/// `r = ((γ'² - Σ_{T∩S} f̂(i)²)/|T∖S|)^{1/2}`, so the tail has unit norm.
///
/// Returns `Ok(None)` when the radicand is negative: this γ' is too small.
pub fn build_structured_candidate(
    input: &PartialIndexVector<f64>,
    head: &[usize],
    head_weights: &[f64],
    gamma_prime: f64,
    theta: f64,
) -> Result<Option<CandidateLtf>> {
    let n = input.n();
    check_positions(n, head)?;
    if head.len() != head_weights.len() {
        return Err(Error::DimensionMismatch {
            expected: head.len(),
            got: head_weights.len(),
        });
    }
    if !(gamma_prime > 0.0) {
        return Err(invalid("gamma_prime", "must be positive"));
    }
    let mut in_head = vec![false; n];
    for &p in head {
        in_head[p - 1] = true;
    }
    let mut known = vec![None; n];
    for (c, v) in input.coordinates() {
        known[c] = Some(v);
    }
    let tail_known: f64 = (0..n)
        .filter(|&c| !in_head[c])
        .filter_map(|c| known[c])
        .map(|v| v * v)
        .sum();
    let unknown = (0..n).filter(|&c| !in_head[c] && known[c].is_none()).count();
    let mut radicand = gamma_prime * gamma_prime - tail_known;
    if radicand < 0.0 {
        if radicand >= -RADICAND_TOLERANCE {
            radicand = 0.0;
        } else {
            return Ok(None);
        }
    }
    let r = if unknown > 0 {
        (radicand / unknown as f64).sqrt()
    } else {
        0.0
    };
    let mut w = vec![0.0; n];
    for (&p, &v) in head.iter().zip(head_weights) {
        w[p - 1] = v;
    }
    for c in 0..n {
        if !in_head[c] {
            w[c] = known[c].unwrap_or(r) / gamma_prime;
        }
    }
    Ok(Some(CandidateLtf {
        ltf: WeightedLtf::new(w, theta)?,
        provenance: Provenance::Structured {
            head: head.to_vec(),
            gamma_prime,
            r,
        },
    }))
}

/// Evenly thins a sorted list to at most `cap` entries, keeping the first.
fn thin<T: Copy>(v: Vec<T>, cap: usize) -> Vec<T> {
    if v.len() <= cap {
        return v;
    }
    let stride = v.len().div_ceil(cap);
    v.into_iter().step_by(stride).collect()
}

/// Tail-norm guesses `γ'`: multiples of the step (and 1) between the known
/// tail norm and the Parseval bound.
fn gamma_grid(
    input: &PartialIndexVector<f64>,
    head: &[usize],
    cfg: &ChowReconConfig,
) -> Vec<f64> {
    let n = input.n();
    let in_head = |c: usize| head.contains(&(c + 1));
    let tail_size = n - head.len();
    if tail_size == 0 {
        return Vec::new();
    }
    let known_tail: Vec<f64> = input
        .coordinates()
        .filter(|&(c, _)| !in_head(c))
        .map(|e| e.1)
        .collect();
    let lo = known_tail.iter().map(|v| v * v).sum::<f64>().sqrt();
    if known_tail.len() == tail_size {
        // T ⊆ S: the tail norm is known exactly
        return if lo > 0.0 { vec![lo] } else { Vec::new() };
    }
    if known_tail.is_empty() {
        // every tail weight is r/γ' = 1/√|T| regardless of γ'
        return vec![1.0];
    }
    let used: f64 = input
        .entries()
        .iter()
        .filter(|(p, _)| *p == 0 || head.contains(p))
        .map(|(_, v)| v * v)
        .sum();
    let hi = (1.0 - used).max(0.0).sqrt().max(lo);
    let step = cfg.gamma_prime_step.unwrap_or(cfg.tau);
    let tol = 1e-9;
    let mut grid: Vec<f64> = (1..)
        .map(|k| k as f64 * step)
        .take_while(|g| *g <= 1.0 + tol)
        .filter(|g| *g >= lo - tol && *g <= hi + tol)
        .collect();
    if grid.last().is_none_or(|g| (g - 1.0).abs() > tol) && 1.0 >= lo - tol && 1.0 <= hi + tol {
        grid.push(1.0);
    }
    if grid.is_empty() {
        grid.push(lo.max(step.min(hi)));
    }
    thin(grid, cfg.max_gamma_points)
}

/// Head-magnitude lattice: multiples of the step up to the maximum, the step
/// coarsened so at most `max_grid_points` values remain.
fn head_levels(h: usize, cfg: &ChowReconConfig) -> Vec<f64> {
    let base = cfg.grid_step.unwrap_or(cfg.tau.sqrt() / h.max(1) as f64);
    let max = cfg.head_weight_max();
    let want = (max / base).floor() as usize;
    let per = want.div_ceil(cfg.max_grid_points - 1).max(1);
    let step = base * per as f64;
    (0..cfg.max_grid_points)
        .map(|k| k as f64 * step)
        .take_while(|v| *v <= max + 1e-12)
        .collect()
}

fn theta_grid(head_l1: f64, cfg: &ChowReconConfig) -> Vec<f64> {
    let k = (cfg.max_theta_points.saturating_sub(1) / 2) as i64;
    if k == 0 {
        return vec![0.0];
    }
    let range = head_l1 + 3.0;
    let step = range / k as f64;
    (-k..=k).map(|j| j as f64 * step).collect()
}

fn structured_candidates(
    input: &PartialIndexVector<f64>,
    in_s: &[(usize, f64)],
    outside: &[usize],
    cfg: &ChowReconConfig,
) -> Result<Vec<CandidateLtf>> {
    let head: Vec<usize> = in_s.iter().map(|e| e.0).chain(outside.iter().copied()).collect();
    let gammas = gamma_grid(input, &head, cfg);
    if gammas.is_empty() {
        return Ok(Vec::new());
    }
    let levels = head_levels(head.len(), cfg);
    let top = (levels.len() - 1) as u32;
    let a = nonincreasing(in_s.len(), top);
    let b = nonincreasing(outside.len(), top);
    let mut out = Vec::new();
    for &g in &gammas {
        for x in &a {
            for y in &b {
                let v: Vec<f64> = x
                    .iter()
                    .zip(in_s)
                    .map(|(m, (_, f))| {
                        let v = levels[*m as usize];
                        if *f < 0.0 {
                            -v
                        } else {
                            v
                        }
                    })
                    .chain(y.iter().map(|m| levels[*m as usize]))
                    .collect();
                let l1: f64 = v.iter().map(|t| t.abs()).sum();
                for theta in theta_grid(l1, cfg) {
                    if let Some(c) = build_structured_candidate(input, &head, &v, g, theta)? {
                        out.push(c);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One enumeration step: a guess of `|H|` and `|H ∩ S|`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadGuess {
    /// Head positions in S, by decreasing `|f̂|`, with their values.
    pub in_s: Vec<(usize, f64)>,
    /// Head positions outside S.
    pub outside: Vec<usize>,
}

impl HeadGuess {
    pub fn size(&self) -> usize {
        self.in_s.len() + self.outside.len()
    }
}

/// Guesses in order of increasing `|H|`, then decreasing `|H ∩ S|`. `H ∩ S` is
/// the top `|H ∩ S|` positions of S by `|f̂|` among those with `|f̂| ≥ τ²`;
/// `H ∖ S` is the lowest-numbered positions outside S.
pub fn head_guesses(input: &PartialIndexVector<f64>, tau: f64, head_cap: usize) -> Vec<HeadGuess> {
    let n = input.n();
    let (big, _) = split_head_tail(input, tau);
    let mut eligible: Vec<(usize, f64)> = big.iter().map(|&p| (p, input.get(p).unwrap())).collect();
    eligible.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()).then(x.0.cmp(&y.0)));
    let in_s: HashSet<usize> = input.positions().into_iter().collect();
    let free: Vec<usize> = (1..=n).filter(|p| !in_s.contains(p)).collect();
    let mut out = Vec::new();
    for h in 0..=head_cap.min(n) {
        let hi = h.min(eligible.len());
        let lo = h.saturating_sub(free.len());
        if lo > hi {
            continue;
        }
        for hs in (lo..=hi).rev() {
            out.push(HeadGuess {
                in_s: eligible[..hs].to_vec(),
                outside: free[..h - hs].to_vec(),
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reconstruction {
    pub ltf: WeightedLtf<f64>,
    pub certified: bool,
    pub achieved_distance: f64,
    pub candidates_tried: usize,
    pub head_size_guess: usize,
    pub provenance: Provenance,
}

/// Distance of a candidate to the input, exact or sampled.
fn score(
    c: &CandidateLtf,
    input: &PartialIndexVector<f64>,
    positions: &[usize],
    cfg: &ChowReconConfig,
    index: u64,
) -> Result<f64> {
    let values = match cfg.verify_mode {
        VerifyMode::Exact => exact_values(c, positions, cfg.enumeration_cap)?,
        VerifyMode::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(index);
            let (est, _) = chow_estimate::<f64, _, _>(&c.ltf, positions, cfg.eps, cfg.delta, &mut rng)?;
            positions.iter().map(|&p| est.get(p).unwrap_or(0.0)).collect()
        }
    };
    Ok(input
        .entries()
        .iter()
        .zip(values)
        .map(|((_, v), g)| (v - g) * (v - g))
        .sum::<f64>()
        .sqrt())
}

/// Exact Chow values of a candidate; juntas are evaluated on their head only.
fn exact_values(c: &CandidateLtf, positions: &[usize], cap: usize) -> Result<Vec<f64>> {
    if let Provenance::Junta { head } = &c.provenance {
        let small = WeightedLtf::new(
            head.iter().map(|&p| c.ltf.weights()[p - 1]).collect::<Vec<_>>(),
            c.ltf.threshold(),
        );
        if let Ok(small) = small {
            let local: Vec<usize> = (0..=head.len()).collect();
            let vals = chow_at_positions(&small, &local, cap)?;
            return Ok(positions
                .iter()
                .map(|&p| {
                    if p == 0 {
                        vals[0]
                    } else {
                        head.iter().position(|&q| q == p).map_or(0.0, |j| vals[j + 1])
                    }
                })
                .collect());
        }
        // empty head: constant function
        let v = if c.ltf.threshold() <= 0.0 { 1.0 } else { -1.0 };
        return Ok(positions.iter().map(|&p| if p == 0 { v } else { 0.0 }).collect());
    }
    chow_at_positions(&c.ltf, positions, cap)
}

/// Distances of a run of candidates to the input; `first_index` offsets the
/// per-candidate sampling streams.
pub fn candidate_distances(
    candidates: &[CandidateLtf],
    input: &PartialIndexVector<f64>,
    cfg: &ChowReconConfig,
    first_index: u64,
) -> Result<Vec<f64>> {
    let positions = input.positions();
    candidates
        .par_iter()
        .enumerate()
        .map(|(j, c)| score(c, input, &positions, cfg, first_index + j as u64))
        .collect()
}

/// First candidate (by index) within `accept_factor · eps` of the input, with
/// its distance.
pub fn verify_candidates(
    candidates: &[CandidateLtf],
    input: &PartialIndexVector<f64>,
    cfg: &ChowReconConfig,
) -> Result<Option<(usize, f64)>> {
    let limit = cfg.threshold();
    for (b, batch) in candidates.chunks(cfg.batch_size).enumerate() {
        let base = b * cfg.batch_size;
        let d = candidate_distances(batch, input, cfg, base as u64)?;
        if let Some(j) = d.iter().position(|d| *d <= limit) {
            return Ok(Some((base + j, d[j])));
        }
    }
    Ok(None)
}

struct Search<'a> {
    tried: usize,
    best: Option<(f64, CandidateLtf, usize)>,
    input: &'a PartialIndexVector<f64>,
    cfg: &'a ChowReconConfig,
}

impl Search<'_> {
    /// Scores candidates in deterministic batches; returns the first passing
    /// one in enumeration order.
    fn run(&mut self, candidates: Vec<CandidateLtf>, head_size: usize) -> Result<Option<Reconstruction>> {
        let limit = self.cfg.threshold();
        for batch in candidates.chunks(self.cfg.batch_size) {
            if self.tried >= self.cfg.max_candidates {
                return Ok(None);
            }
            let room = self.cfg.max_candidates - self.tried;
            let batch = &batch[..batch.len().min(room)];
            let scores = candidate_distances(batch, self.input, self.cfg, self.tried as u64)?;
            for (j, (c, d)) in batch.iter().zip(&scores).enumerate() {
                if *d <= limit {
                    self.tried += j + 1;
                    return Ok(Some(Reconstruction {
                        ltf: c.ltf.clone(),
                        certified: true,
                        achieved_distance: *d,
                        candidates_tried: self.tried,
                        head_size_guess: head_size,
                        provenance: c.provenance.clone(),
                    }));
                }
                if self.best.as_ref().is_none_or(|b| *d < b.0) {
                    self.best = Some((*d, c.clone(), head_size));
                }
            }
            self.tried += batch.len();
        }
        Ok(None)
    }
}

/// Reconstructs an LTF whose Chow parameters on the input positions are
/// within `accept_factor · eps` of the given values.
///
/// When nothing passes, the best-scoring candidate is returned with
/// `certified = false`.
pub fn reconstruct_partial_chow(
    input: &PartialIndexVector<f64>,
    cfg: &ChowReconConfig,
) -> Result<Reconstruction> {
    cfg.validate()?;
    if !matches!(input.kind(), IndexKind::Chow) {
        return Err(invalid("input", "expected Chow parameters"));
    }
    let n = input.n();
    if n == 0 {
        return Err(Error::InvalidWeights("n must be at least 1".into()));
    }
    if cfg.verify_mode == VerifyMode::Exact {
        check_cap(n, cfg.enumeration_cap)?;
    }
    let mut search = Search {
        tried: 0,
        best: None,
        input,
        cfg,
    };
    for guess in head_guesses(input, cfg.tau, cfg.head_cap) {
        let h = guess.size();
        let juntas = consistent_juntas(n, &guess.in_s, &guess.outside, cfg.junta_weight_bound);
        if let Some(r) = search.run(juntas, h)? {
            return finish(r, input, cfg);
        }
        let structured = structured_candidates(input, &guess.in_s, &guess.outside, cfg)?;
        if let Some(r) = search.run(structured, h)? {
            return finish(r, input, cfg);
        }
        if search.tried >= cfg.max_candidates {
            break;
        }
    }
    let (d, c, h) = search
        .best
        .take()
        .ok_or_else(|| invalid("max_candidates", "no candidate was evaluated"))?;
    finish(
        Reconstruction {
            ltf: c.ltf,
            certified: false,
            achieved_distance: d,
            candidates_tried: search.tried,
            head_size_guess: h,
            provenance: c.provenance,
        },
        input,
        cfg,
    )
}

/// Replaces a sampled distance by the exact one when enumeration is possible.
fn finish(
    mut r: Reconstruction,
    input: &PartialIndexVector<f64>,
    cfg: &ChowReconConfig,
) -> Result<Reconstruction> {
    if cfg.verify_mode == VerifyMode::Sampled && input.n() <= cfg.enumeration_cap {
        let vals = chow_at_positions(&r.ltf, &input.positions(), cfg.enumeration_cap)?;
        r.achieved_distance = input
            .entries()
            .iter()
            .zip(vals)
            .map(|((_, v), g)| (v - g) * (v - g))
            .sum::<f64>()
            .sqrt();
    }
    Ok(r)
}
