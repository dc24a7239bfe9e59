//! Globally adaptive Gauss–Kronrod (7/15 point) quadrature on a finite
//! interval, for scalar or vector-valued integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights at `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_intervals: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature<V> {
    pub value: V,
    pub error: f64,
    pub intervals: usize,
}

struct Piece<T> {
    a: T,
    b: T,
    value: Vec<T>,
    error: f64,
}

fn kronrod<T: Real>(f: &mut impl FnMut(T) -> Vec<T>, a: T, b: T, dim: usize) -> Piece<T> {
    let half: T = (b - a) / lit(2.0);
    let center: T = (a + b) / lit(2.0);
    let mut k = vec![T::zero(); dim];
    let mut g = vec![T::zero(); dim];
    let mut add = |x: T, wk: f64, wg: Option<f64>, k: &mut Vec<T>, g: &mut Vec<T>| {
        let y = f(x);
        assert_eq!(y.len(), dim, "integrand dimension changed");
        for j in 0..dim {
            k[j] = k[j] + lit::<T>(wk) * y[j];
            if let Some(wg) = wg {
                g[j] = g[j] + lit::<T>(wg) * y[j];
            }
        }
    };
    add(center, WGK[7], Some(WG[3]), &mut k, &mut g);
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let wg = if j % 2 == 1 { Some(WG[j / 2]) } else { None };
        add(center - dx, WGK[j], wg, &mut k, &mut g);
        add(center + dx, WGK[j], wg, &mut k, &mut g);
    }
    let mut error = 0.0f64;
    for j in 0..dim {
        k[j] = k[j] * half;
        g[j] = g[j] * half;
        error = error.max((k[j] - g[j]).abs().to_f64().unwrap());
    }
    Piece {
        a,
        b,
        value: k,
        error,
    }
}

/// Integrates a vector-valued function over `[a, b]`. The error is measured
/// in the max norm across components.
pub fn integrate_vec<T: Real>(
    mut f: impl FnMut(T) -> Vec<T>,
    dim: usize,
    a: T,
    b: T,
    cfg: &QuadratureConfig,
) -> Result<Quadrature<Vec<T>>> {
    let mut pieces = vec![kronrod(&mut f, a, b, dim)];
    loop {
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        let value: Vec<T> = (0..dim)
            .map(|j| pieces.iter().map(|p| p.value[j]).sum())
            .collect();
        let scale = value
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs().to_f64().unwrap()));
        if error <= cfg.abs_tol.max(cfg.rel_tol * scale) {
            return Ok(Quadrature {
                value,
                error,
                intervals: pieces.len(),
            });
        }
        if pieces.len() >= cfg.max_intervals || !error.is_finite() {
            return Err(Error::Quadrature {
                error,
                intervals: pieces.len(),
            });
        }
        let worst = (0..pieces.len())
            .max_by(|&i, &j| pieces[i].error.total_cmp(&pieces[j].error))
            .expect("nonempty");
        let piece = pieces.swap_remove(worst);
        let mid = (piece.a + piece.b) / lit(2.0);
        if !(mid > piece.a && mid < piece.b) {
            return Err(Error::Quadrature {
                error,
                intervals: pieces.len() + 1,
            });
        }
        pieces.push(kronrod(&mut f, piece.a, mid, dim));
        pieces.push(kronrod(&mut f, mid, piece.b, dim));
    }
}

pub fn integrate<T: Real>(
    mut f: impl FnMut(T) -> T,
    a: T,
    b: T,
    cfg: &QuadratureConfig,
) -> Result<Quadrature<T>> {
    let q = integrate_vec(|x| vec![f(x)], 1, a, b, cfg)?;
    Ok(Quadrature {
        value: q.value[0],
        error: q.error,
        intervals: q.intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x: f64| x.powi(10), -1.0, 2.0, &QuadratureConfig::default()).unwrap();
        assert!((q.value - (2f64.powi(11) + 1.0) / 11.0).abs() < 1e-11);
        assert_eq!(q.intervals, 1);
    }

    #[test]
    fn log_density_on_truncated_interval() {
        let d = 1e-4;
        let q = integrate(
            |p: f64| 1.0 / p + 1.0 / (1.0 - p),
            d,
            1.0 - d,
            &QuadratureConfig::default(),
        )
        .unwrap();
        let exact = 2.0 * ((1.0 - d) / d).ln();
        assert!((q.value - exact).abs() < 1e-10);
    }

    #[test]
    fn vector_integrand() {
        let q = integrate_vec(
            |x: f64| vec![x.sin(), x.cos()],
            2,
            0.0,
            std::f64::consts::PI,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((q.value[0] - 2.0).abs() < 1e-10);
        assert!(q.value[1].abs() < 1e-10);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig {
            max_intervals: 3,
            ..Default::default()
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &cfg);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
