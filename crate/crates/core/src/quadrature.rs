//! Radial grids, weighted inner products and cumulative integrals.
//!
//! Everything here works on a uniform grid `0 = t_0 < … < t_N = r` with `N`
//! even. Definite integrals use composite Simpson; cumulative integrals use
//! Simpson on even prefixes and a three-node quadratic for the last interval of
//! odd prefixes. All sums run left to right so results do not depend on how
//! callers schedule work.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::model::BallGeometry;

/// Default number of grid intervals.
pub const DEFAULT_GRID: usize = 4096;
/// Smallest accepted number of grid intervals.
pub const MIN_GRID: usize = 64;

/// Uniform grid on `[0, r]` with Simpson measure weights for `dμ = ω_m h^{m-1} dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    geom: BallGeometry,
    n: usize,
    step: f64,
    nodes: Vec<f64>,
    /// `ω_m h^{m-1}(t_i)`.
    density: Vec<f64>,
    /// Plain composite Simpson weights for `dt`.
    simpson: Vec<f64>,
    /// `simpson[i] * density[i]`.
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(geom: BallGeometry, n: usize) -> Result<Arc<Self>> {
        if n < MIN_GRID || !n.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "grid size must be an even integer >= {MIN_GRID}, got {n}"
            )));
        }
        let r = geom.radius();
        let step = r / n as f64;
        let nodes: Vec<f64> = (0..=n)
            .map(|i| if i == n { r } else { i as f64 * step })
            .collect();
        let density: Vec<f64> = nodes.iter().map(|&t| geom.density(t)).collect();
        let simpson = simpson_weights(n, step);
        let weights = simpson.iter().zip(&density).map(|(s, d)| s * d).collect();
        Ok(Arc::new(Self {
            geom,
            n,
            step,
            nodes,
            density,
            simpson,
            weights,
        }))
    }

    pub fn geometry(&self) -> &BallGeometry {
        &self.geom
    }

    /// Number of intervals `N` (the grid has `N + 1` nodes).
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn radius(&self) -> f64 {
        self.geom.radius()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Measure weights `w_i`; `Σ w_i f(t_i) ≈ ∫ f dμ`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Plain Simpson weights for `dt`.
    pub fn simpson_weights(&self) -> &[f64] {
        &self.simpson
    }

    /// Total measure `Σ w_i`, an approximation of the ball volume.
    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫_0^r V/S ds` computed from grid quantities only: a weighted cumulative
    /// integral for `V` and Simpson for the outer integral.
    pub fn vs_integral(&self) -> f64 {
        let vol = cumulative(&self.density, self.step);
        let ratio: Vec<f64> = vol
            .iter()
            .zip(&self.density)
            .enumerate()
            .map(|(i, (v, d))| if i == 0 { 0.0 } else { v / d })
            .collect();
        dot(&self.simpson, &ratio)
    }
}

/// Samples of a radial function on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn constant(grid: &Arc<RadialGrid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn check_same_grid(&self, other: &RadialFunction) -> Result<()> {
        same_grid(&self.grid, &other.grid)
    }

    /// Simpson approximation of `∫_0^r f g dμ`.
    pub fn weighted_inner(&self, other: &RadialFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(&self.values)
            .zip(&other.values)
            .map(|((w, a), b)| w * a * b)
            .sum())
    }

    pub fn weighted_norm(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, a)| w * a * a)
            .sum::<f64>()
            .sqrt()
    }

    /// `∫_0^r f dμ`.
    pub fn weighted_integral(&self) -> f64 {
        dot(self.grid.weights(), &self.values)
    }

    /// Node `i` holds `∫_0^{t_i} f` against `dμ` (`weighted`) or `dt`.
    pub fn cumulative_integral(&self, weighted: bool) -> RadialFunction {
        let out = if weighted {
            let geom = self.grid.geometry();
            cumulative_weighted(&self.values, |t| geom.density(t), self.grid.step())
        } else {
            cumulative(&self.values, self.grid.step())
        };
        self.with_values(out)
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &RadialFunction) -> Result<()> {
        self.check_same_grid(other)?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(s, o)| *s += a * o);
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn same_grid(a: &Arc<RadialGrid>, b: &Arc<RadialGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::Shape(
            "radial functions live on different grids".into(),
        ))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Composite Simpson weights for `n` (even) intervals of width `h`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    debug_assert!(n.is_multiple_of(2) && n >= 2);
    let mut w = vec![0.0; n + 1];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = if i == 0 || i == n {
            h / 3.0
        } else if i % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    w
}

/// Cumulative integral from the left: `out[i] ≈ ∫_{t_0}^{t_i} f`.
///
/// Even prefixes are composite Simpson. Odd prefixes add the last interval
/// integrated under the quadratic through the last three nodes (nodes 0, 1, 2
/// for the first interval).
pub fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    // the even-node running sum is compensated: callers take second differences
    // of the result, which would otherwise amplify its rounding by 1/h²
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for i in 2..n {
        out[i] = if i % 2 == 0 {
            let y = h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            sum
        } else {
            out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i])
        };
    }
    out
}

/// Cumulative integral of `w(t) f(t)` from 0, with `f` sampled on the nodes.
///
/// When `w` vanishes to high order at 0 the plain rule is accurate in absolute
/// terms but not relative to `∫_0^t w`, which matters once the result is divided
/// by `w`. Over the first few intervals `w` is therefore integrated exactly
/// (Gauss–Legendre) against a local quadratic interpolant of `f`.
pub fn cumulative_weighted(f: &[f64], w: impl Fn(f64) -> f64, h: f64) -> Vec<f64> {
    const HEAD: usize = 32;
    let n = f.len();
    let g: Vec<f64> = f
        .iter()
        .enumerate()
        .map(|(i, v)| v * w(i as f64 * h))
        .collect();
    let mut out = cumulative(&g, h);
    if n < 4 {
        return out;
    }
    let head = HEAD.min((n - 3) & !1);
    let plain = out[head];
    for i in 1..=head {
        // quadratic through nodes i-1, i, i+1, in the local variable s = t - t_{i-1}
        let (a, b, c) = (f[i - 1], f[i], f[i + 1]);
        let c1 = (-3.0 * a + 4.0 * b - c) / (2.0 * h);
        let c2 = (a - 2.0 * b + c) / (2.0 * h * h);
        let t0 = (i - 1) as f64 * h;
        let p = |t: f64| {
            let s = t - t0;
            w(t) * (a + s * (c1 + s * c2))
        };
        out[i] = out[i - 1] + gl_panel(&p, t0, t0 + h);
    }
    let delta = out[head] - plain;
    out[head + 1..].iter_mut().for_each(|v| *v += delta);
    out
}

/// Cumulative integral from the right: `out[i] ≈ ∫_{t_i}^{t_N} f`.
///
/// `out[i]` depends only on samples at nodes `>= i`, so an undefined value at
/// node 0 only affects `out[0]`.
pub fn cumulative_from_right(f: &[f64], h: f64) -> Vec<f64> {
    let rev: Vec<f64> = f.iter().rev().copied().collect();
    let mut out = cumulative(&rev, h);
    out.reverse();
    out
}

const GL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[order - 1 - i] = w[i];
    }
    (x, w)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// One 16-point Gauss–Legendre panel on `[a, b]`.
pub(crate) fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(xi, wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Composite 16-point Gauss–Legendre over `panels` equal panels.
pub fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == panels { b } else { lo + width };
            gl_panel(&f, lo, hi)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WarpingFunction;
    use std::f64::consts::PI;

    fn euclid_grid(m: usize, r: f64, n: usize) -> Arc<RadialGrid> {
        let geom = BallGeometry::new(m, r, WarpingFunction::euclidean()).unwrap();
        RadialGrid::new(geom, n).unwrap()
    }

    #[test]
    fn rejects_odd_or_small_grids() {
        let geom = BallGeometry::new(2, 1.0, WarpingFunction::euclidean()).unwrap();
        assert!(RadialGrid::new(geom.clone(), 63).is_err());
        assert!(RadialGrid::new(geom.clone(), 62).is_err());
        assert!(RadialGrid::new(geom, 64).is_ok());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let p30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((p30 - 2.0 / 31.0).abs() < 1e-14);
        let v = gl_integrate(|t| t.exp(), 0.0, 1.0, 3);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn inner_product_examples() {
        let g = euclid_grid(2, 1.0, 256);
        let one = RadialFunction::constant(&g, 1.0);
        let zero = RadialFunction::zeros(&g);
        let t = RadialFunction::from_fn(&g, |t| t);
        assert!((one.weighted_inner(&one).unwrap() - PI).abs() < 1e-12);
        assert_eq!(one.weighted_inner(&zero).unwrap(), 0.0);
        assert!((t.weighted_inner(&t).unwrap() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        let g2 = euclid_grid(2, 1.0, 128);
        let g3 = euclid_grid(3, 1.0, 128);
        assert_eq!(RadialFunction::zeros(&g2).weighted_norm(), 0.0);
        assert!((RadialFunction::constant(&g2, 1.0).weighted_norm() - PI.sqrt()).abs() < 1e-12);
        assert!(
            (RadialFunction::constant(&g3, 1.0).weighted_norm() - (4.0 * PI / 3.0).sqrt()).abs()
                < 1e-12
        );
    }

    #[test]
    fn grid_mismatch_is_shape_error() {
        let a = euclid_grid(2, 1.0, 128);
        let b = euclid_grid(2, 1.0, 256);
        let fa = RadialFunction::constant(&a, 1.0);
        let fb = RadialFunction::constant(&b, 1.0);
        assert!(matches!(fa.weighted_inner(&fb), Err(Error::Shape(_))));
        // Structurally identical grids built separately are compatible.
        let c = euclid_grid(2, 1.0, 128);
        let fc = RadialFunction::constant(&c, 2.0);
        assert!((fa.weighted_inner(&fc).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn cumulative_examples() {
        let g = euclid_grid(2, 1.0, 128);
        let one = RadialFunction::constant(&g, 1.0);
        let t = RadialFunction::from_fn(&g, |t| t);
        let c1 = one.cumulative_integral(false);
        let ct = t.cumulative_integral(false);
        let cw = one.cumulative_integral(true);
        for (i, &x) in g.nodes().iter().enumerate() {
            assert!((c1.values()[i] - x).abs() < 1e-12);
            assert!((ct.values()[i] - x * x / 2.0).abs() < 1e-10);
            assert!((cw.values()[i] - PI * x * x).abs() < 1e-10);
        }
        assert_eq!(c1.values()[0], 0.0);
    }

    #[test]
    fn cumulative_from_right_matches_total_minus_left() {
        let h = 0.01;
        let f: Vec<f64> = (0..=100).map(|i| ((i as f64) * h).powi(2)).collect();
        let right = cumulative_from_right(&f, h);
        for (i, v) in right.iter().enumerate() {
            let x = i as f64 * h;
            assert!((v - (1.0 - x.powi(3)) / 3.0).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn polynomial_exactness_weighted() {
        for m in [2usize, 3] {
            let g = euclid_grid(m, 1.0, 1024);
            let omega = g.geometry().sphere_area();
            for k in 0..=3 {
                let f = RadialFunction::from_fn(&g, |t| t.powi(k));
                let exact = omega / (k as f64 + m as f64);
                let got = f.weighted_integral();
                // Simpson is exact through total degree 3; t^3 on the 3-ball is degree 5.
                let tol = if k as usize + m <= 5 { 1e-12 } else { 2e-12 };
                assert!(((got - exact) / exact).abs() < tol, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn weights_are_nonnegative_and_sum_to_volume() {
        for warp in [
            WarpingFunction::euclidean(),
            WarpingFunction::hyperbolic(1.0).unwrap(),
            WarpingFunction::spherical(1.0).unwrap(),
            WarpingFunction::cubic_exp(),
        ] {
            for m in [2usize, 3, 4] {
                let geom = BallGeometry::new(m, 1.0, warp.clone()).unwrap();
                let vol = geom.volume(1.0).unwrap();
                let g = RadialGrid::new(geom, 4096).unwrap();
                assert!(g.weights().iter().all(|&w| w >= 0.0));
                assert!(((g.total_measure() - vol) / vol).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn grid_vs_integral_converges_at_fourth_order() {
        let geom = BallGeometry::new(2, 1.0, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap();
        let exact = geom.vs_integral();
        let errs: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&n| (RadialGrid::new(geom.clone(), n).unwrap().vs_integral() - exact).abs())
            .collect();
        assert!(errs[0] / errs[1] >= 8.0, "{errs:?}");
        assert!(errs[1] / errs[2] >= 8.0, "{errs:?}");
    }
}
