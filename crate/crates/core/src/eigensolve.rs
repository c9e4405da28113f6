//! Power iteration on Green operators, with deflation.
//!
//! Iterating `u <- G(u)` and renormalizing drives any start vector with a
//! nonzero first-mode component towards the first eigenfunction; the ratios
//! `‖G^k f‖ / ‖G^{k+1} f‖` converge to the first eigenvalue. Later eigenvalues
//! come from deflated start vectors `f - λ G(f)`, kept clean by re-projecting
//! off the converged eigenfunctions.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::{EuclidGreenOperator, EuclidKernelL, GreenOperator, RadialGreenOperator};
use crate::model::{BallGeometry, WarpingFunction};
use crate::quadrature::{RadialFunction, RadialGrid, DEFAULT_GRID};
use crate::series::{self, Multiplicity};

/// Numerical knobs shared by every iterative solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveConfig {
    /// Relative change of the ratio that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of grid intervals.
    pub grid: usize,
    pub reproject_every: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            grid: DEFAULT_GRID,
            reproject_every: 1,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Domain(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter < 2 {
            return Err(Error::Domain(format!(
                "max_iter must be at least 2, got {}",
                self.max_iter
            )));
        }
        if self.reproject_every == 0 {
            return Err(Error::Domain("reproject_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// A converged (or best-effort) eigenvalue with its eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    /// Weighted norm 1, sign fixed so the first significant sample is positive.
    pub eigenfunction: RadialFunction,
    /// `‖G(u) - u/λ‖ / ‖u/λ‖`.
    pub residual: f64,
    /// Number of operator applications.
    pub iterations: usize,
    /// Entry `k` is `‖G^k f‖ / ‖G^{k+1} f‖` for the (projected) start vector `f`.
    pub ratio_history: Vec<f64>,
    pub converged: bool,
}

/// One eigenvalue of a Euclidean ball, labelled by its `ν_l`-spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub l: usize,
    /// 1-based index within the `ν_l`-spectrum.
    pub i: usize,
    pub lambda: f64,
    pub multiplicity: u64,
    pub converged: bool,
}

/// Sorted spectrum plus the `Σ 1/λ²` mass that the truncation leaves out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssembledSpectrum {
    pub entries: Vec<SpectrumEntry>,
    /// `Σ_{l<=Lmax} δ(l) Σ_{i>Imax} 1/λ_{l,i}²`, from the closed form per `l`.
    pub tail_i: f64,
    /// Upper bound on `Σ_{l>Lmax} δ(l) Σ_i 1/λ_{l,i}²` (infinite when it diverges).
    pub tail_l: f64,
}

fn project_off(u: &mut RadialFunction, basis: &[EigenPair]) -> Result<()> {
    for b in basis {
        let c = u.weighted_inner(&b.eigenfunction)?;
        u.axpy(-c, &b.eigenfunction)?;
    }
    Ok(())
}

fn fix_sign(u: &mut RadialFunction) {
    let floor = 1e-6 * u.max_abs();
    if let Some(&v) = u.values().iter().find(|v| v.abs() > floor) {
        if v < 0.0 {
            u.scale(-1.0);
        }
    }
}

const STALL_WINDOW: usize = 20;

/// Power iteration of `op` from `f0`, kept orthogonal to `basis`.
///
/// Converged means the ratio changed by less than `tol` (relative), the
/// eigen-residual is at most `100 tol`, and the residual is either below
/// `tol / 100` or has not halved over the last 20 iterations. The ratio error decays like the square
/// of the eigenvector error, so the ratio test alone stops too early; and an
/// eigenfunction that later serves as a deflation basis passes its error on,
/// amplified by `λ_next/λ - 1`, to every residual after it.
pub fn power_iterate(
    op: &impl GreenOperator,
    f0: &RadialFunction,
    config: &SolveConfig,
    basis: &[EigenPair],
) -> Result<EigenPair> {
    config.validate()?;
    crate::quadrature::same_grid(op.grid(), f0.grid())?;
    let start_norm = f0.weighted_norm();
    let mut u = f0.clone();
    project_off(&mut u, basis)?;
    let norm = u.weighted_norm();
    if !(norm.is_finite() && norm > 1e-14 * start_norm && norm > 0.0) {
        return Err(Error::DegenerateStart(format!(
            "start vector has relative norm {:.3e} after projection",
            if start_norm > 0.0 {
                norm / start_norm
            } else {
                0.0
            }
        )));
    }
    u.scale(1.0 / norm);

    let mut history = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    for k in 0..config.max_iter {
        let mut v = op.apply(&u)?;
        let gnorm = v.weighted_norm();
        if !(gnorm > 0.0 && gnorm.is_finite()) {
            return Err(Error::Consistency(format!(
                "operator image has norm {gnorm} at iteration {k}"
            )));
        }
        let ratio = 1.0 / gnorm;
        // ‖G(u) - u/λ‖ / ‖u/λ‖ with ‖u‖ = 1
        let mut diff = v.clone();
        diff.scale(ratio);
        diff.axpy(-1.0, &u)?;
        let residual = diff.weighted_norm();
        residuals.push(residual);
        history.push(ratio);

        let settled = k >= 1 && {
            let prev = history[k - 1];
            (ratio - prev).abs() / ratio < config.tol
        };
        let polished = residual <= 1e-2 * config.tol
            || (k >= STALL_WINDOW && residual > 0.5 * residuals[k - STALL_WINDOW]);
        if settled && residual <= 100.0 * config.tol && polished {
            fix_sign(&mut u);
            return Ok(EigenPair {
                lambda: ratio,
                eigenfunction: u,
                residual,
                iterations: k + 1,
                ratio_history: history,
                converged: true,
            });
        }

        if (k + 1) % config.reproject_every == 0 {
            project_off(&mut v, basis)?;
        }
        let n = v.weighted_norm();
        v.scale(1.0 / n);
        u = v;
    }
    fix_sign(&mut u);
    Ok(EigenPair {
        lambda: *history.last().expect("max_iter >= 2"),
        eigenfunction: u,
        residual: *residuals.last().expect("max_iter >= 2"),
        iterations: config.max_iter,
        ratio_history: history,
        converged: false,
    })
}

/// `f - λ G(f)`: removes the `λ`-eigencomponent of `f`.
pub fn deflate(f: &RadialFunction, lambda: f64, op: &impl GreenOperator) -> Result<RadialFunction> {
    let mut out = op.apply(f)?;
    out.scale(-lambda);
    out.axpy(1.0, f)?;
    Ok(out)
}

/// The first `count` eigenpairs of `op`, each started from the previous start
/// vector deflated by the previous eigenvalue.
pub fn deflated_sequence(
    op: &impl GreenOperator,
    f0: &RadialFunction,
    count: usize,
    config: &SolveConfig,
) -> Result<Vec<EigenPair>> {
    if count == 0 {
        return Err(Error::Domain("eigenvalue count must be at least 1".into()));
    }
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(count);
    let mut f = f0.clone();
    for j in 0..count {
        if let Some(prev) = pairs.last() {
            f = deflate(&f, prev.lambda, op)?;
        }
        let pair = power_iterate(op, &f, config, &pairs)?;
        if let Some(prev) = pairs.last() {
            if pair.lambda <= prev.lambda {
                return Err(Error::Consistency(format!(
                    "eigenvalue {} ({}) does not exceed its predecessor ({})",
                    j + 1,
                    pair.lambda,
                    prev.lambda
                )));
            }
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

/// The first `count` radial eigenvalues of a model ball, starting from `f0 = 1`.
pub fn radial_spectrum(
    geom: &BallGeometry,
    count: usize,
    config: &SolveConfig,
) -> Result<Vec<EigenPair>> {
    config.validate()?;
    let grid = RadialGrid::new(geom.clone(), config.grid)?;
    let op = RadialGreenOperator::new(Arc::clone(&grid));
    deflated_sequence(&op, &RadialFunction::constant(&grid, 1.0), count, config)
}

/// The first `count` eigenvalues of the `ν_l`-spectrum of the Euclidean ball,
/// starting from `t^l (r - t)`.
pub fn l_spectrum_euclid(
    m: usize,
    r: f64,
    l: usize,
    count: usize,
    config: &SolveConfig,
) -> Result<Vec<EigenPair>> {
    config.validate()?;
    let geom = BallGeometry::new(m, r, WarpingFunction::euclidean())?;
    let grid = RadialGrid::new(geom, config.grid)?;
    let op = EuclidGreenOperator::new(EuclidKernelL::new(l, m, r)?, Arc::clone(&grid))?;
    let f0 = RadialFunction::from_fn(&grid, |t| t.powi(l as i32) * (r - t));
    deflated_sequence(&op, &f0, count, config)
}

/// All `λ_{l,i}` with `l <= lmax`, `i <= imax` on the Euclidean ball, sorted by
/// `λ` then `l`, with multiplicities and truncation tails of `Σ δ/λ²`.
pub fn assemble_spectrum(
    m: usize,
    r: f64,
    lmax: usize,
    imax: usize,
    mode: Multiplicity,
    config: &SolveConfig,
) -> Result<AssembledSpectrum> {
    if lmax < 1 || imax < 1 {
        return Err(Error::Domain("lmax and imax must be at least 1".into()));
    }
    let mut entries = Vec::new();
    let mut tail_i = 0.0;
    for l in 0..=lmax {
        let mult = series::delta_multiplicity(l, m, mode);
        let pairs = l_spectrum_euclid(m, r, l, imax, config)?;
        let partial: f64 = pairs.iter().map(|p| p.lambda.powi(-2)).sum();
        tail_i += mult as f64 * (series::euclid_sum_l(m, r, l, 2)? - partial).max(0.0);
        entries.extend(pairs.iter().enumerate().map(|(k, p)| SpectrumEntry {
            l,
            i: k + 1,
            lambda: p.lambda,
            multiplicity: mult,
            converged: p.converged,
        }));
    }
    entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.l.cmp(&b.l)));
    let tail_l = series::whole_spectrum_tail(m, r, mode, lmax);
    Ok(AssembledSpectrum {
        entries,
        tail_i,
        tail_l,
    })
}
