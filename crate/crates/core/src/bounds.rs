//! Bounds on `Σ 1/λ_k²` for extrinsic balls of proper minimal submanifolds of
//! Euclidean space, in dimensions 2 and 3.
//!
//! The volume constant here is the volume of the unit ball (`π`, `4π/3`), not
//! the unit-sphere area used by the model-manifold code.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::unit_ball_volume;

/// Number of terms summed directly by [`zeta`].
pub const ZETA_TERMS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsInput {
    pub m: usize,
    pub r: f64,
    pub vol: Option<f64>,
    /// Sum of geometric indices (m = 2) or number of ends (m = 3).
    pub ends: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub a_m: f64,
    pub b_m: f64,
    pub zeta: f64,
    /// Volume of the unit `m`-ball.
    pub unit_ball_volume: f64,
    pub warnings: Vec<String>,
}

impl BoundsReport {
    pub fn contains(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }
}

/// `A_m = (1 + m/(4+m) - 2m/(2+m)) / (4m²)`.
pub fn a_constant(m: usize) -> f64 {
    let m = m as f64;
    (1.0 + m / (4.0 + m) - 2.0 * m / (2.0 + m)) / (4.0 * m * m)
}

/// `B_m = e^{4/m} / (16π²)`.
pub fn b_constant(m: usize) -> f64 {
    (4.0 / m as f64).exp() / (16.0 * PI * PI)
}

fn check_dim(m: usize) -> Result<()> {
    if m == 2 || m == 3 {
        Ok(())
    } else {
        domain(format!(
            "Σ 1/λ² is only finite for m ∈ {{2, 3}}, got m = {m}"
        ))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive, got {x}"))
    }
}

/// Bounds from the volume of the extrinsic ball.
pub fn thm_mark_bounds(m: usize, r: f64, vol: f64) -> Result<BoundsReport> {
    check_dim(m)?;
    check_positive("radius", r)?;
    check_positive("volume", vol)?;
    let omega = unit_ball_volume(m);
    let (a, b, z) = (a_constant(m), b_constant(m), zeta(4.0 / m as f64)?);
    let rm = r.powi(m as i32);
    let r4 = r.powi(4);
    let mut warnings = Vec::new();
    if vol < omega * rm * (1.0 - 1e-9) {
        warnings.push(format!(
            "volume {vol} is below the flat value {}; a minimal submanifold cannot have it",
            omega * rm
        ));
    }
    Ok(BoundsReport {
        lower: a * omega * (rm / vol) * r4,
        upper: b * z * (vol / rm).powf(4.0 / m as f64) * r4,
        a_m: a,
        b_m: b,
        zeta: z,
        unit_ball_volume: omega,
        warnings,
    })
}

/// Bounds in terms of the number of ends (or total geometric index).
pub fn ends_bounds(m: usize, r: f64, ends: f64) -> Result<BoundsReport> {
    check_dim(m)?;
    check_positive("radius", r)?;
    if !(ends >= 1.0 && ends.is_finite()) {
        return domain(format!("ends must be at least 1, got {ends}"));
    }
    let omega = unit_ball_volume(m);
    let (a, b, z) = (a_constant(m), b_constant(m), zeta(4.0 / m as f64)?);
    let r4 = r.powi(4);
    Ok(BoundsReport {
        lower: a / ends * r4,
        upper: b * z * (omega * ends).powf(4.0 / m as f64) * r4,
        a_m: a,
        b_m: b,
        zeta: z,
        unit_ball_volume: omega,
        warnings: Vec::new(),
    })
}

/// Dispatches on whichever of `vol` / `ends` is present (volume wins).
pub fn bounds(input: &BoundsInput) -> Result<BoundsReport> {
    match (input.vol, input.ends) {
        (Some(v), _) => thm_mark_bounds(input.m, input.r, v),
        (None, Some(e)) => ends_bounds(input.m, input.r, e),
        (None, None) => domain("either a volume or a number of ends is required"),
    }
}

/// `λ_k >= 4π (k/e)^{2/m} / vol^{2/m}`.
pub fn cly_lower_bound(m: usize, vol: f64, k: usize) -> Result<f64> {
    if m < 1 {
        return domain("dimension must be positive");
    }
    check_positive("volume", vol)?;
    if k < 1 {
        return domain("eigenvalue index k must be at least 1");
    }
    let p = 2.0 / m as f64;
    Ok(4.0 * PI * (k as f64 / E).powf(p) / vol.powf(p))
}

/// Riemann zeta for real `s > 1`: a compensated direct sum over `k < 10⁶` plus
/// the Euler–Maclaurin tail from `N = 10⁶`.
pub fn zeta(s: f64) -> Result<f64> {
    if s <= 1.0 || !s.is_finite() {
        return domain(format!("zeta needs s > 1, got {s}"));
    }
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    // smallest terms first; Neumaier compensation
    for k in (1..ZETA_TERMS).rev() {
        let x = (k as f64).powf(-s);
        let t = sum + x;
        comp += if sum.abs() >= x {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    let n = ZETA_TERMS as f64;
    let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
    Ok(sum + comp + tail)
}
