//! Spectral series of geodesic balls and their closed forms.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eigensolve::{radial_spectrum, SolveConfig};
use crate::error::{domain, Error, Result};
use crate::model::BallGeometry;

/// How often each `ν_l`-eigenvalue is counted in whole-spectrum sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    /// `C(m-1+l, l) - C(m-2+l, l-1)`: 1 on the circle, `l+1` on the 2-sphere.
    Paper,
    /// Spherical-harmonic dimension `C(m-1+l, l) - C(m-3+l, l-2)`.
    Sphere,
    /// Every `ν_l`-spectrum counted once.
    None,
}

/// A partial sum next to its closed form, if one is known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub closed_form: Option<f64>,
    pub partial_sum: f64,
    pub terms_used: usize,
    /// Upper bound on the omitted terms; infinite for a divergent series.
    pub tail_bound: f64,
    pub diverges: bool,
}

impl SeriesReport {
    /// `closed - partial`, when the closed form is known.
    pub fn gap(&self) -> Option<f64> {
        self.closed_form.map(|c| c - self.partial_sum)
    }

    /// `partial <= closed <= partial + tail`.
    pub fn brackets_closed_form(&self) -> bool {
        match self.closed_form {
            Some(c) => self.partial_sum <= c && c <= self.partial_sum + self.tail_bound,
            None => false,
        }
    }
}

/// `Σ_{i<=K} 1/λ_i^rad` against `∫_0^r V/S`.
pub fn radial_harmonic_identity(
    geom: &BallGeometry,
    count: usize,
    config: &SolveConfig,
) -> Result<SeriesReport> {
    let pairs = radial_spectrum(geom, count, config)?;
    let partial: f64 = pairs.iter().map(|p| 1.0 / p.lambda).sum();
    let closed = geom.vs_integral();
    if partial >= closed {
        return Err(Error::Consistency(format!(
            "partial sum {partial} of 1/λ reaches the isoperimetric integral {closed}"
        )));
    }
    Ok(SeriesReport {
        closed_form: Some(closed),
        partial_sum: partial,
        terms_used: count,
        tail_bound: closed - partial,
        diverges: false,
    })
}

/// `Σ_i 1/λ_{l,i}^p` over the `ν_l`-spectrum of the Euclidean ball, `p ∈ {1, 2}`.
pub fn euclid_sum_l(m: usize, r: f64, l: usize, power: u32) -> Result<f64> {
    if m < 2 {
        return domain(format!("dimension must be >= 2, got {m}"));
    }
    let a = (2 * l + m) as f64;
    match power {
        1 => Ok(r * r / (2.0 * a)),
        2 => Ok(r.powi(4) / (2.0 * a * a * (a + 2.0))),
        _ => domain(format!("power must be 1 or 2, got {power}")),
    }
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, j| acc * (n - j) as u128 / (j + 1) as u128)
}

/// Multiplicity attached to each eigenvalue of the `ν_l`-spectrum.
pub fn delta_multiplicity(l: usize, m: usize, mode: Multiplicity) -> u64 {
    let (l, m) = (l as i64, m as i64);
    let d = match mode {
        Multiplicity::Paper => binomial(m - 1 + l, l) - binomial(m - 2 + l, l - 1),
        Multiplicity::Sphere => binomial(m - 1 + l, l) - binomial(m - 3 + l, l - 2),
        Multiplicity::None => 1,
    };
    d as u64
}

fn closed_sum_sq(m: usize, mode: Multiplicity) -> Option<f64> {
    let pi2 = PI * PI;
    match (m, mode) {
        (2, Multiplicity::Paper | Multiplicity::None) => Some((pi2 - 6.0) / 96.0),
        (2, Multiplicity::Sphere) => Some(pi2 / 48.0 - 5.0 / 32.0),
        (3, Multiplicity::Paper) => Some((12.0 - pi2) / 64.0),
        (3, Multiplicity::Sphere) => Some(2.0 / 3.0 - pi2 / 16.0),
        (3, Multiplicity::None) => Some(pi2 / 32.0 - 7.0 / 24.0),
        _ => None,
    }
}

/// Bound on `Σ_{l>lmax} δ(l) r⁴/(2(2l+m)²(2l+m+2))` by the integral of a
/// decreasing majorant over `[lmax, ∞)`.
pub fn whole_spectrum_tail(m: usize, r: f64, mode: Multiplicity, lmax: usize) -> f64 {
    let r4 = r.powi(4);
    let a = (2 * lmax + m) as f64;
    match (m, mode) {
        // summand <= r⁴/(2(2l+m)³)
        (_, Multiplicity::None) | (2, Multiplicity::Paper) => r4 / (8.0 * a * a),
        (2, Multiplicity::Sphere) => r4 / (4.0 * a * a),
        // (l+1)/(2l+3) <= 1/2: summand <= r⁴/(4(2l+3)²)
        (3, Multiplicity::Paper) => r4 / (8.0 * a),
        // (2l+1)/(2l+3) <= 1: summand <= r⁴/(2(2l+3)²)
        (3, Multiplicity::Sphere) => r4 / (4.0 * a),
        _ => f64::INFINITY,
    }
}

/// `Σ_{l<=lmax} δ(l,m) r⁴/(2(2l+m)²(2l+m+2))`, the whole-spectrum `Σ 1/λ²`.
///
/// With multiplicity the series diverges for `m >= 4`; the report then has no
/// closed form, an infinite tail and `diverges` set.
pub fn whole_spectrum_sum_sq(
    m: usize,
    r: f64,
    mode: Multiplicity,
    lmax: usize,
) -> Result<SeriesReport> {
    if m < 2 {
        return domain(format!("dimension must be >= 2, got {m}"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let mut partial = 0.0;
    for l in 0..=lmax {
        partial += delta_multiplicity(l, m, mode) as f64 * euclid_sum_l(m, r, l, 2)?;
    }
    let tail = whole_spectrum_tail(m, r, mode, lmax);
    Ok(SeriesReport {
        closed_form: closed_sum_sq(m, mode).map(|c| c * r.powi(4)),
        partial_sum: partial,
        terms_used: lmax + 1,
        tail_bound: tail,
        diverges: tail.is_infinite(),
    })
}

/// `λ_{l,k} >= 2k(m+2l)/r²` on the Euclidean ball.
pub fn lower_bound_cor22(m: usize, r: f64, l: usize, k: usize) -> Result<f64> {
    if k < 1 {
        return domain("eigenvalue index k must be at least 1");
    }
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("radius must be positive, got {r}"));
    }
    Ok(2.0 * k as f64 * (m + 2 * l) as f64 / (r * r))
}
