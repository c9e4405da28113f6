//! Model-manifold geometry.
//!
//! A model manifold is `[0, R_h) × S^{m-1}` with metric `dt² + h(t)² dθ²`.
//! Every radial quantity of a geodesic ball `B(o, r)` is expressed through the
//! warping function `h`: the volume `V(s) = ω_m ∫_0^s h^{m-1}`, the boundary
//! area `S(s) = ω_m h^{m-1}(s)` and the isoperimetric integral `∫_0^r V/S`.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature::{gl_integrate, gl_panel};

/// Minimum number of rows in a tabulated warping.
pub const MIN_TABLE_ROWS: usize = 16;

/// Panels of the composite Gauss–Legendre rule used for `V` and `∫ V/S`.
const VOLUME_PANELS: usize = 32;
const VS_PANELS: usize = 64;
/// Geometric refinement levels toward the upper limit in `V(s)/S(s)`.
const RATIO_LEVELS: i32 = 52;

/// Tabulated profile interpolated by a monotone (Fritsch–Carlson) cubic.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    t: Vec<f64>,
    h: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    pub fn new(t: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if t.len() != h.len() {
            return Err(Error::Input("t and h columns differ in length".into()));
        }
        if t.len() < MIN_TABLE_ROWS {
            return Err(Error::Input(format!(
                "tabulated warping needs at least {MIN_TABLE_ROWS} rows, got {}",
                t.len()
            )));
        }
        if t.iter().chain(&h).any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite value in warping table".into()));
        }
        if t[0] != 0.0 {
            return Err(Error::Input("warping table must start at t = 0".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("t must be strictly increasing".into()));
        }
        if h[0].abs() > 1e-12 {
            return Err(Error::Input(format!("h(0) must vanish, got {}", h[0])));
        }
        let slope0 = (h[1] - h[0]) / (t[1] - t[0]);
        if (slope0 - 1.0).abs() > 1e-6 {
            return Err(Error::Input(format!(
                "h'(0) must be 1, divided difference gives {slope0}"
            )));
        }
        if let Some(i) = h.iter().skip(1).position(|&v| v <= 0.0) {
            return Err(Error::Input(format!(
                "h must be positive away from 0 (row {})",
                i + 2
            )));
        }
        let slopes = pchip_slopes(&t, &h);
        Ok(Self { t, h, slopes })
    }

    /// Parses CSV with header `t,h`.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Input(format!("bad CSV header: {e}")))?
            .clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "h" {
            return Err(Error::Input(format!(
                "expected header `t,h`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut t, mut h) = (Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Input(format!("row {}: {e}", row + 2)))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Input(format!("row {}: missing column", row + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("row {}: {e}", row + 2)))
            };
            t.push(parse(0)?);
            h.push(parse(1)?);
        }
        Self::new(t, h)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file =
            std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn last_node(&self) -> f64 {
        *self.t.last().expect("table has rows")
    }

    fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= 0.0 && x <= self.last_node()) {
            return None;
        }
        let k = self.t.partition_point(|&v| v <= x);
        Some(k.saturating_sub(1).min(self.t.len() - 2))
    }

    fn eval(&self, x: f64) -> f64 {
        let Some(k) = self.locate(x) else {
            return f64::NAN;
        };
        let dx = self.t[k + 1] - self.t[k];
        let s = (x - self.t[k]) / dx;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.h[k]
            + h10 * dx * self.slopes[k]
            + h01 * self.h[k + 1]
            + h11 * dx * self.slopes[k + 1]
    }

    fn eval_derivative(&self, x: f64) -> f64 {
        let Some(k) = self.locate(x) else {
            return f64::NAN;
        };
        let dx = self.t[k + 1] - self.t[k];
        let s = (x - self.t[k]) / dx;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / dx;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / dx;
        let d11 = 3.0 * s2 - 2.0 * s;
        d00 * self.h[k] + d10 * self.slopes[k] + d01 * self.h[k + 1] + d11 * self.slopes[k + 1]
    }
}

fn pchip_slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let dx: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / dx[k]).collect();
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * dx[k] + dx[k - 1];
            let w2 = dx[k] + 2.0 * dx[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, m0: f64, m1: f64| -> f64 {
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() {
            0.0
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            d
        }
    };
    d[0] = end(dx[0], dx[1], delta[0], delta[1]);
    d[n - 1] = end(dx[n - 2], dx[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// The shape of the warping function.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `h(t) = t`.
    Euclidean,
    /// `h(t) = sinh(√κ t)/√κ`.
    Hyperbolic { curvature: f64 },
    /// `h(t) = sin(√κ t)/√κ`, valid on `[0, π/√κ)`.
    Spherical { curvature: f64 },
    /// `h(t) = t·exp(t³)`, a stochastically incomplete model.
    CubicExp,
    /// User-supplied samples of `h`.
    Tabulated(Table),
}

/// Warping function `h` of a model manifold, with `h(0) = 0`, `h'(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingFunction {
    family: Family,
}

impl WarpingFunction {
    pub fn euclidean() -> Self {
        Self {
            family: Family::Euclidean,
        }
    }

    pub fn hyperbolic(curvature: f64) -> Result<Self> {
        check_curvature(curvature)?;
        Ok(Self {
            family: Family::Hyperbolic { curvature },
        })
    }

    pub fn spherical(curvature: f64) -> Result<Self> {
        check_curvature(curvature)?;
        Ok(Self {
            family: Family::Spherical { curvature },
        })
    }

    pub fn cubic_exp() -> Self {
        Self {
            family: Family::CubicExp,
        }
    }

    pub fn tabulated(table: Table) -> Self {
        Self {
            family: Family::Tabulated(table),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Short lowercase name used in reports.
    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Euclidean => "euclidean",
            Family::Hyperbolic { .. } => "hyperbolic",
            Family::Spherical { .. } => "spherical",
            Family::CubicExp => "cubicexp",
            Family::Tabulated(_) => "custom",
        }
    }

    pub fn curvature(&self) -> Option<f64> {
        match self.family {
            Family::Hyperbolic { curvature } | Family::Spherical { curvature } => Some(curvature),
            _ => None,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.family, Family::Euclidean)
    }

    /// `R_h`: `h > 0` on `(0, R_h)`. Tabulated profiles end at their last node.
    pub fn validity_radius(&self) -> f64 {
        match &self.family {
            Family::Spherical { curvature } => PI / curvature.sqrt(),
            Family::Tabulated(tab) => tab.last_node(),
            _ => f64::INFINITY,
        }
    }

    /// `h(t)`. Tabulated profiles return NaN outside their table.
    pub fn h(&self, t: f64) -> f64 {
        match &self.family {
            Family::Euclidean => t,
            Family::Hyperbolic { curvature } => {
                let s = curvature.sqrt();
                (s * t).sinh() / s
            }
            Family::Spherical { curvature } => {
                let s = curvature.sqrt();
                (s * t).sin() / s
            }
            Family::CubicExp => t * (t * t * t).exp(),
            Family::Tabulated(tab) => tab.eval(t),
        }
    }

    pub fn h_prime(&self, t: f64) -> f64 {
        match &self.family {
            Family::Euclidean => 1.0,
            Family::Hyperbolic { curvature } => (curvature.sqrt() * t).cosh(),
            Family::Spherical { curvature } => (curvature.sqrt() * t).cos(),
            Family::CubicExp => {
                let c = t * t * t;
                c.exp() * (1.0 + 3.0 * c)
            }
            Family::Tabulated(tab) => tab.eval_derivative(t),
        }
    }

    /// `ln h(t)`, evaluated without overflow for large `t`.
    pub fn ln_h(&self, t: f64) -> f64 {
        match &self.family {
            Family::Hyperbolic { curvature } => {
                let s = curvature.sqrt();
                let x = s * t;
                if x > 20.0 {
                    x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p() - s.ln()
                } else {
                    x.sinh().ln() - s.ln()
                }
            }
            Family::CubicExp => t.ln() + t * t * t,
            _ => {
                let h = self.h(t);
                if h > 0.0 {
                    h.ln()
                } else if h.is_nan() {
                    f64::NAN
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Checked evaluation of `h`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let upper = self.validity_radius();
        let in_range = match self.family {
            Family::Tabulated(_) => (0.0..=upper).contains(&t),
            _ => t >= 0.0 && t < upper,
        };
        if !in_range {
            return domain(format!("t = {t} outside the domain of h"));
        }
        Ok(self.h(t))
    }
}

fn check_curvature(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        domain(format!("curvature must be a positive real, got {k}"))
    }
}

/// Area of the unit `(m-1)`-sphere, `2π^{m/2}/Γ(m/2)`, by exact recurrence.
pub fn sphere_area(m: usize) -> f64 {
    match m {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI * sphere_area(m - 2) / (m as f64 - 2.0),
    }
}

/// Volume of the unit ball of `R^m`, `π^{m/2}/Γ(m/2 + 1)`.
pub fn unit_ball_volume(m: usize) -> f64 {
    sphere_area(m) / m as f64
}

/// A geodesic ball `B(o, r)` of the model `M_h^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallGeometry {
    dim: usize,
    radius: f64,
    warping: WarpingFunction,
    sphere_area: f64,
}

impl BallGeometry {
    pub fn new(dim: usize, radius: f64, warping: WarpingFunction) -> Result<Self> {
        if dim < 2 {
            return domain(format!("dimension must be >= 2, got {dim}"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return domain(format!("radius must be positive, got {radius}"));
        }
        let rh = warping.validity_radius();
        let ok = match warping.family {
            Family::Tabulated(_) => radius <= rh,
            _ => radius < rh,
        };
        if !ok {
            return domain(format!(
                "radius {radius} must lie below the validity radius {rh} of h"
            ));
        }
        Ok(Self {
            dim,
            radius,
            warping,
            sphere_area: sphere_area(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.warping
    }

    /// `ω_m`, the area of the unit `(m-1)`-sphere.
    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }

    /// Density of `dμ = ω_m h^{m-1}(t) dt`.
    pub fn density(&self, t: f64) -> f64 {
        self.sphere_area * self.warping.h(t).powi(self.dim as i32 - 1)
    }

    /// `V(s) = ω_m ∫_0^s h^{m-1}`.
    pub fn volume(&self, s: f64) -> Result<f64> {
        if !(0.0..=self.radius).contains(&s) {
            return domain(format!("s = {s} outside [0, {}]", self.radius));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(gl_integrate(|t| self.density(t), 0.0, s, VOLUME_PANELS))
    }

    /// `S(s) = ω_m h^{m-1}(s)`.
    pub fn boundary_area(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= self.radius) {
            return domain(format!("s = {s} outside (0, {}]", self.radius));
        }
        Ok(self.density(s))
    }

    /// `∫_0^r V(s)/S(s) ds` for the ball's own radius.
    pub fn vs_integral(&self) -> f64 {
        vs_integral_unchecked(&self.warping, self.dim, self.radius)
    }

    /// `∫_0^upper V(s)/S(s) ds`, for any `upper` inside the domain of `h`.
    pub fn vs_integral_to(&self, upper: f64) -> Result<f64> {
        vs_integral(&self.warping, self.dim, upper)
    }
}

/// `∫_0^upper V(s)/S(s) ds` for the model `M_h^m`; `upper` may exceed any ball radius.
pub fn vs_integral(warp: &WarpingFunction, m: usize, upper: f64) -> Result<f64> {
    if m < 2 {
        return domain(format!("dimension must be >= 2, got {m}"));
    }
    let rh = warp.validity_radius();
    let ok = match warp.family {
        Family::Tabulated(_) => upper <= rh,
        _ => upper < rh,
    };
    if !(upper >= 0.0 && ok) {
        return domain(format!("upper limit {upper} outside [0, {rh})"));
    }
    Ok(vs_integral_unchecked(warp, m, upper))
}

fn vs_integral_unchecked(warp: &WarpingFunction, m: usize, upper: f64) -> f64 {
    if upper == 0.0 {
        return 0.0;
    }
    gl_integrate(|s| vs_ratio(warp, m, s), 0.0, upper, VS_PANELS)
}

/// `V(s)/S(s) = ∫_0^s (h(t)/h(s))^{m-1} dt`, with the limit 0 at `s = 0`.
///
/// The integrand is evaluated as `exp((m-1)(ln h(t) - ln h(s)))` on panels
/// that halve toward `s`, which resolves the boundary layer of rapidly growing
/// profiles without overflowing `h`.
pub fn vs_ratio(warp: &WarpingFunction, m: usize, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let p = (m - 1) as f64;
    let top = warp.ln_h(s);
    let f = |t: f64| (p * (warp.ln_h(t) - top)).exp();
    let mut total = 0.0;
    let mut lo = 0.0;
    for j in 1..=RATIO_LEVELS {
        let hi = s * (1.0 - 0.5f64.powi(j));
        total += gl_panel(&f, lo, hi);
        lo = hi;
    }
    total + gl_panel(&f, lo, s)
}

/// Outcome of the stochastic-completeness heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    DivergesComplete,
    ConvergesIncomplete,
    Inconclusive,
}

/// Partial integrals `I(R) = ∫_0^R V/S` at doubling radii and the verdict drawn
/// from their increments. The verdict is a heuristic, not a proof.
#[derive(Debug, Clone, Serialize)]
pub struct StochasticReport {
    pub verdict: Verdict,
    pub heuristic: bool,
    pub radii: Vec<f64>,
    pub partial_integrals: Vec<f64>,
    pub increments: Vec<f64>,
}

/// Doublings examined when drawing the verdict.
const VERDICT_WINDOW: usize = 5;

/// Heuristic test of `∫_0^∞ V/S < ∞` with `R = 2^j`, `j = 0..=12`.
pub fn stochastic_diagnostic(warp: &WarpingFunction, m: usize) -> Result<StochasticReport> {
    stochastic_diagnostic_with(warp, m, 1.0, 12)
}

pub fn stochastic_diagnostic_with(
    warp: &WarpingFunction,
    m: usize,
    r0: f64,
    doublings: usize,
) -> Result<StochasticReport> {
    match warp.family {
        Family::Spherical { .. } => {
            return domain("spherical models are compact; the completeness test needs R_h = ∞")
        }
        Family::Tabulated(_) => {
            return domain("tabulated warpings cover a finite range; completeness is undecidable")
        }
        _ => {}
    }
    if m < 2 {
        return domain(format!("dimension must be >= 2, got {m}"));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return domain(format!("initial radius must be positive, got {r0}"));
    }
    if doublings < VERDICT_WINDOW + 1 {
        return domain(format!(
            "need at least {} doublings, got {doublings}",
            VERDICT_WINDOW + 1
        ));
    }
    let radii: Vec<f64> = (0..=doublings).map(|j| r0 * 2f64.powi(j as i32)).collect();
    let y = |s: f64| vs_ratio(warp, m, s);
    let mut partial = vec![gl_integrate(y, 0.0, radii[0], 16)];
    let mut increments = Vec::with_capacity(doublings);
    for w in radii.windows(2) {
        let inc = gl_integrate(y, w[0], w[1], 16);
        increments.push(inc);
        partial.push(partial.last().unwrap() + inc);
    }
    let tail = &increments[increments.len() - VERDICT_WINDOW - 1..];
    let verdict = if tail.windows(2).all(|w| w[1] < 0.9 * w[0]) {
        Verdict::ConvergesIncomplete
    } else if tail.windows(2).all(|w| w[1] >= w[0]) {
        Verdict::DivergesComplete
    } else {
        Verdict::Inconclusive
    };
    Ok(StochasticReport {
        verdict,
        heuristic: true,
        radii,
        partial_integrals: partial,
        increments,
    })
}
