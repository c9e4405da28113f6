//! Green kernels and Green operators of the weighted radial problem.
//!
//! On any model ball the Dirichlet Green function of `L_0 = d²/dt² + (m-1)(h'/h) d/dt`
//! with `u'(0) = u(r) = 0` is
//!
//! ```text
//! g(x, y) = ∫_{max(x,y)}^r dt / (ω_m h^{m-1}(t))
//! ```
//!
//! and `G(f)(x) = ∫ g(x, y) f(y) dμ(y)` coincides with the double-integral
//! operator `T`. On Euclidean balls each `ν_l`-spectrum has its own explicit
//! kernel `g_l`, see [`EuclidKernelL`].

use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::model::BallGeometry;
use crate::quadrature::{
    cumulative_from_right, cumulative_weighted, gl_panel, RadialFunction, RadialGrid,
};

/// A linear operator on radial functions over a fixed grid.
pub trait GreenOperator {
    fn grid(&self) -> &Arc<RadialGrid>;
    fn apply(&self, f: &RadialFunction) -> Result<RadialFunction>;
}

/// A symmetric kernel with trace and Hilbert–Schmidt functionals on a grid.
pub trait GreenKernel {
    fn eval(&self, x: f64, y: f64) -> f64;
    /// `∫ g(x, x) dμ(x)`.
    fn trace(&self, grid: &RadialGrid) -> Result<f64>;
    /// `∬ g(x, y)² dμ(x) dμ(y)`.
    fn hs_norm_sq(&self, grid: &RadialGrid) -> Result<f64>;
}

/// Applies `T(f)(t) = ∫_t^r [∫_0^σ h^{m-1} f ds] / h^{m-1}(σ) dσ` on `f`'s grid.
///
/// One forward cumulative pass builds the inner integral, one backward pass the
/// outer one. The inner ratio is 0 at `σ = 0` and the result is exactly 0 at `r`.
pub fn apply_t(f: &RadialFunction) -> RadialFunction {
    let grid = f.grid();
    let density = grid.density();
    let geom = grid.geometry();
    let inner = cumulative_weighted(f.values(), |t| geom.density(t), grid.step());
    let ratio: Vec<f64> = inner
        .iter()
        .zip(density)
        .enumerate()
        .map(|(i, (a, d))| if i == 0 { 0.0 } else { a / d })
        .collect();
    let mut out = cumulative_from_right(&ratio, grid.step());
    *out.last_mut().unwrap() = 0.0;
    f.with_values(out)
}

/// The operator `T` bound to a grid.
#[derive(Debug, Clone)]
pub struct RadialGreenOperator {
    grid: Arc<RadialGrid>,
}

impl RadialGreenOperator {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        Self { grid }
    }
}

impl GreenOperator for RadialGreenOperator {
    fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    fn apply(&self, f: &RadialFunction) -> Result<RadialFunction> {
        crate::quadrature::same_grid(&self.grid, f.grid())?;
        Ok(apply_t(f))
    }
}

/// `g(x, y) = ∫_{max(x,y)}^r dt/(ω_m h^{m-1}(t))` on a model ball.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGreenKernel {
    geom: BallGeometry,
}

impl RadialGreenKernel {
    pub fn new(geom: BallGeometry) -> Self {
        Self { geom }
    }

    pub fn geometry(&self) -> &BallGeometry {
        &self.geom
    }

    /// `Φ(s) = ∫_s^r dt/(ω_m h^{m-1})`, infinite at `s = 0`.
    pub fn profile(&self, s: f64) -> f64 {
        let r = self.geom.radius();
        if s >= r {
            return 0.0;
        }
        if s <= 0.0 {
            return f64::INFINITY;
        }
        let f = |t: f64| 1.0 / self.geom.density(t);
        let mut total = 0.0;
        let mut lo = s;
        while lo < r {
            let hi = (2.0 * lo).min(r);
            total += gl_panel(&f, lo, hi);
            lo = hi;
        }
        total
    }

    /// `Φ` at the grid nodes (`Φ_0 = ∞`).
    ///
    /// The Euclidean part `∫ dt/(ω_m t^{m-1})` is integrated in closed form; the
    /// remainder is bounded for `m <= 3` and integrated with a backward
    /// cumulative pass that never touches node 0.
    pub fn node_profile(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let m = self.geom.dim();
        let r = self.geom.radius();
        let omega = self.geom.sphere_area();
        let p = m as i32 - 1;
        let euclid = |t: f64| {
            if m == 2 {
                (r / t).ln() / omega
            } else {
                (t.powi(2 - m as i32) - r.powi(2 - m as i32)) / ((m as f64 - 2.0) * omega)
            }
        };
        let nodes = grid.nodes();
        let remainder: Vec<f64> = nodes
            .iter()
            .zip(grid.density())
            .enumerate()
            .map(|(i, (&t, &d))| {
                if i == 0 {
                    0.0
                } else {
                    1.0 / d - 1.0 / (omega * t.powi(p))
                }
            })
            .collect();
        let corr = cumulative_from_right(&remainder, grid.step());
        let mut out: Vec<f64> = nodes
            .iter()
            .zip(&corr)
            .map(|(&t, c)| euclid(t) + c)
            .collect();
        out[0] = f64::INFINITY;
        *out.last_mut().unwrap() = 0.0;
        Ok(out)
    }

    fn check_grid(&self, grid: &RadialGrid) -> Result<()> {
        if grid.geometry() != &self.geom {
            return Err(Error::Shape(
                "kernel and grid describe different balls".into(),
            ));
        }
        Ok(())
    }

    /// `|trace - ∫_0^r V/S| / ∫_0^r V/S`.
    pub fn trace_identity_gap(&self, grid: &RadialGrid) -> Result<f64> {
        let tr = self.trace(grid)?;
        let vs = self.geom.vs_integral();
        Ok((tr - vs).abs() / vs)
    }
}

impl GreenKernel for RadialGreenKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.profile(x.max(y))
    }

    fn trace(&self, grid: &RadialGrid) -> Result<f64> {
        let phi = self.node_profile(grid)?;
        Ok(separable_trace(grid, &phi, |t| self.profile(t)))
    }

    fn hs_norm_sq(&self, grid: &RadialGrid) -> Result<f64> {
        let phi = self.node_profile(grid)?;
        let ones = vec![1.0; phi.len()];
        Ok(separable_hs(grid, &ones, &phi))
    }
}

// For x <= y a semi-separable kernel is g(x, y) = a(x) b(y).
//
// The diagonal may blow up at the origin (logarithmically for m = 2), which
// costs Simpson its order there. The first HEAD intervals are integrated by
// Gauss–Legendre on dyadic panels shrinking towards 0, the rest by Simpson.
fn separable_trace(grid: &RadialGrid, diag_nodes: &[f64], diag: impl Fn(f64) -> f64) -> f64 {
    const HEAD: usize = 32;
    const DYADIC_PANELS: usize = 60;
    let n = grid.intervals();
    let head = HEAD.min(n / 2);
    let h = grid.step();
    let rho = grid.density();
    let tail: f64 = (head..=n)
        .map(|i| {
            let w = if i == head || i == n {
                1.0
            } else if (i - head) % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * rho[i] * diag_nodes[i]
        })
        .sum::<f64>()
        * h
        / 3.0;
    let geom = grid.geometry();
    let f = |t: f64| diag(t) * geom.density(t);
    let mut hi = head as f64 * h;
    let mut front = 0.0;
    for _ in 0..DYADIC_PANELS {
        front += gl_panel(&f, 0.5 * hi, hi);
        hi *= 0.5;
    }
    front + tail
}

// ∬ g² = 2 ∫ b(y)² [∫_0^y a² dμ] dμ(y): both passes integrate smooth functions,
// so the diagonal kink of g never meets the quadrature.
fn separable_hs(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    let geom = grid.geometry();
    let a2: Vec<f64> = a.iter().map(|v| v * v).collect();
    let inner = cumulative_weighted(&a2, |t| geom.density(t), grid.step());
    let w = grid.weights();
    2.0 * (1..w.len())
        .map(|j| w[j] * b[j] * b[j] * inner[j])
        .sum::<f64>()
}

/// Green kernel of `L_l u = u'' + (m-1)u'/t - ν_l u/t²` on the Euclidean ball of
/// radius `r`, `ν_l = l(l+m-2)`, in the symmetric form
///
/// ```text
/// g_l(x, y) = x^l y^l (max(x,y)^{-β} - r^{-β}) / (β ω_m),   β = 2l + m - 2 > 0,
/// g_0(x, y) = ln(r / max(x,y)) / ω_2,                         m = 2, l = 0.
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclidKernelL {
    l: usize,
    m: usize,
    r: f64,
    omega: f64,
}

impl EuclidKernelL {
    pub fn new(l: usize, m: usize, r: f64) -> Result<Self> {
        if m < 2 {
            return domain(format!("dimension must be >= 2, got {m}"));
        }
        if !(r.is_finite() && r > 0.0) {
            return domain(format!("radius must be positive, got {r}"));
        }
        Ok(Self {
            l,
            m,
            r,
            omega: crate::model::sphere_area(m),
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn alpha(&self) -> usize {
        self.l + self.m - 1
    }

    pub fn beta(&self) -> usize {
        2 * self.l + self.m - 2
    }

    /// `ν_l = l(l + m - 2)`.
    pub fn nu(&self) -> f64 {
        (self.l * (self.l + self.m - 2)) as f64
    }

    fn check_grid(&self, grid: &RadialGrid) -> Result<()> {
        let g = grid.geometry();
        if !g.warping().is_euclidean() || g.dim() != self.m || g.radius() != self.r {
            return Err(Error::Shape(format!(
                "kernel (l={}, m={}, r={}) needs a Euclidean grid with the same m and r",
                self.l, self.m, self.r
            )));
        }
        Ok(())
    }

    /// Factors `a(x) = x^l` and `b(y) = g_l(y, y)/y^l` of the `x <= y` branch.
    fn factors(&self, nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let l = self.l as i32;
        let a = nodes.iter().map(|&x| x.powi(l)).collect();
        let b = nodes
            .iter()
            .map(|&y| {
                if y == 0.0 {
                    f64::INFINITY
                } else {
                    y.powi(l) * self.radial_part(y)
                }
            })
            .collect();
        (a, b)
    }

    fn radial_part(&self, s: f64) -> f64 {
        let beta = self.beta();
        if beta == 0 {
            (self.r / s).ln() / self.omega
        } else {
            let b = beta as i32;
            (s.powi(-b) - self.r.powi(-b)) / (beta as f64 * self.omega)
        }
    }

    /// `G_l(f)(x) = ∫ g_l(x, y) f(y) dμ(y)` via the three-term split
    ///
    /// ```text
    /// x^{l-β}/β ∫_0^x y^α f + x^l/β ∫_x^r y^{α-β} f - x^l/(β r^β) ∫_0^r y^α f
    /// ```
    ///
    /// (plain `dy`), with the logarithmic form for `β = 0`.
    pub fn apply(&self, f: &RadialFunction) -> Result<RadialFunction> {
        let grid = f.grid();
        self.check_grid(grid)?;
        let x = grid.nodes();
        let h = grid.step();
        let vals = f.values();
        let n = x.len();
        let l = self.l as i32;
        let beta = self.beta();
        let mut out = vec![0.0; n];
        if beta == 0 {
            let left = cumulative_weighted(vals, |y| y, h);
            let right: Vec<f64> = x
                .iter()
                .zip(vals)
                .map(|(&y, v)| {
                    if y == 0.0 {
                        0.0
                    } else {
                        y * (self.r / y).ln() * v
                    }
                })
                .collect();
            let mut right = cumulative_from_right(&right, h);
            let (head, upper) = log_head(vals[0], vals[1], vals[2], h, self.r);
            right[1] = right[2] + upper;
            right[0] = right[2] + head;
            for i in 0..n {
                let first = if i == 0 {
                    0.0
                } else {
                    (self.r / x[i]).ln() * left[i]
                };
                out[i] = first + right[i];
            }
        } else {
            let alpha = self.alpha() as i32;
            let bf = beta as f64;
            let left = cumulative_weighted(vals, |y| y.powi(alpha), h);
            let right: Vec<f64> = x
                .iter()
                .zip(vals)
                .map(|(&y, v)| {
                    if y == 0.0 && self.l >= 2 {
                        0.0
                    } else {
                        y.powi(1 - l) * v
                    }
                })
                .collect();
            let right = cumulative_from_right(&right, h);
            let total = left[n - 1];
            let r_beta = self.r.powi(beta as i32);
            for i in 0..n {
                let xl = x[i].powi(l);
                let first = if i == 0 {
                    0.0
                } else {
                    x[i].powi(l - beta as i32) * left[i] / bf
                };
                out[i] = first + xl * right[i] / bf - xl * total / (bf * r_beta);
            }
        }
        out[n - 1] = 0.0;
        Ok(f.with_values(out))
    }
}

/// Product integration of `y ln(r/y) f(y)` over `[0, 2h]` and `[h, 2h]`, with
/// `f` replaced by its quadratic interpolant on `0, h, 2h`. Simpson loses two
/// orders on the `y ln y` factor at the origin.
fn log_head(f0: f64, f1: f64, f2: f64, h: f64, r: f64) -> (f64, f64) {
    let c = [
        f0,
        (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h),
        (f0 - 2.0 * f1 + f2) / (2.0 * h * h),
    ];
    // ∫ y^k ln(r/y) dy = y^{k+1}/(k+1) (ln(r/y) + 1/(k+1))
    let anti = |k: i32, y: f64| {
        let kp = (k + 1) as f64;
        y.powi(k + 1) / kp * ((r / y).ln() + 1.0 / kp)
    };
    let (mut whole, mut upper) = (0.0, 0.0);
    for (j, cj) in c.iter().enumerate() {
        let k = j as i32 + 1;
        whole += cj * anti(k, 2.0 * h);
        upper += cj * (anti(k, 2.0 * h) - anti(k, h));
    }
    (whole, upper)
}

impl GreenKernel for EuclidKernelL {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let hi = x.max(y);
        if hi == 0.0 {
            return f64::INFINITY;
        }
        let l = self.l as i32;
        x.powi(l) * y.powi(l) * self.radial_part(hi)
    }

    fn trace(&self, grid: &RadialGrid) -> Result<f64> {
        self.check_grid(grid)?;
        let (a, b) = self.factors(grid.nodes());
        let diag: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(separable_trace(grid, &diag, |t| self.eval(t, t)))
    }

    fn hs_norm_sq(&self, grid: &RadialGrid) -> Result<f64> {
        self.check_grid(grid)?;
        let (a, b) = self.factors(grid.nodes());
        Ok(separable_hs(grid, &a, &b))
    }
}

/// `G_l` bound to a Euclidean grid.
#[derive(Debug, Clone)]
pub struct EuclidGreenOperator {
    kernel: EuclidKernelL,
    grid: Arc<RadialGrid>,
}

impl EuclidGreenOperator {
    pub fn new(kernel: EuclidKernelL, grid: Arc<RadialGrid>) -> Result<Self> {
        kernel.check_grid(&grid)?;
        Ok(Self { kernel, grid })
    }

    pub fn kernel(&self) -> &EuclidKernelL {
        &self.kernel
    }
}

impl GreenOperator for EuclidGreenOperator {
    fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    fn apply(&self, f: &RadialFunction) -> Result<RadialFunction> {
        crate::quadrature::same_grid(&self.grid, f.grid())?;
        self.kernel.apply(f)
    }
}

/// Three-point finite differences of `u'' + (m-1)(h'/h)u' - ν u/h²` at the
/// interior nodes `1..N`. Entry `k` belongs to node `k + 1`.
pub fn discrete_generator(u: &RadialFunction, nu: f64) -> Vec<f64> {
    let grid = u.grid();
    let geom = grid.geometry();
    let warp = geom.warping();
    let p = geom.dim() as f64 - 1.0;
    let h = grid.step();
    let x = grid.nodes();
    let v = u.values();
    (1..x.len() - 1)
        .map(|i| {
            let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
            let d1 = (v[i + 1] - v[i - 1]) / (2.0 * h);
            let hv = warp.h(x[i]);
            d2 + p * warp.h_prime(x[i]) / hv * d1 - nu * v[i] / (hv * hv)
        })
        .collect()
}
