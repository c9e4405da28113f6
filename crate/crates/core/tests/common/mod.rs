//! Independent oracles: a finite-volume discretization of the radial
//! Sturm–Liouville problem solved by Sturm-sequence bisection, and Bessel zeros
//! from power series. None of this touches the library's quadrature or Green
//! operators.

#![allow(dead_code)]

/// Gauss points on `[a, b]`, exact for cubics.
fn gauss2(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 / 3f64.sqrt();
    let (mid, half) = (0.5 * (a + b), b - a);
    0.5 * half * (f(mid - c * half) + f(mid + c * half))
}

/// Symmetric tridiagonal matrix (diagonal `d`, off-diagonal `e`).
struct Tridiag {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiag {
    /// Number of eigenvalues strictly below `x` (Sturm count of `T - x`).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.d.len() {
            let qq = if q == 0.0 { f64::EPSILON } else { q };
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / qq;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        // Gershgorin
        let n = self.d.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let rad = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - rad);
            hi = hi.max(self.d[i] + rad);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Finite-volume eigenvalues of `-(ρu')' + ν ρ u/h² = λ ρ u` on `[0, r]`,
/// `ρ = h^{m-1}`, with `u(r) = 0` and `u'(0) = 0` (`ν = 0`) or `u(0) = 0`.
fn fv_eigenvalues(
    h: &impl Fn(f64) -> f64,
    m: usize,
    r: f64,
    nu: f64,
    count: usize,
    n: usize,
) -> Vec<f64> {
    let dt = r / n as f64;
    let rho = |t: f64| h(t).powi(m as i32 - 1);
    let first = if nu == 0.0 { 0 } else { 1 };
    let idx: Vec<usize> = (first..n).collect();
    let mass: Vec<f64> = idx
        .iter()
        .map(|&i| {
            let t = i as f64 * dt;
            let a = (t - 0.5 * dt).max(0.0);
            gauss2(&rho, a, t) + gauss2(&rho, t, t + 0.5 * dt)
        })
        .collect();
    let potential: Vec<f64> = idx
        .iter()
        .map(|&i| {
            if nu == 0.0 {
                return 0.0;
            }
            let t = i as f64 * dt;
            let w = |s: f64| rho(s) / (h(s) * h(s));
            nu * (gauss2(&w, t - 0.5 * dt, t) + gauss2(&w, t, t + 0.5 * dt))
        })
        .collect();
    let flux = |i: usize| rho((i as f64 + 0.5) * dt) / dt;
    let d: Vec<f64> = idx
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let left = if i == 0 { 0.0 } else { flux(i - 1) };
            (left + flux(i) + potential[j]) / mass[j]
        })
        .collect();
    let e: Vec<f64> = (0..idx.len() - 1)
        .map(|j| -flux(idx[j]) / (mass[j] * mass[j + 1]).sqrt())
        .collect();
    let t = Tridiag { d, e };
    (0..count).map(|k| t.eigenvalue(k)).collect()
}

/// Richardson-extrapolated (second order) finite-volume eigenvalues.
pub fn fd_eigenvalues(h: impl Fn(f64) -> f64, m: usize, r: f64, nu: f64, count: usize) -> Vec<f64> {
    let n = 4000;
    let coarse = fv_eigenvalues(&h, m, r, nu, count, n);
    let fine = fv_eigenvalues(&h, m, r, nu, count, 2 * n);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// Radial (`ν = 0`) eigenvalues of a model ball.
pub fn fd_radial(warp: &geoball::WarpingFunction, m: usize, r: f64, count: usize) -> Vec<f64> {
    fd_eigenvalues(|t| warp.h(t), m, r, 0.0, count)
}

/// `ν_l`-eigenvalues of the Euclidean ball.
pub fn fd_euclid_l(m: usize, r: f64, l: usize, count: usize) -> Vec<f64> {
    let nu = (l * (l + m - 2)) as f64;
    fd_eigenvalues(|t| t, m, r, nu, count)
}

/// `J_n(x)` by its power series (fine for the first few zeros).
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= -half * half / (k * (k + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// The `k`-th positive zero of `J_n` (1-based).
pub fn bessel_zero(n: u32, k: usize) -> f64 {
    let mut found = 0;
    let step = 0.01;
    let mut a = step;
    loop {
        let b = a + step;
        if bessel_j(n, a) * bessel_j(n, b) < 0.0 {
            found += 1;
            if found == k {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if bessel_j(n, lo) * bessel_j(n, mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
    }
}
