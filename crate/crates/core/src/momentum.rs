//! Exit-moment spectrum of a model ball.
//!
//! `φ_k = k! G^k(1)` solves `Δφ_k + k φ_{k-1} = 0` with `φ_k = 0` on the
//! boundary, and `A_k = ∫ φ_k dμ`. Everything here is phrased in terms of
//! `B_k = A_k / k! = ∫ G^k(1) dμ`, so no factorial is ever formed.

use std::sync::Arc;

use serde::Serialize;

use crate::eigensolve::{EigenPair, SolveConfig};
use crate::error::{domain, Error, Result};
use crate::green::apply_t;
use crate::model::BallGeometry;
use crate::quadrature::{RadialFunction, RadialGrid};

/// Largest `k` for which `φ_k` is materialized unscaled.
pub const MAX_RAW_PHI: usize = 20;

/// Scaled denominator below which the `λ₂` estimate is flagged.
pub const LAMBDA2_UNRELIABLE: f64 = 1e-13;

/// The `λ₂` formula is evaluated at the deepest step whose scaled denominator
/// stays above this floor.
pub const LAMBDA2_DENOMINATOR_FLOOR: f64 = 1e-6;

/// `G^k(1)` for `k = 0..=K`, each stored as a unit-norm profile times `e^{s_k}`.
#[derive(Debug, Clone)]
pub struct MomentSequence {
    profiles: Vec<RadialFunction>,
    log_scale: Vec<f64>,
    mantissa: Vec<f64>,
}

impl MomentSequence {
    /// The largest moment index `K`.
    pub fn k_max(&self) -> usize {
        self.profiles.len() - 1
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.profiles[0].grid()
    }

    /// `∫ profile_k dμ`, so that `B_k = mantissa_k · e^{log_scale_k}`.
    pub fn mantissas(&self) -> &[f64] {
        &self.mantissa
    }

    pub fn log_scales(&self) -> &[f64] {
        &self.log_scale
    }

    pub fn ln_b(&self, k: usize) -> f64 {
        self.mantissa[k].ln() + self.log_scale[k]
    }

    /// `B_k`; underflows to 0 for very large `k`, use [`Self::ln_b`] there.
    pub fn b(&self, k: usize) -> f64 {
        self.ln_b(k).exp()
    }

    /// `B_{k-1} / B_k` for `k >= 1`.
    pub fn ratio(&self, k: usize) -> f64 {
        self.mantissa[k - 1] / self.mantissa[k] * (self.log_scale[k - 1] - self.log_scale[k]).exp()
    }

    /// `B_{k-1}/B_k` for `k = 1..=K`.
    pub fn lambda1_ratios(&self) -> Vec<f64> {
        (1..=self.k_max()).map(|k| self.ratio(k)).collect()
    }

    /// `A_1 = B_1 = ∫ G(1) dμ`.
    pub fn torsional_rigidity(&self) -> f64 {
        self.b(1)
    }

    /// Unit-norm samples of `G^k(1)`.
    pub fn profile(&self, k: usize) -> &RadialFunction {
        &self.profiles[k]
    }

    /// `φ_k = k! G^k(1)`, only for `k <= 20`.
    pub fn phi(&self, k: usize) -> Result<RadialFunction> {
        if k > MAX_RAW_PHI {
            return domain(format!(
                "φ_{k} is only available in log-scaled form (k > {MAX_RAW_PHI})"
            ));
        }
        if k > self.k_max() {
            return domain(format!("φ_{k} was not computed (K = {})", self.k_max()));
        }
        let ln_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
        let mut out = self.profiles[k].clone();
        out.scale((ln_fact + self.log_scale[k]).exp());
        Ok(out)
    }
}

/// Iterates `G` on the constant function `K` times with per-step renormalization.
pub fn solve_hierarchy(
    geom: &BallGeometry,
    k_max: usize,
    config: &SolveConfig,
) -> Result<MomentSequence> {
    if k_max < 2 {
        return domain(format!("K must be at least 2, got {k_max}"));
    }
    let grid = RadialGrid::new(geom.clone(), config.grid)?;
    let mut u = RadialFunction::constant(&grid, 1.0);
    let mut scale = 0.0;
    let mut seq = MomentSequence {
        profiles: Vec::with_capacity(k_max + 1),
        log_scale: Vec::with_capacity(k_max + 1),
        mantissa: Vec::with_capacity(k_max + 1),
    };
    for k in 0..=k_max {
        if k > 0 {
            u = apply_t(&u);
        }
        let n = u.weighted_norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Consistency(format!("G^{k}(1) has norm {n}")));
        }
        u.scale(1.0 / n);
        scale += n.ln();
        let mant = u.weighted_integral();
        if mant <= 0.0 {
            return Err(Error::Consistency(format!("B_{k} is not positive")));
        }
        seq.profiles.push(u.clone());
        seq.log_scale.push(scale);
        seq.mantissa.push(mant);
    }
    Ok(seq)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lambda1Estimate {
    /// `B_{K-1}/B_K`.
    pub lambda1: f64,
    /// `B_{k-1}/B_k` for `k = 1..=K`.
    pub history: Vec<f64>,
    /// Whether the history is monotone (either direction).
    pub monotone: bool,
}

/// `λ₁ = lim B_{k-1}/B_k`, read off at `k = K`.
pub fn lambda1_from_moments(seq: &MomentSequence) -> Result<Lambda1Estimate> {
    if seq.k_max() < 5 {
        return domain(format!("K must be at least 5, got {}", seq.k_max()));
    }
    let history = seq.lambda1_ratios();
    let up = history.windows(2).all(|w| w[1] >= w[0]);
    let down = history.windows(2).all(|w| w[1] <= w[0]);
    Ok(Lambda1Estimate {
        lambda1: *history.last().unwrap(),
        history,
        monotone: up || down,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lambda2Estimate {
    /// `(B_{k-2} - λ₁B_{k-1}) / (B_{k-1} - λ₁B_k)` at `k = k_used`.
    pub lambda2: f64,
    pub k_used: usize,
    /// `1 - λ₁B_k/B_{k-1}`.
    pub denominator: f64,
    pub reliable: bool,
}

/// Upper bound for `λ₂` from three consecutive moments.
///
/// In units of `B_{k-1}` the denominator is `1 - λ₁/ρ_k` with `ρ_k = B_{k-1}/B_k`,
/// which decays like `(λ₁/λ₂)^k` and is pure rounding noise long before `k = K`.
/// The formula is therefore evaluated at the largest `k` whose denominator is
/// still at least [`LAMBDA2_DENOMINATOR_FLOOR`].
pub fn lambda2_bound_from_moments(seq: &MomentSequence, lambda1: f64) -> Result<Lambda2Estimate> {
    if seq.k_max() < 2 {
        return domain("need at least B_0, B_1, B_2");
    }
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return domain(format!("λ₁ must be positive, got {lambda1}"));
    }
    let at = |k: usize| {
        let den = 1.0 - lambda1 / seq.ratio(k);
        let num = seq.ratio(k - 1) - lambda1;
        (num / den, den)
    };
    let k_used = (2..=seq.k_max())
        .rev()
        .find(|&k| at(k).1 >= LAMBDA2_DENOMINATOR_FLOOR)
        .unwrap_or(2);
    let (lambda2, denominator) = at(k_used);
    Ok(Lambda2Estimate {
        lambda2,
        k_used,
        denominator,
        reliable: denominator.abs() >= LAMBDA2_UNRELIABLE && lambda2.is_finite(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionCheck {
    /// `a_i = ∫ u_i dμ`.
    pub coefficients: Vec<f64>,
    /// `|B_k - Σ a_i²/λ_i^k| / B_k` for `k = 1..=K`.
    pub discrepancies: Vec<f64>,
    /// Worst discrepancy over `k >= 3`.
    pub worst: f64,
}

/// Compares `B_k` with the truncated eigen-expansion `Σ a_i² λ_i^{-k}`.
pub fn momentum_spectral_expansion(
    seq: &MomentSequence,
    pairs: &[EigenPair],
) -> Result<ExpansionCheck> {
    if pairs.is_empty() {
        return domain("need at least one eigenpair");
    }
    let ones = RadialFunction::constant(seq.grid(), 1.0);
    let coefficients = pairs
        .iter()
        .map(|p| p.eigenfunction.weighted_inner(&ones))
        .collect::<Result<Vec<_>>>()?;
    let discrepancies: Vec<f64> = (1..=seq.k_max())
        .map(|k| {
            // both sides relative to B_k, in log space
            let ln_b = seq.ln_b(k);
            let expansion: f64 = pairs
                .iter()
                .zip(&coefficients)
                .map(|(p, a)| (2.0 * a.abs().ln() - k as f64 * p.lambda.ln() - ln_b).exp())
                .sum();
            (1.0 - expansion).abs()
        })
        .collect();
    let worst = discrepancies.iter().skip(2).fold(0.0_f64, |m, d| m.max(*d));
    Ok(ExpansionCheck {
        coefficients,
        discrepancies,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::radial_spectrum;
    use crate::model::WarpingFunction;
    use std::f64::consts::PI;

    fn euclid(m: usize) -> BallGeometry {
        BallGeometry::new(m, 1.0, WarpingFunction::euclidean()).unwrap()
    }

    #[test]
    fn first_moments_of_the_disk() {
        let seq = solve_hierarchy(&euclid(2), 5, &SolveConfig::default()).unwrap();
        assert!((seq.b(0) - PI).abs() < 1e-12);
        assert!((seq.torsional_rigidity() - PI / 8.0).abs() < 1e-8);
        let phi1 = seq.phi(1).unwrap();
        for (t, v) in phi1.grid().nodes().iter().zip(phi1.values()) {
            assert!((v - (1.0 - t * t) / 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn three_ball_mean_exit_time() {
        let seq = solve_hierarchy(&euclid(3), 3, &SolveConfig::default()).unwrap();
        let phi1 = seq.phi(1).unwrap();
        assert!((phi1.values()[0] - 1.0 / 6.0).abs() < 1e-8);
        assert!(phi1.values().iter().all(|&v| v <= 1.0 / 6.0 + 1e-12));
    }

    #[test]
    fn profiles_are_positive_and_vanish_at_r() {
        let seq = solve_hierarchy(
            &euclid(2),
            25,
            &SolveConfig {
                grid: 512,
                ..Default::default()
            },
        )
        .unwrap();
        for k in 1..=25 {
            let v = seq.profile(k).values();
            assert_eq!(*v.last().unwrap(), 0.0);
            assert!(v[..v.len() - 1].iter().all(|&x| x > 0.0), "k={k}");
        }
        assert!(seq.phi(21).is_err());
        assert!(seq.phi(20).is_ok());
    }

    #[test]
    fn moments_converge_to_lambda1() {
        let cfg = SolveConfig::default();
        let seq = solve_hierarchy(&euclid(2), 40, &cfg).unwrap();
        let est = lambda1_from_moments(&seq).unwrap();
        assert!(((est.lambda1 - 5.78319) / 5.78319).abs() < 1e-3);
        // log B_k is affine with slope -ln λ₁
        let slope = seq.ln_b(40) - seq.ln_b(39);
        assert!((slope + est.lambda1.ln()).abs() < 1e-3);
        let short = solve_hierarchy(&euclid(2), 4, &cfg).unwrap();
        assert!(lambda1_from_moments(&short).is_err());
    }

    #[test]
    fn lambda2_from_moments_on_the_disk() {
        let cfg = SolveConfig::default();
        let geom = euclid(2);
        let pairs = radial_spectrum(&geom, 2, &cfg).unwrap();
        let seq = solve_hierarchy(&geom, 40, &cfg).unwrap();
        let est = lambda2_bound_from_moments(&seq, pairs[0].lambda).unwrap();
        assert!(est.reliable);
        assert!(((est.lambda2 - 30.4713) / 30.4713).abs() < 1e-2, "{est:?}");
        assert!(pairs[1].lambda <= est.lambda2 + 1e-6);
    }

    #[test]
    fn expansion_matches_moments() {
        let cfg = SolveConfig::default();
        let geom = euclid(2);
        let pairs = radial_spectrum(&geom, 3, &cfg).unwrap();
        let seq = solve_hierarchy(&geom, 12, &cfg).unwrap();
        let check = momentum_spectral_expansion(&seq, &pairs).unwrap();
        assert!(check.discrepancies[4] <= 1e-5, "{:?}", check.discrepancies);
        assert!(check.discrepancies[11] < check.discrepancies[2]);
    }
}
