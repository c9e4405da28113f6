//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line to the
//! real stdout (bypassing libtest's capture) and then asserts.

mod common;

use std::cell::Cell;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use geoball::bounds::thm_mark_bounds;
use geoball::eigensolve::{
    assemble_spectrum, deflated_sequence, l_spectrum_euclid, radial_spectrum, SolveConfig,
};
use geoball::green::{
    apply_t, discrete_generator, EuclidKernelL, GreenKernel, RadialGreenOperator,
};
use geoball::model::{stochastic_diagnostic, Verdict};
use geoball::momentum::{lambda1_from_moments, lambda2_bound_from_moments, solve_hierarchy};
use geoball::series::{radial_harmonic_identity, whole_spectrum_sum_sq, Multiplicity};
use geoball::{BallGeometry, RadialFunction, RadialGrid, WarpingFunction};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn report(n: u32, what: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n:>2}: {verdict}  {what}  [{detail}]");
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn runner(seed: u8, cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(
        config,
        TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]),
    )
}

type Warp = fn(f64) -> f64;

/// Built-in warping families with closed-form `h` written out independently.
fn builtins() -> Vec<(WarpingFunction, Warp)> {
    vec![
        (WarpingFunction::euclidean(), |t| t),
        (WarpingFunction::hyperbolic(1.0).unwrap(), f64::sinh),
        (WarpingFunction::spherical(1.0).unwrap(), f64::sin),
        (WarpingFunction::cubic_exp(), |t| t * (t * t * t).exp()),
    ]
}

fn geom(m: usize, r: f64, w: &WarpingFunction) -> BallGeometry {
    BallGeometry::new(m, r, w.clone()).unwrap()
}

#[test]
fn criterion_01_convergence_table() {
    let start = Instant::now();
    let cfg = SolveConfig::default();
    let grid = RadialGrid::new(geom(2, 1.0, &WarpingFunction::euclidean()), 4096).unwrap();
    let op = RadialGreenOperator::new(Arc::clone(&grid));
    let pairs = deflated_sequence(&op, &RadialFunction::constant(&grid, 1.0), 3, &cfg).unwrap();
    let elapsed = start.elapsed();

    let h = &pairs[0].ratio_history;
    let mut checks = vec![];
    for (j, want) in [(1, 5.80381), (2, 5.78388), (3, 5.78321), (9, 5.78319)] {
        checks.push((format!("T^{j}={:.6}", h[j]), rel(h[j], want) <= 1e-3));
    }
    for (k, want) in [(1, 30.4713), (2, 74.8874)] {
        let t9 = pairs[k].ratio_history[9];
        checks.push((format!("T^9(phi{k})={t9:.6}"), rel(t9, want) <= 2e-3));
    }
    let fast = elapsed < Duration::from_secs(5);
    let pass = fast && checks.iter().all(|c| c.1) && pairs.iter().all(|p| p.converged);
    let detail: Vec<_> = checks.iter().map(|c| c.0.as_str()).collect();
    report(
        1,
        "disk ratio table",
        pass,
        &format!("{} in {elapsed:.2?}", detail.join(" ")),
    );
    assert!(pass);
}

// V/S for m = 2 in closed form, integrated by a plain composite Simpson rule
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

#[test]
fn criterion_02_corollary_constants() {
    let start = Instant::now();
    let hyp = geom(2, 1.0, &WarpingFunction::hyperbolic(1.0).unwrap()).vs_integral();
    let euc = geom(2, 1.0, &WarpingFunction::euclidean()).vs_integral();
    let sph = geom(2, 1.0, &WarpingFunction::spherical(1.0).unwrap()).vs_integral();
    let oracle = simpson(
        |s| {
            if s == 0.0 {
                0.0
            } else {
                (1.0 - s.cos()) / s.sin()
            }
        },
        0.0,
        1.0,
        20_000,
    );
    let elapsed = start.elapsed();
    let pass = (hyp - 0.240229).abs() <= 1e-4
        && (euc - 0.25).abs() <= 1e-4
        && (sph - oracle).abs() <= 1e-4
        && (sph - 0.261168).abs() <= 1e-4
        && elapsed < Duration::from_secs(1);
    report(
        2,
        "vs integrals at m=2, r=1",
        pass,
        &format!("hyp {hyp:.6} euc {euc:.6} sph {sph:.7} (oracle {oracle:.7}) in {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_harmonic_identity() {
    let start = Instant::now();
    let cfg = SolveConfig::default();
    let mut below = true;
    let mut worst: (f64, String) = (0.0, String::new());
    for (w, _) in builtins() {
        for m in [2, 3] {
            for r in [0.5, 1.0] {
                let rep = radial_harmonic_identity(&geom(m, r, &w), 10, &cfg).unwrap();
                let closed = rep.closed_form.unwrap();
                below &= rep.partial_sum < closed;
                let gap = (closed - rep.partial_sum) / closed;
                if gap > worst.0 {
                    worst = (gap, format!("{} m={m} r={r}", w.name()));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    // independent value of the disk's relative tail after ten terms
    let disk_tail = 1.0 - 4.0 * (1..=10).map(|k| bessel_zero(0, k).powi(-2)).sum::<f64>();
    let pass = below && worst.0 <= 0.02 && elapsed < Duration::from_secs(30);
    report(
        3,
        "partial sums below and within 2% of the V/S integral",
        pass,
        &format!(
            "strictly below: {below}; worst relative gap {:.4} ({}); exact disk tail {:.4} in {elapsed:.2?}",
            worst.0, worst.1, disk_tail
        ),
    );
    assert!(
        pass,
        "the ten-term tail exceeds 2% (disk tail from Bessel zeros: {disk_tail:.4})"
    );
}

#[test]
fn criterion_04_euclidean_closed_forms() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for m in [2usize, 3] {
        for r in [1.0, 2.0] {
            let grid = RadialGrid::new(geom(m, r, &WarpingFunction::euclidean()), 4096).unwrap();
            for l in 0..=3usize {
                let a = (2 * l + m) as f64;
                let k = EuclidKernelL::new(l, m, r).unwrap();
                worst = worst.max(rel(k.trace(&grid).unwrap(), r * r / (2.0 * a)));
                let hs = r.powi(4) / (2.0 * a * a * (a + 2.0));
                worst = worst.max(rel(k.hs_norm_sq(&grid).unwrap(), hs));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-6 && elapsed < Duration::from_secs(10);
    report(
        4,
        "Green trace and HS norm",
        pass,
        &format!("worst rel {worst:.2e} in {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_whole_spectrum_brackets() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = vec![];
    for (m, closed) in [(2, (PI * PI - 6.0) / 96.0), (3, (12.0 - PI * PI) / 64.0)] {
        let rep = whole_spectrum_sum_sq(m, 1.0, Multiplicity::Paper, 200).unwrap();
        let ok = rep.partial_sum <= closed && closed <= rep.partial_sum + rep.tail_bound;
        pass &= ok;
        detail.push(format!(
            "m={m}: {:.7} <= {closed:.7} <= {:.7}",
            rep.partial_sum,
            rep.partial_sum + rep.tail_bound
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    report(
        5,
        "whole-spectrum Σ1/λ² bracket",
        pass,
        &format!("{} in {elapsed:.2?}", detail.join("; ")),
    );
    assert!(pass);
}

#[test]
fn criterion_06_eigenvalue_lower_bounds() {
    let cfg = SolveConfig::default();
    let mut count = 0;
    let mut violations = vec![];
    let mut check = |m: usize, r: f64, l: usize, k: usize, lambda: f64| {
        count += 1;
        let bound = 2.0 * k as f64 * (m + 2 * l) as f64 / (r * r);
        if lambda < bound {
            violations.push(format!("m={m} r={r} l={l} k={k}: {lambda} < {bound}"));
        }
    };
    for m in [2usize, 3] {
        for r in [0.5, 1.0, 2.0] {
            for l in 0..=3 {
                for (k, p) in l_spectrum_euclid(m, r, l, 5, &cfg)
                    .unwrap()
                    .iter()
                    .enumerate()
                {
                    check(m, r, l, k + 1, p.lambda);
                }
            }
            let asm = assemble_spectrum(m, r, 4, 3, Multiplicity::Sphere, &cfg).unwrap();
            for e in &asm.entries {
                check(m, r, e.l, e.i, e.lambda);
            }
        }
    }
    let pass = violations.is_empty();
    report(
        6,
        "λ_{l,k} >= 2k(m+2l)/r²",
        pass,
        &format!("{count} eigenvalues checked"),
    );
    assert!(pass, "{violations:?}");
}

#[test]
fn criterion_07_momentum_limits() {
    let start = Instant::now();
    let cfg = SolveConfig::default();
    let mut worst = 0.0_f64;
    for (w, _) in builtins() {
        for m in [2, 3] {
            for r in [0.5, 1.0, 2.0] {
                let g = geom(m, r, &w);
                let seq = solve_hierarchy(&g, 40, &cfg).unwrap();
                let l1 = lambda1_from_moments(&seq).unwrap().lambda1;
                let exact = radial_spectrum(&g, 1, &cfg).unwrap()[0].lambda;
                worst = worst.max(rel(l1, exact));
            }
        }
    }
    let disk = geom(2, 1.0, &WarpingFunction::euclidean());
    let seq = solve_hierarchy(&disk, 40, &cfg).unwrap();
    let pairs = radial_spectrum(&disk, 2, &cfg).unwrap();
    let l2 = lambda2_bound_from_moments(&seq, pairs[0].lambda).unwrap();
    let elapsed = start.elapsed();
    let pass = worst <= 1e-3
        && l2.lambda2 >= pairs[1].lambda - 1e-6
        && rel(l2.lambda2, 30.4713) <= 1e-2
        && elapsed < Duration::from_secs(5);
    report(
        7,
        "λ₁ and λ₂ from exit moments",
        pass,
        &format!(
            "worst λ₁ rel {worst:.2e}; disk λ₂ bound {:.5} vs {:.5} in {elapsed:.2?}",
            l2.lambda2, pairs[1].lambda
        ),
    );
    assert!(pass);
}

fn family_strategy() -> impl Strategy<Value = usize> {
    0usize..4
}

/// Max of `|L(Gf) + f|` over interior nodes with `t >= from`, and the rounding
/// floor of the three-point stencil, `4ε max|Gf| / h²`.
fn generator_error(u: &RadialFunction, f: &RadialFunction, nu: f64, from: f64) -> (f64, f64) {
    let lu = discrete_generator(u, nu);
    let fv = f.values();
    let x = u.grid().nodes();
    let err = lu
        .iter()
        .enumerate()
        .filter(|(k, _)| x[k + 1] >= from)
        .map(|(k, v)| (v + fv[k + 1]).abs())
        .fold(0.0, f64::max);
    let h = u.grid().step();
    (err, 4.0 * f64::EPSILON * u.max_abs() / (h * h))
}

#[test]
fn criterion_08_operator_identities() {
    let fams = builtins();
    let worst_adj = Cell::new(0.0_f64);
    let worst_err = Cell::new(0.0_f64);
    let worst_ratio = Cell::new(f64::INFINITY);
    let raw_ratio = Cell::new(f64::INFINITY);
    let cases = Cell::new(0);
    let strategy = (
        family_strategy(),
        2usize..4,
        0.5f64..2.0,
        0.2f64..2.0,
        -1.0f64..1.0,
        0.5f64..3.0,
    );
    let result = runner(8, 12).run(&strategy, |(fi, m, r, a, b, c)| {
        let w = &fams[fi].0;
        let f_of = |t: f64| a + b * (c * t * t).cos();
        let g_of = |t: f64| (1.0 + t * t).recip() - b * t * t;
        let mut errs = [0.0; 2];
        let mut floor = 0.0;
        for (j, n) in [4096usize, 8192].into_iter().enumerate() {
            let grid = RadialGrid::new(geom(m, r, w), n).unwrap();
            let f = RadialFunction::from_fn(&grid, f_of);
            let g = RadialFunction::from_fn(&grid, g_of);
            let (tf, tg) = (apply_t(&f), apply_t(&g));
            let lhs = tf.weighted_inner(&g).unwrap();
            let rhs = f.weighted_inner(&tg).unwrap();
            let adj = (lhs - rhs).abs() / (tf.weighted_norm() * g.weighted_norm());
            worst_adj.set(worst_adj.get().max(adj));
            let (e, fl) = generator_error(&tf, &f, 0.0, 0.0);
            errs[j] = e;
            floor = fl;
        }
        worst_err.set(worst_err.get().max(errs[0]));
        worst_ratio.set(
            worst_ratio
                .get()
                .min(errs[0] / (errs[1] - floor).max(f64::MIN_POSITIVE)),
        );
        raw_ratio.set(raw_ratio.get().min(errs[0] / errs[1]));
        cases.set(cases.get() + 1);
        prop_assert!(worst_adj.get() <= 1e-9);
        prop_assert!(errs[0] <= 1e-3);
        prop_assert!(errs[1] - floor <= errs[0] / 4.0, "{errs:?} floor {floor}");
        Ok(())
    });
    // The Euclidean ν_l kernels. For odd l, Gf is odd in t and the (m-1)u'/t term
    // of the stencil has error O(h²/t): first order at node 1, second order at
    // any fixed t. The error is taken away from the singular endpoint.
    let result_l = runner(18, 8).run(
        &(2usize..4, 1usize..4, 0.5f64..2.0, -1.0f64..1.0),
        |(m, l, r, b)| {
            let mut errs = [0.0; 2];
            let mut floor = 0.0;
            for (j, n) in [4096usize, 8192].into_iter().enumerate() {
                let grid = RadialGrid::new(geom(m, r, &WarpingFunction::euclidean()), n).unwrap();
                let k = EuclidKernelL::new(l, m, r).unwrap();
                let f = RadialFunction::from_fn(&grid, |t| t.powi(l as i32) * (1.0 + b * t * t));
                let g = RadialFunction::from_fn(&grid, |t| t.powi(l as i32) * (t * t).cos());
                let (kf, kg) = (k.apply(&f).unwrap(), k.apply(&g).unwrap());
                let adj = (kf.weighted_inner(&g).unwrap() - f.weighted_inner(&kg).unwrap()).abs()
                    / (kf.weighted_norm() * g.weighted_norm());
                worst_adj.set(worst_adj.get().max(adj));
                let (e, fl) = generator_error(&kf, &f, k.nu(), r / 10.0);
                errs[j] = e;
                floor = fl;
            }
            worst_err.set(worst_err.get().max(errs[0]));
            worst_ratio.set(
                worst_ratio
                    .get()
                    .min(errs[0] / (errs[1] - floor).max(f64::MIN_POSITIVE)),
            );
            raw_ratio.set(raw_ratio.get().min(errs[0] / errs[1]));
            cases.set(cases.get() + 1);
            prop_assert!(worst_adj.get() <= 1e-9);
            prop_assert!(errs[0] <= 1e-3);
            prop_assert!(
                errs[1] - floor <= errs[0] / 4.0,
                "l={l} {errs:?} floor {floor}"
            );
            Ok(())
        },
    );
    let pass = result.is_ok() && result_l.is_ok();
    report(
        8,
        "self-adjointness and L∘G = -f",
        pass,
        &format!(
            "{} cases; adjointness {:.1e}; error at 4096 {:.1e}; \
             reduction {:.2}x above the rounding floor ({:.2}x raw)",
            cases.get(),
            worst_adj.get(),
            worst_err.get(),
            worst_ratio.get(),
            raw_ratio.get()
        ),
    );
    result.unwrap();
    result_l.unwrap();
}

#[test]
fn criterion_09_oracle_equivalence() {
    let fams = builtins();
    let cfg = SolveConfig::default();
    let worst = Cell::new(0.0_f64);
    let cases = Cell::new(0);
    let result = runner(9, 16).run(
        &(family_strategy(), 2usize..4, 0.5f64..2.0),
        |(fi, m, r)| {
            let (w, h) = &fams[fi];
            let pairs = radial_spectrum(&geom(m, r, w), 3, &cfg).unwrap();
            let oracle = fd_eigenvalues(h, m, r, 0.0, 3);
            for (p, o) in pairs.iter().zip(&oracle) {
                let e = rel(p.lambda, *o);
                worst.set(worst.get().max(e));
                prop_assert!(e <= 1e-4, "{} m={m} r={r}: {} vs {o}", w.name(), p.lambda);
            }
            cases.set(cases.get() + 1);
            Ok(())
        },
    );
    let pass = result.is_ok();
    let detail = format!("{} cases, worst rel {:.2e}", cases.get(), worst.get());
    report(9, "power iteration vs finite-volume oracle", pass, &detail);
    result.unwrap();
}

#[test]
fn criterion_10_bounds_sandwich() {
    let mut pass = true;
    let mut detail = vec![];
    for (m, vol) in [(2, PI), (3, 4.0 * PI / 3.0)] {
        let b = thm_mark_bounds(m, 1.0, vol).unwrap();
        let s = whole_spectrum_sum_sq(m, 1.0, Multiplicity::Sphere, 200).unwrap();
        let lo = s.partial_sum;
        let hi = s.partial_sum + s.tail_bound;
        pass &= b.lower < lo && hi < b.upper && s.brackets_closed_form();
        detail.push(format!(
            "m={m}: {:.5} < [{lo:.5}, {hi:.5}] < {:.5}",
            b.lower, b.upper
        ));
    }
    report(
        10,
        "Σ1/λ² of flat balls inside the volume bounds",
        pass,
        &detail.join("; "),
    );
    assert!(pass);
}

#[test]
fn criterion_11_stochastic_completeness() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = vec![];
    for m in [2, 3] {
        for (w, want) in [
            (WarpingFunction::cubic_exp(), Verdict::ConvergesIncomplete),
            (WarpingFunction::euclidean(), Verdict::DivergesComplete),
            (
                WarpingFunction::hyperbolic(1.0).unwrap(),
                Verdict::DivergesComplete,
            ),
        ] {
            let rep = stochastic_diagnostic(&w, m).unwrap();
            pass &= rep.verdict == want && rep.heuristic;
            detail.push(format!("{} m={m} {:?}", w.name(), rep.verdict));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(2);
    report(
        11,
        "completeness verdicts",
        pass,
        &format!("{} in {elapsed:.2?}", detail.join(", ")),
    );
    assert!(pass);
}
