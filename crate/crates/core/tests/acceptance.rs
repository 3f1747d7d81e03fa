//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p hdc-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use hdc_core::boundary_chart::{
    chart_decompose, chart_reconstruct, curve_limit, DEFAULT_EPS_BREAK,
};
use hdc_core::decompositions::{cartan_kak, horospherical, iwasawa_kan, polar};
use hdc_core::face_lattice::{enumerate_faces, is_fiber_element, ParabolicDescriptor};
use hdc_core::linalg::{self, Mat};
use hdc_core::root_datum::{CartanVector, NodeSet};
use hdc_core::sampling::{
    gaussian_sl, haar_special_orthogonal, log_uniform, random_chart_point, random_subset,
    sample_rng,
};
use hdc_core::verification::{
    b_transitivity_check, bracket_filtration_check, haar_check, inversion_diffeo_check,
    inversion_sample, isotropy_check_all, minimality_check, tau_reversal_defect,
};
use rand::Rng;
use rayon::prelude::*;

const SEED: u64 = 20_191_208;

fn report(id: usize, name: &str, passed: bool, summary: String, elapsed: Duration, limit: u64) {
    let timely = elapsed <= Duration::from_secs(limit);
    let status = if passed && timely { "PASS" } else { "FAIL" };
    println!(
        "[{status}] criterion {id}: {name}: {summary}; {:.2} s (limit {limit} s)",
        elapsed.as_secs_f64()
    );
    assert!(passed, "criterion {id} failed: {summary}");
    assert!(timely, "criterion {id} exceeded {limit} s");
}

fn rel_error(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn criterion_1_decomposition_roundtrips() {
    let start = Instant::now();
    let worst = (2..=6usize)
        .into_par_iter()
        .flat_map(|n| (0..1000u64).into_par_iter().map(move |i| (n, i)))
        .map(|(n, i)| {
            let mut rng = sample_rng(SEED + n as u64, i);
            let g = gaussian_sl(n, &mut rng);
            let subset = random_subset(n, &mut rng);
            let m = g.matrix();
            let kak = rel_error(&cartan_kak(&g).reconstruct(), m);
            let iwa = rel_error(&iwasawa_kan(&g).reconstruct(), m);
            let pol = rel_error(&polar(&g).unwrap().reconstruct(), m);
            let hor = rel_error(&horospherical(&g, &subset).unwrap().reconstruct(), m);
            kak.max(iwa).max(pol).max(hor)
        })
        .reduce(|| 0.0, f64::max);
    report(
        1,
        "KAK/Iwasawa/polar/horospherical roundtrip, n = 2..6, 1000 samples each",
        worst <= 1e-9,
        format!("worst relative error {worst:.3e} (tol 1e-9)"),
        start.elapsed(),
        30,
    );
}

#[test]
fn criterion_2_chart_roundtrip() {
    let start = Instant::now();
    let worst = [2usize, 3, 4]
        .into_par_iter()
        .flat_map(|n| (0..1000u64).into_par_iter().map(move |i| (n, i)))
        .map(|(n, i)| {
            let mut rng = sample_rng(SEED + 100 + n as u64, i);
            let breaks = random_subset(n, &mut rng).complement();
            let tau: Vec<f64> = (0..breaks.len())
                .map(|_| log_uniform(1e-5, 1e-4, &mut rng))
                .collect();
            let p = random_chart_point(n, &breaks, &tau, 0.5, &mut rng);
            let g =
                hdc_core::boundary_chart::sl_normalize(&chart_reconstruct(&p).unwrap()).unwrap();
            let q = chart_decompose(&g, DEFAULT_EPS_BREAK).unwrap().point;
            if q.breaks() != p.breaks() {
                return f64::INFINITY;
            }
            rel_error(&chart_reconstruct(&q).unwrap(), g.matrix())
        })
        .reduce(|| 0.0, f64::max);
    report(
        2,
        "chart reconstruct after decompose, n = 2..4, 1000 samples each",
        worst <= 1e-9,
        format!("worst relative error {worst:.3e} (tol 1e-9)"),
        start.elapsed(),
        30,
    );
}

#[test]
fn criterion_3_inversion() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_tau = 0.0f64;
    for n in [2usize, 3, 4] {
        let r = inversion_diffeo_check(n, 500, SEED + n as u64).unwrap();
        worst = worst.max(r.worst_case);
        let t = (0..500u64)
            .into_par_iter()
            .map(|i| tau_reversal_defect(&inversion_sample(n, SEED + n as u64, i)).unwrap())
            .reduce(|| 0.0, f64::max);
        worst_tau = worst_tau.max(t);
    }
    report(
        3,
        "D1 inversion in charts, n = 2..4, 500 samples each",
        worst <= 1e-7 && worst_tau <= 1e-12,
        format!(
            "worst discrepancy {worst:.3e} (tol 1e-7), tau reversal {worst_tau:.3e} (tol 1e-12)"
        ),
        start.elapsed(),
        60,
    );
}

#[test]
fn criterion_4_haar_exponent() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut passed = true;
    for n in [2usize, 3] {
        let s = haar_check(n, SEED).unwrap();
        passed &= s.report.passed;
        for (fit, sigma) in s.fits.iter().zip(&s.expected) {
            lines.push(format!(
                "n={n} k={} slope {:.4} vs {} (residual {:.1e})",
                fit.parameter, fit.slope, -sigma, fit.max_residual
            ));
        }
    }
    report(
        4,
        "Haar density exponent within 2%",
        passed,
        lines.join(", "),
        start.elapsed(),
        120,
    );
}

#[test]
fn criterion_5_isotropy() {
    let start = Instant::now();
    let mut passed = true;
    let mut lines = Vec::new();
    for n in [2usize, 3] {
        let r = isotropy_check_all(n, SEED).unwrap();
        let slope = r
            .details
            .iter()
            .filter(|d| d.tolerance == 0.95)
            .map(|d| d.value)
            .fold(f64::INFINITY, f64::min);
        let speed = r
            .details
            .iter()
            .filter(|d| d.tolerance == 0.1)
            .map(|d| d.value)
            .fold(f64::INFINITY, f64::min);
        passed &= r.passed;
        let speed = if speed.is_finite() {
            format!("{speed:.3}")
        } else {
            "none (no m generators)".into()
        };
        lines.push(format!(
            "n={n} min slope {slope:.4}, min fiber speed {speed}"
        ));
    }
    report(
        5,
        "D2 right isotropy vanishes at faces, n = 2, 3, all S",
        passed,
        lines.join("; "),
        start.elapsed(),
        120,
    );
}

#[test]
fn criterion_6_rank() {
    let start = Instant::now();
    let mut passed = true;
    let mut lines = Vec::new();
    for n in [2usize, 3] {
        let r = b_transitivity_check(n, 100, SEED).unwrap();
        passed &= r.passed && r.details.iter().all(|d| d.value == (n * n - 1) as f64);
        lines.push(format!("n={n} min rank {} of {}", r.worst_case, n * n - 1));
    }
    report(
        6,
        "D3 left and right generators span, 100 points each",
        passed,
        lines.join("; "),
        start.elapsed(),
        60,
    );
}

#[test]
fn criterion_7_minimality() {
    let start = Instant::now();
    let mut passed = true;
    let mut lines = Vec::new();
    for n in [2usize, 3] {
        let r = minimality_check(n, 20, SEED).unwrap();
        passed &= r.passed;
        lines.push(format!("n={n} worst |slope - 1| {:.4}", r.worst_case));
    }
    report(
        7,
        "D4 minimality witnesses with slope in [0.95, 1.05]",
        passed,
        lines.join("; "),
        start.elapsed(),
        60,
    );
}

#[test]
fn criterion_8_faces_and_brackets() {
    let start = Instant::now();
    let mut faces_ok = true;
    for n in 1..=8usize {
        for f in enumerate_faces(n).unwrap() {
            faces_ok &= f.dim_face + f.codim == n * n - 1;
            faces_ok &= f.codim == n - 1 - f.subset.len();
        }
    }
    let brackets_ok = (1..=6).all(bracket_filtration_check);
    report(
        8,
        "face dimensions for n <= 8 and bracket filtration for n <= 6",
        faces_ok && brackets_ok,
        format!("dimensions {faces_ok}, brackets {brackets_ok}"),
        start.elapsed(),
        10,
    );
}

#[test]
fn criterion_9_curve_limits() {
    let start = Instant::now();
    let t = 30.0;
    let results: Vec<(f64, f64, bool)> = [2usize, 3]
        .into_par_iter()
        .flat_map(|n| (0..100u64).into_par_iter().map(move |i| (n, i)))
        .map(|(n, i)| {
            let mut rng = sample_rng(SEED + 900 + n as u64, i);
            let k1 = haar_special_orthogonal(n, &mut rng);
            let k2 = haar_special_orthogonal(n, &mut rng);
            let mut subset = random_subset(n, &mut rng);
            if subset.len() == n - 1 {
                subset = NodeSet::empty(n);
            }
            let alpha: Vec<f64> = (1..n)
                .map(|k| {
                    if subset.contains(k) {
                        0.0
                    } else {
                        rng.random_range(0.3..0.6)
                    }
                })
                .collect();
            let mut h = vec![0.0];
            for a in &alpha {
                let last = *h.last().unwrap();
                h.push(last - a);
            }
            let mean = h.iter().sum::<f64>() / n as f64;
            let h = CartanVector::new(h.iter().map(|x| x - mean).collect()).unwrap();
            let limit = curve_limit(&k1, &h, &k2).unwrap();
            let a = linalg::diag(
                &h.entries()
                    .iter()
                    .map(|x| (t * x).exp())
                    .collect::<Vec<_>>(),
            );
            let g = hdc_core::decompositions::SpecialLinearElement::new(&k1 * a * &k2).unwrap();
            let p = chart_decompose(&g, DEFAULT_EPS_BREAK).unwrap().point;
            if p.breaks() != limit.left_flag.breaks() {
                return (f64::INFINITY, f64::INFINITY, false);
            }
            let d = limit.distance_to(&p).unwrap();
            let fiber_ok = is_fiber_element(
                &limit.fiber_representative,
                &ParabolicDescriptor::of_flag(limit.right_flag.clone()),
                &ParabolicDescriptor::of_flag(limit.left_flag.clone()),
                1e-9,
            )
            .unwrap();
            (d.flags(), d.fiber, fiber_ok)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let fiber_gap = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let fibers = results.iter().all(|r| r.2);
    report(
        9,
        "curve limits at t = 30, n = 2, 3, 100 samples each",
        worst <= 1e-6 && fibers,
        format!(
            "worst principal angle {worst:.3e} (tol 1e-6), fiber elements {fibers}, fiber distance {fiber_gap:.3e}"
        ),
        start.elapsed(),
        60,
    );
}
