// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::nets::koopman::koopman_cesaro;
use crate::space::SampleGrid;

fn x_formula() -> Formula {
    Formula::Polynomial { coeffs: vec![0.0, 1.0] }
}

proptest! {
    #[test]
    fn phase_reduction_is_exact_for_dyadic_rotations(a_bits in 0u64..(1 << 52), m in -(1i64 << 35)..(1i64 << 35)) {
        // a = A / 2^52 exactly, so frac(a m) = (A m mod 2^52) / 2^52
        let a = a_bits as f64 / (1u64 << 52) as f64;
        let exact = ((a_bits as i128 * m as i128).rem_euclid(1i128 << 52)) as f64 / (1u64 << 52) as f64;
        let got = phase_turns(a, m);
        let d = (got - exact).abs();
        prop_assert!(d.min(1.0 - d) < 1e-12, "{} vs {}", got, exact);
    }
}

#[test]
fn phase_recurrence_matches_composition() {
    for alpha in [golden_conjugate(), 2f64.sqrt() - 1.0] {
        let err = PhaseRecurrence { alpha }.validate(20, 4, 2).unwrap();
        assert!(err < 1e-10, "alpha={alpha}: {err:e}");
    }
}

#[test]
fn single_term_sup_is_the_function_norm() {
    let b = ww_cesaro_sup(&SkewProductModel::default(), 1, DEFAULT_SUP_SLACK).unwrap();
    assert_eq!(b, SupBounds::exact(1.0));
}

#[test]
fn two_term_sup_is_one() {
    // (1/2) sup_u |1 + e^{2 pi i u}| = 1
    let b = ww_cesaro_sup(&SkewProductModel::default(), 2, DEFAULT_SUP_SLACK).unwrap();
    assert!(b.contains(1.0) && b.lower > 0.98, "{b:?}");
}

#[test]
fn oversized_lengths_are_refused() {
    let m = SkewProductModel { n_max: 16, ..SkewProductModel::default() };
    assert!(matches!(ww_cesaro_sup(&m, 17, 0.02), Err(Error::Refused(_))));
    let bad = SkewProductModel { l0: 0, ..SkewProductModel::default() };
    assert!(ww_cesaro_sup(&bad, 2, 0.02).is_err());
}

#[test]
fn merged_sup_brackets_direct_lambda_grid() {
    // general coefficients and l0 = 2; the oracle walks the map itself
    let model = SkewProductModel {
        alpha: golden_conjugate(),
        l0: 2,
        coeffs: vec![(-1, C64::new(0.5, 0.0)), (0, C64::new(1.0, 0.0)), (2, C64::new(0.0, -0.3))],
        n_max: 64,
    };
    let n = 8;
    let b = ww_cesaro_sup(&model, n, DEFAULT_SUP_SLACK).unwrap();
    let s = Arc::new(KoopmanOperator::new(model.dynamics().unwrap()));
    let f = model.function();
    let m = 256;
    let mut best = 0.0f64;
    for j in 0..m {
        let avg = koopman_cesaro(&s, n, j as f64 / m as f64, &f).unwrap();
        for i in 0..m {
            // |A f| does not depend on y
            best = best.max(avg.eval([i as f64 / m as f64, 0.37]).unwrap()[0].norm());
        }
    }
    assert!(best <= b.upper + 1e-12, "{best} > {}", b.upper);
    // grid gap for degrees (3.5, 8.5) on 256 points is below 15%
    assert!(best >= 0.85 * b.lower, "{best} vs {}", b.lower);
}

#[test]
fn quadratic_weyl_sums_bracket_direct_summation() {
    let model = SkewProductModel::default();
    for n in [64u64, 128, 256] {
        let b = ww_cesaro_sup(&model, n, DEFAULT_SUP_SLACK).unwrap();
        // direct sum of e(a n(n-1)/2 + n u) on 16N values of u
        let m = 16 * n as usize;
        let oracle = (0..m)
            .map(|j| {
                let u = j as f64 / m as f64;
                let z: C64 = (0..n as i64)
                    .map(|k| {
                        let ph = golden_conjugate() * (k * (k - 1) / 2) as f64 + k as f64 * u;
                        C64::from_polar(1.0, 2.0 * PI * ph)
                    })
                    .sum();
                z.norm() / n as f64
            })
            .fold(0.0, f64::max);
        assert!(oracle <= b.upper + 1e-9, "N={n}: {oracle} > {}", b.upper);
        assert!(oracle >= 0.85 * b.lower, "N={n}: {oracle} vs {}", b.lower);
    }
}

#[test]
fn abel_sups_match_limits() {
    let model = SkewProductModel::default();
    let tiny = ww_abel_sup(&model, 1e-6, 1e-12, DEFAULT_SUP_SLACK).unwrap();
    assert!(tiny.lower > 0.99 && tiny.upper < 1.01, "{tiny:?}");
    let zero = SkewProductModel { coeffs: vec![], ..model.clone() };
    assert_eq!(ww_abel_sup(&zero, 0.9, 1e-9, DEFAULT_SUP_SLACK).unwrap(), SupBounds::exact(0.0));
    let zero_c = SkewProductModel { coeffs: vec![(0, C64::new(0.0, 0.0))], ..model.clone() };
    assert_eq!(ww_abel_sup(&zero_c, 0.9, 1e-9, DEFAULT_SUP_SLACK).unwrap(), SupBounds::exact(0.0));
    let n = 64;
    let a = ww_abel_sup(&model, 1.0 - 1.0 / n as f64, 1e-9, DEFAULT_SUP_SLACK).unwrap();
    let c = ww_cesaro_sup(&model, n, DEFAULT_SUP_SLACK).unwrap();
    assert!(a.upper <= 3.0 * c.upper && c.upper <= 3.0 * a.upper, "{a:?} {c:?}");
}

#[test]
fn slopes_recover_power_laws() {
    let x = [2.0, 4.0, 8.0, 16.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
    assert!((loglog_slope(&x, &y) + 0.5).abs() < 1e-12);
    assert!(loglog_slope(&[1.0], &[1.0]).is_nan());
}

#[test]
fn sweep_rows_keep_input_order() {
    let r = ww_cesaro_sweep(&SkewProductModel::default(), &[64, 16, 32], DEFAULT_SUP_SLACK).unwrap();
    assert_eq!(r.rows.iter().map(|r| r.param).collect::<Vec<_>>(), vec![64.0, 16.0, 32.0]);
    let csv = r.to_csv();
    assert!(csv.starts_with("N,sup_lower,sup_upper,slope_estimate\n"));
    let a = ww_abel_sweep(&SkewProductModel::default(), &[4, 5], 1e-9, DEFAULT_SUP_SLACK).unwrap();
    assert!(a.to_csv().starts_with("r,sup_lower"));
    assert_eq!(a.rows[0].param, 1.0 - 1.0 / 16.0);
}

#[test]
fn dirichlet_trivial_cases() {
    let one = dirichlet_sup(1, 8).unwrap();
    assert!((one.sup - 1.0).abs() < 1e-15);
    assert!(dirichlet_closed_form(2, PI) < 1e-16);
    assert!(matches!(dirichlet_sup(10, 79), Err(Error::Refused(_))));
}

#[test]
fn dirichlet_sup_stays_large() {
    for n in [100u64, 1000, 10_000] {
        let m = 8 * n as usize;
        let r = dirichlet_sup(n, m).unwrap();
        assert!(r.sup >= 0.5);
        assert!((r.lobe_direct - r.lobe_closed_form).abs() < 1e-6);
        assert!((r.lobe_closed_form - 1.0 / (n as f64 * (PI / (2.0 * n as f64)).sin())).abs() < 1e-12);
        let oracle = (1..m).map(|j| dirichlet_closed_form(n, 2.0 * PI * j as f64 / m as f64)).fold(0.0, f64::max);
        assert!((r.sup - oracle).abs() < 1e-9, "N={n}: {} vs {oracle}", r.sup);
    }
}

#[test]
fn constants_have_no_cauchy_defect() {
    let grid = SampleGrid::interval_accumulating_at_one(101, 52).unwrap();
    assert_eq!(square_map_cauchy_defect(&Formula::constant(2.5), &grid, 32, 1024).unwrap(), 0.0);
}

#[test]
fn square_map_cauchy_defect_matches_power_oracle() {
    let grid = SampleGrid::interval_accumulating_at_one(10_001, 52).unwrap();
    let d = square_map_cauchy_defect(&x_formula(), &grid, 32, 1024).unwrap();
    // x^(2^n) = exp(2^n ln x), independent of iterated squaring
    let mean = |x: f64, n: u32| (0..n).map(|k| (2f64.powi(k as i32) * x.ln()).exp()).sum::<f64>() / n as f64;
    let oracle = grid
        .points()
        .iter()
        .map(|p| if p[0] == 0.0 { 0.0 } else { (mean(p[0], 1024) - mean(p[0], 32)).abs() })
        .fold(0.0, f64::max);
    assert!((d - oracle).abs() < 1e-6, "{d} vs {oracle}");
    assert!(d >= 0.2);
    // the defect lives next to 1: the uniform part of the grid alone sees less
    let uniform = SampleGrid::interval(10_001).unwrap();
    assert!(square_map_cauchy_defect(&x_formula(), &uniform, 32, 1024).unwrap() < d);
}

#[test]
fn square_map_means_converge_pointwise_below_one() {
    let v = square_map_means(&x_formula(), 0.5, &[10, 100, 1000]).unwrap();
    assert!(v[0] > v[1] && v[1] > v[2]);
    // sum_n 0.5^(2^n) converges, so N * mean is eventually constant
    assert!((v[1] * 100.0 - v[2] * 1000.0).abs() < 1e-12);
    assert_eq!(square_map_means(&x_formula(), 1.0, &[7, 70]).unwrap(), vec![1.0, 1.0]);
    assert!(square_map_means(&x_formula(), 1.5, &[1]).is_err());
}

#[test]
fn square_map_fixed_space_does_not_separate() {
    let grid = SampleGrid::interval_accumulating_at_one(11, 10).unwrap();
    let s = square_map_separation(&grid, 1e-10).unwrap();
    assert_eq!(s.fixed_points, vec![0.0, 1.0]);
    assert!(!s.separation.separates);
    let w = s.separation.witness_coefficients.clone().unwrap();
    assert!((w[0] + w[1]).norm() < 1e-12 && (w[0].norm() - 1.0).abs() < 1e-12);
    assert!(s.separation.witness_pairing.unwrap() <= 1e-12);
    // points within 1e-15 of 1 are not fixed
    let dense = SampleGrid::interval_accumulating_at_one(10_001, 52).unwrap();
    assert_eq!(square_map_separation(&dense, 1e-10).unwrap().fixed_points, vec![0.0, 1.0]);
}
