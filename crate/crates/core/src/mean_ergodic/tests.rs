// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::nets::{cesaro, NetScheme};
use crate::random::{bounded_abelian, peripheral_contraction, random_vector};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn rep_of(d: usize, rows: &[f64]) -> SemigroupRep {
    SemigroupRep::powers(DenseOperator::from_real_rows(d, rows).unwrap())
}

fn swap() -> SemigroupRep {
    rep_of(2, &[0.0, 1.0, 1.0, 0.0])
}

fn identity(d: usize) -> SemigroupRep {
    SemigroupRep::powers(DenseOperator::identity(d))
}

/// Spans agree iff the orthogonal projectors agree.
fn same_span(b: &SubspaceBasis, vectors: &[Vector]) -> bool {
    let want = column_space(&Matrix::from_columns(vectors), 1e-12, 0.0);
    b.dim() == want.dim() && (b.orthogonal_projector() - want.orthogonal_projector()).norm() < 1e-10
}

fn v(xs: &[f64]) -> Vector {
    Vector::from_iterator(xs.len(), xs.iter().map(|&x| c(x)))
}

#[test]
fn fixed_spaces_of_reference_operators() {
    let fix = fix_space(&swap(), DEFAULT_RANK_TOL).unwrap();
    assert!(same_span(&fix, &[v(&[1.0, 1.0])]));
    let t: f64 = 2.0f64.sqrt() - 1.0;
    let (cs, sn) = ((2.0 * std::f64::consts::PI * t).cos(), (2.0 * std::f64::consts::PI * t).sin());
    assert!(fix_space(&rep_of(2, &[cs, -sn, sn, cs]), DEFAULT_RANK_TOL).unwrap().is_empty());
    assert_eq!(fix_space(&identity(4), DEFAULT_RANK_TOL).unwrap().dim(), 4);
    assert!(same_span(&dual_fix_space(&swap(), DEFAULT_RANK_TOL).unwrap(), &[v(&[1.0, 1.0])]));
    assert_eq!(dual_fix_space(&identity(3), DEFAULT_RANK_TOL).unwrap().dim(), 3);
}

#[test]
fn bases_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let m = peripheral_contraction(&mut rng, 7);
        let rep = SemigroupRep::powers(m.op);
        for b in [fix_space(&rep, DEFAULT_RANK_TOL).unwrap(), range_space(&rep, DEFAULT_RANK_TOL).unwrap()] {
            let q = b.matrix();
            let gram = q.adjoint() * &q;
            assert!((gram - Matrix::identity(b.dim(), b.dim())).norm() < 1e-10);
        }
    }
}

/// Stationary vector of a column-stochastic matrix by power iteration.
fn stationary(m: &Matrix) -> Vector {
    let mut x = Vector::from_element(m.nrows(), c(1.0 / m.nrows() as f64));
    for _ in 0..500 {
        x = m * x;
    }
    x
}

#[test]
fn markov_operator_on_functions() {
    // column-stochastic M; on functions it acts as the row-stochastic M^T
    let m = DenseOperator::from_real_rows(2, &[0.5, 0.25, 0.5, 0.75]).unwrap();
    let pi = stationary(m.matrix());
    assert_abs_diff_eq!(pi[1].re / pi[0].re, 2.0, epsilon = 1e-12);

    let on_functions = SemigroupRep::powers(DenseOperator::new(m.matrix().transpose()).unwrap());
    let dual = dual_fix_space(&on_functions, DEFAULT_RANK_TOL).unwrap();
    assert!(same_span(&dual, std::slice::from_ref(&pi)));
    let p = mean_ergodic_projection(&on_functions, DEFAULT_RANK_TOL).unwrap();
    for i in 0..2 {
        assert_abs_diff_eq!((p.matrix()[(i, 0)] - c(1.0 / 3.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((p.matrix()[(i, 1)] - c(2.0 / 3.0)).norm(), 0.0, epsilon = 1e-12);
    }
    // acting on measures, the stationary distribution is fixed
    assert!(same_span(&fix_space(&SemigroupRep::powers(m), DEFAULT_RANK_TOL).unwrap(), &[pi]));
}

#[test]
fn range_spaces() {
    assert!(range_space(&identity(3), DEFAULT_RANK_TOL).unwrap().is_empty());
    assert!(same_span(&range_space(&swap(), DEFAULT_RANK_TOL).unwrap(), &[v(&[1.0, -1.0])]));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let m = peripheral_contraction(&mut rng, 8);
        let rep = SemigroupRep::powers(m.op);
        assert_eq!(fix_space(&rep, DEFAULT_RANK_TOL).unwrap().dim(), m.fixed_dim);
        assert_eq!(range_space(&rep, DEFAULT_RANK_TOL).unwrap().dim(), 8 - m.fixed_dim);
    }
}

#[test]
fn separation_on_reference_operators() {
    let (sep, _, _) = separation_check(&swap(), DEFAULT_RANK_TOL).unwrap();
    assert!(sep.separates && sep.witness_coefficients.is_none());
    let (sep, _, _) = separation_check(&identity(3), DEFAULT_RANK_TOL).unwrap();
    assert!(sep.separates);
    assert_eq!(sep.pairing_rank, 3);
}

#[test]
fn separation_witness_from_a_degenerate_pairing() {
    // two point masses against the constant function
    let g = Matrix::from_column_slice(2, 1, &[c(1.0), c(1.0)]);
    let sep = separation_from_pairing(&g, DEFAULT_RANK_TOL);
    assert!(!sep.separates);
    assert_eq!(sep.witness_coefficients.unwrap(), v(&[1.0, -1.0]));
    assert!(sep.witness_pairing.unwrap() <= 1e-12);
}

#[test]
fn projections_of_reference_operators() {
    let p = mean_ergodic_projection(&identity(3), DEFAULT_RANK_TOL).unwrap();
    assert!((p.matrix() - Matrix::identity(3, 3)).norm() < 1e-14);
    let p = mean_ergodic_projection(&swap(), DEFAULT_RANK_TOL).unwrap();
    let want = Matrix::from_element(2, 2, c(0.5));
    assert!((p.matrix() - want).norm() < 1e-14);
}

#[test]
fn jordan_block_is_not_mean_ergodic() {
    let jordan = rep_of(2, &[1.0, 1.0, 0.0, 1.0]);
    match mean_ergodic_projection(&jordan, DEFAULT_RANK_TOL) {
        Err(Error::NotMeanErgodic(msg)) => assert!(msg.contains("principal angle")),
        other => panic!("expected NotMeanErgodic, got {other:?}"),
    }
    let (sep, _, _) = separation_check(&jordan, DEFAULT_RANK_TOL).unwrap();
    assert!(!sep.separates);
}

#[test]
fn zero_element_checks() {
    let z = zero_element_check(&Matrix::identity(2, 2), &identity(2), 1e-12).unwrap();
    assert!(z.passes && z.left == 0.0 && z.right == 0.0 && z.idempotence == 0.0);
    let p = mean_ergodic_projection(&swap(), DEFAULT_RANK_TOL).unwrap();
    let z = zero_element_check(p.matrix(), &swap(), 1e-12).unwrap();
    assert!(z.passes);
    let z = zero_element_check(&Matrix::identity(2, 2), &swap(), 1e-12).unwrap();
    assert!(!z.passes);
    assert_abs_diff_eq!(z.right, 2.0, epsilon = 1e-12);
    assert!(zero_element_check(&Matrix::identity(3, 3), &swap(), 1e-12).is_err());
}

#[test]
fn orbit_subspaces() {
    let x = v(&[0.3, -1.0, 2.0]);
    assert!(same_span(&orbit_subspace(&identity(3), &x, DEFAULT_RANK_TOL).unwrap(), std::slice::from_ref(&x)));
    assert_eq!(orbit_subspace(&swap(), &v(&[1.0, 0.0]), DEFAULT_RANK_TOL).unwrap().dim(), 2);
    let diag = rep_of(2, &[1.0, 0.0, 0.0, 0.5]);
    assert!(same_span(&orbit_subspace(&diag, &v(&[1.0, 0.0]), DEFAULT_RANK_TOL).unwrap(), &[v(&[1.0, 0.0])]));
    assert!(orbit_subspace(&swap(), &v(&[0.0, 0.0]), DEFAULT_RANK_TOL).unwrap().is_empty());
}

#[test]
fn battery_on_reference_operators() {
    let paths = [NetPath::cesaro_dyadic(1..=12)];
    let report = equivalence_battery(&swap(), None, &paths, &BatteryOptions::default()).unwrap();
    assert!(report.consistent);
    assert!((1..=8).all(|id| report.holds(id) == Some(true)));
    assert!((report.projection.unwrap() - Matrix::from_element(2, 2, c(0.5))).norm() < 1e-14);

    let report = equivalence_battery(&identity(3), None, &default_paths(&identity(3)), &BatteryOptions::default()).unwrap();
    assert!((1..=8).all(|id| report.holds(id) == Some(true)));
    assert!((report.projection.unwrap() - Matrix::identity(3, 3)).norm() < 1e-14);
}

#[test]
fn fixed_vectors_are_local() {
    // Y_x = span{x} and the Cesàro means leave x alone
    let x = v(&[1.0, 1.0]);
    let y = orbit_subspace(&swap(), &x, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(y.dim(), 1);
    for n in [1, 7, 100, 5000] {
        let a = cesaro(&swap(), n, &x).unwrap();
        assert!((a - &x).norm() <= 1e-15 * n as f64);
    }
    let report =
        equivalence_battery(&swap(), Some(&x), &[NetPath::cesaro_dyadic(1..=8)], &BatteryOptions::default()).unwrap();
    let pv = report.per_vector.unwrap();
    assert_eq!(pv.orbit_dim, 1);
    assert!(pv.conditions.iter().all(|c| c.holds == Some(true)));
}

#[test]
fn finite_group_and_time_batteries() {
    let p = DenseOperator::from_real_rows(3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
    let p2 = DenseOperator::new(p.matrix() * p.matrix()).unwrap();
    let rep = SemigroupRep::finite_group(vec![DenseOperator::identity(3), p, p2]).unwrap();
    let report = equivalence_battery(&rep, None, &default_paths(&rep), &BatteryOptions::default()).unwrap();
    assert!((1..=8).all(|id| report.holds(id) == Some(true)));
    assert_eq!(report.fix_basis.dim(), 1);

    // rotation generator plus a damped direction
    let gen = Matrix::from_diagonal(&Vector::from_vec(vec![c(0.0), C64::new(0.0, 2.0), c(-1.0)]));
    let rep = SemigroupRep::one_parameter(DenseOperator::new(gen).unwrap(), 16.0).unwrap();
    let opts = BatteryOptions { net_tol: 1e-2, ..Default::default() };
    let report = equivalence_battery(&rep, None, &default_paths(&rep), &opts).unwrap();
    assert!((1..=8).all(|id| report.holds(id) == Some(true)));
    assert_eq!(report.fix_basis.dim(), 1);
}

#[test]
fn report_serializes() {
    let report = equivalence_battery(&swap(), None, &[NetPath::cesaro_dyadic(1..=4)], &BatteryOptions::default()).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["conditions"].as_array().unwrap().len(), 8);
    assert_eq!(json["fix_basis"]["vectors"].as_array().unwrap().len(), 1);
}

#[test]
fn random_contractions_satisfy_every_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for draw in 0..100 {
        let d = 2 + draw % 15;
        let m = peripheral_contraction(&mut rng, d);
        let rep = SemigroupRep::powers(m.op.clone()).with_bound(1.0).unwrap();
        let paths = [NetPath::cesaro_dyadic(4..=20)];
        let report = equivalence_battery(&rep, None, &paths, &BatteryOptions::default()).unwrap();
        assert!((1..=8).all(|id| report.holds(id) == Some(true)), "draw {draw}");
        let p = report.projection.unwrap();
        assert!((p - &m.projection).norm() <= 1e-8, "draw {draw}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_splits_fix_and_range(seed in 0u64..100_000, d in 2usize..9, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = bounded_abelian(&mut rng, d, k);
        let rep = SemigroupRep::abelian(model.generators.clone()).unwrap();
        let p = mean_ergodic_projection(&rep, DEFAULT_RANK_TOL).unwrap();
        prop_assert!((p.matrix() - &model.projection).norm() <= 1e-8);
        for f in &fix_space(&rep, DEFAULT_RANK_TOL).unwrap().vectors {
            prop_assert!((p.apply(f).unwrap() - f).norm() <= 1e-9);
        }
        for w in &range_space(&rep, DEFAULT_RANK_TOL).unwrap().vectors {
            prop_assert!(p.apply(w).unwrap().norm() <= 1e-9);
        }
    }

    #[test]
    fn battery_verdicts_agree_on_orbits(seed in 0u64..100_000, d in 2usize..7, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = bounded_abelian(&mut rng, d, k);
        let rep = SemigroupRep::abelian(model.generators.clone()).unwrap();
        let x = random_vector(&mut rng, d);
        let report = equivalence_battery(&rep, Some(&x), &default_paths(&rep), &BatteryOptions::default()).unwrap();
        prop_assert!(report.consistent);
        prop_assert!((1..=8).all(|id| report.holds(id) == Some(true)));
        let pv = report.per_vector.unwrap();
        prop_assert!(pv.consistent && pv.orbit_dim >= 1 && pv.orbit_dim <= d);
    }
}

#[test]
fn cesaro_scheme_uses_the_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let m = peripheral_contraction(&mut rng, 5);
    let rep = SemigroupRep::powers(m.op);
    let a = crate::nets::net_matrix(&NetScheme::Cesaro { n: 1 << 20 }, &rep).unwrap();
    let p = mean_ergodic_projection(&rep, DEFAULT_RANK_TOL).unwrap();
    assert!(spectral_norm(&(a - p.matrix())) <= 1e-3);
}
