// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::koopman::{koopman_abel, koopman_cesaro, koopman_folner};
use super::*;
use crate::operators::{turn, Character, DenseOperator, DynamicsMap, Formula, KoopmanOperator, Observable, RepKind};
use crate::random::{bounded_abelian, peripheral_contraction, random_vector};
use crate::space::{PNorm, SampleGrid, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn swap() -> SemigroupRep {
    SemigroupRep::powers(DenseOperator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap())
}

fn peripheral(seed: u64, d: usize) -> (SemigroupRep, crate::random::PeripheralModel, Vector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = peripheral_contraction(&mut rng, d);
    let x = random_vector(&mut rng, d);
    (SemigroupRep::powers(model.op.clone()), model, x)
}

#[test]
fn swap_cesaro_means() {
    let rep = swap();
    let x = Vector::from_vec(vec![c(1.0), c(0.0)]);
    let a2 = cesaro(&rep, 2, &x).unwrap();
    assert_eq!(a2, Vector::from_vec(vec![c(0.5), c(0.5)]));
    let a3 = cesaro(&rep, 3, &x).unwrap();
    assert_abs_diff_eq!((a3[0] - c(2.0 / 3.0)).norm(), 0.0, epsilon = 1e-15);
    // odd lengths leave a 1/n imbalance
    let a1001 = cesaro(&rep, 1001, &x).unwrap();
    assert_abs_diff_eq!(a1001[0].re - a1001[1].re, 1.0 / 1001.0, epsilon = 1e-14);
}

#[test]
fn binary_splitting_matches_direct_iteration() {
    for seed in 0..5 {
        let (rep, _, x) = peripheral(seed, 5);
        let t = rep.single_operator().unwrap();
        for n in [1, 2, 3, 7, 64, 100, 513, 1024] {
            let direct = cesaro_direct(&t, n, &x).unwrap();
            let split = cesaro_operator(t.matrix(), n) * &x;
            assert!((direct - split).norm() <= 1e-10 * x.norm(), "seed {seed} n {n}");
        }
    }
}

#[test]
fn long_cesaro_converges_to_the_projection() {
    for seed in 0..5 {
        let (rep, model, x) = peripheral(seed, 6);
        let px = &model.projection * &x;
        let e_small = (cesaro(&rep, 1 << 8, &x).unwrap() - &px).norm();
        let e_large = (cesaro(&rep, 1 << 16, &x).unwrap() - &px).norm();
        assert!(e_large < 1e-3 * x.norm().max(1.0), "seed {seed}: {e_large}");
        assert!(e_large <= e_small + 1e-12);
    }
}

#[test]
fn zero_length_nets_are_contract_errors() {
    let x = Vector::from_vec(vec![c(1.0), c(0.0)]);
    assert!(cesaro(&swap(), 0, &x).is_err());
    assert!(abel(&swap(), 1.0, 1e-9, &x).is_err());
    assert!(abel(&swap(), 0.5, 0.0, &x).is_err());
    assert!(evaluate(&NetScheme::Folner { set: FolnerSet::Interval { start: 0, len: 0 } }, &swap(), &x).is_err());
    let short = Vector::from_vec(vec![c(1.0)]);
    assert!(cesaro(&swap(), 4, &short).is_err());
}

#[test]
fn abel_term_count_is_minimal() {
    // 0.9^21 > 0.1 >= 0.9^22
    assert_eq!(abel_terms(0.9, 0.1, 1.0), 22);
    assert_eq!(abel_terms(0.9, 2.0, 1.0), 0);
    for (r, eps, scale) in [(0.5, 1e-12, 3.0), (0.99, 1e-10, 1.0), (0.999, 1e-9, 7.5)] {
        let n = abel_terms(r, eps, scale);
        assert!(scale * r.powi(n as i32) <= eps);
        assert!(scale * r.powi(n as i32 - 1) > eps);
    }
}

#[test]
fn abel_mean_solves_the_resolvent_equation() {
    for seed in 0..5 {
        let (rep, model, x) = peripheral(seed, 4);
        let r = 0.95;
        let got = abel(&rep, r, 1e-13, &x).unwrap();
        let d = x.len();
        let lhs = (crate::operators::Matrix::identity(d, d) - model.op.matrix() * c(r)) * &got.value;
        let rhs = &x * c(1.0 - r);
        assert!((lhs - rhs).norm() <= 1e-11 * x.norm().max(1.0), "seed {seed}");
        assert!(got.tail_bound <= 1e-13);
    }
}

#[test]
fn whole_group_average_is_invariant() {
    // Z/3 acting by cyclic shifts of C^3
    let p = DenseOperator::from_real_rows(3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
    let p2 = DenseOperator::new(p.matrix() * p.matrix()).unwrap();
    let rep = SemigroupRep::finite_group(vec![DenseOperator::identity(3), p, p2]).unwrap();
    let x = Vector::from_vec(vec![c(3.0), c(0.0), c(0.0)]);
    let avg = folner_average(&rep, &FolnerSet::WholeGroup, &x).unwrap();
    for j in 0..3 {
        assert_abs_diff_eq!((avg[j] - c(1.0)).norm(), 0.0, epsilon = 1e-15);
    }
    let scheme = NetScheme::Folner { set: FolnerSet::WholeGroup };
    let ctx = NormContext::Coord(PNorm::Two);
    for g in 0..3 {
        let el = GroupElement::Member(g);
        assert!(invariance_defect(&scheme, &rep, &el, &x, Side::Right, &ctx).unwrap() < 1e-14);
        assert!(invariance_defect(&scheme, &rep, &el, &x, Side::Left, &ctx).unwrap() < 1e-14);
    }
}

#[test]
fn initial_interval_is_bitwise_cesaro() {
    let (rep, _, x) = peripheral(11, 4);
    for n in [1, 5, 1000, 5000] {
        let a = folner_average(&rep, &FolnerSet::Interval { start: 0, len: n }, &x).unwrap();
        assert_eq!(a, cesaro(&rep, n, &x).unwrap());
    }
}

#[test]
fn folner_sequences_require_growth() {
    assert!(FolnerSequence::initial_intervals(&[1, 2, 4]).is_ok());
    assert!(FolnerSequence::initial_intervals(&[4, 4]).is_err());
    assert!(FolnerSequence::initial_intervals(&[]).is_err());
    let seq = FolnerSequence::initial_intervals(&[2, 8]).unwrap();
    assert!(seq.get(2).is_err());
    assert_eq!(seq.get(1).unwrap(), &FolnerSet::Interval { start: 0, len: 8 });
}

#[test]
fn symmetric_difference_of_boxes() {
    let b = FolnerSet::Box { start: vec![0, 0], lens: vec![4, 5] };
    // overlap 3 x 5 of 20
    let got = b.relative_symmetric_difference(&GroupElement::Multi(vec![1, 0])).unwrap();
    assert_abs_diff_eq!(got, 2.0 * 5.0 / 20.0, epsilon = 1e-15);
    let far = b.relative_symmetric_difference(&GroupElement::Multi(vec![9, 9])).unwrap();
    assert_abs_diff_eq!(far, 2.0, epsilon = 1e-15);
    assert!(b.relative_symmetric_difference(&GroupElement::Step(1)).is_err());
}

#[test]
fn box_average_matches_product_of_interval_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = bounded_abelian(&mut rng, 4, 2);
    let rep = SemigroupRep::abelian(model.generators.clone()).unwrap();
    let x = random_vector(&mut rng, 4);
    let set = FolnerSet::Box { start: vec![1, 2], lens: vec![3, 4] };
    let got = folner_average(&rep, &set, &x).unwrap();
    let mut terms = Vec::new();
    for a in 1..4u64 {
        for b in 2..6u64 {
            terms.push(rep.apply(&GroupElement::Multi(vec![a, b]), &x).unwrap());
        }
    }
    let want = crate::space::pairwise_sum_vectors(&terms).unwrap() / c(12.0);
    assert!((got - want).norm() <= 1e-12 * x.norm() * model.bound);
}

#[test]
fn chain_identity_rule_stays_at_x() {
    let (rep, _, x) = peripheral(5, 3);
    let trace = convex_chain(&rep, ChainRule::Identity, 4, &x, true).unwrap();
    assert!(trace.values.iter().all(|v| v == &x));
    assert_eq!(trace.step_lengths, vec![1; 4]);
}

#[test]
fn chain_step_lengths_double_per_round() {
    assert_eq!(
        (0..6).map(|j| ChainRule::Doubling.step_length(j, 2)).collect::<Vec<_>>(),
        vec![2, 4, 4, 8, 8, 16]
    );
    assert_eq!(
        (0..4).map(|j| ChainRule::Doubling.step_length(j, 1)).collect::<Vec<_>>(),
        vec![2, 4, 8, 16]
    );
}

#[test]
fn chain_refuses_non_abelian_carriers() {
    let rep = SemigroupRep::one_parameter(DenseOperator::from_real_rows(1, &[-1.0]).unwrap(), 1.0).unwrap();
    let x = Vector::from_vec(vec![c(1.0)]);
    assert!(convex_chain(&rep, ChainRule::Doubling, 2, &x, false).is_err());
}

#[test]
fn time_average_of_a_rotation_generator() {
    // generator i*2pi*mu on C: (1/s) int_0^s e^{2 pi i mu t} dt in closed form
    let mu = 0.37;
    let gen = DenseOperator::new(crate::operators::Matrix::from_element(1, 1, C64::new(0.0, 2.0 * std::f64::consts::PI * mu)))
        .unwrap();
    let rep = SemigroupRep::one_parameter(gen, 10.0).unwrap();
    let x = Vector::from_vec(vec![c(1.0)]);
    let s = 7.5;
    let got = time_average(&rep, s, 0.5, &x).unwrap();
    let w = 2.0 * std::f64::consts::PI * mu;
    let want = (C64::new(0.0, w * s).exp() - c(1.0)) / C64::new(0.0, w * s);
    assert!((got.value[0] - want).norm() <= 1e-9);
    assert!(got.error_estimate <= DEFAULT_QUAD_TOL);

    // modulating by the opposite frequency cancels the rotation
    let flat = rep.modulated(Character::Frequency { r: -mu }).unwrap();
    let got = time_average(&flat, s, 0.5, &x).unwrap();
    assert!((got.value[0] - c(1.0)).norm() <= 1e-12);
}

#[test]
fn koopman_cesaro_of_a_character() {
    // rotation by alpha sends e_1 to e^{2 pi i alpha} e_1
    let alpha = 0.2;
    let s = Arc::new(KoopmanOperator::new(DynamicsMap::rotation(alpha).unwrap()));
    let e1 = Observable::scalar(Formula::Fourier { modes: vec![(1, c(1.0))] });
    let grid = Arc::new(SampleGrid::circle(16).unwrap());
    let n = 37;
    let theta = 0.05;
    let avg = koopman_cesaro(&s, n, theta, &e1).unwrap().sample(&grid).unwrap();
    let z = turn(alpha + theta);
    let factor = (0..n).map(|j| z.powu(j as u32)).sum::<C64>() / c(n as f64);
    for (i, p) in grid.points().iter().enumerate() {
        let want = factor * turn(p[0]);
        assert!((avg.at(i)[0] - want).norm() < 1e-13);
    }
    // shifted interval: lambda^start S^start A
    let shifted = koopman_folner(&s, 5, n, theta, &e1).unwrap().sample(&grid).unwrap();
    let lead = turn(5.0 * (alpha + theta));
    for i in 0..grid.len() {
        assert!((shifted.at(i)[0] - lead * avg.at(i)[0]).norm() < 1e-13);
    }
    let (ab, terms) = koopman_abel(&s, 0.5, 1e-14, 0.0, &e1, 1.0).unwrap();
    assert!(terms >= 47);
    let want = c(0.5) / (c(1.0) - turn(alpha) * 0.5);
    assert!((ab.eval([0.0, 0.0]).unwrap()[0] - want).norm() < 1e-13);
}

fn small_rep() -> impl Strategy<Value = (u64, usize)> {
    (0u64..10_000, 2usize..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cesaro_telescopes((seed, d) in small_rep(), n in 1u64..300) {
        // A_n x - A_n S x = (x - S^n x) / n
        let (rep, model, x) = peripheral(seed, d);
        let sx = model.op.apply(&x).unwrap();
        let lhs = cesaro(&rep, n, &x).unwrap() - cesaro(&rep, n, &sx).unwrap();
        let snx = crate::operators::power_apply(&model.op, n, &x).unwrap();
        let rhs = (&x - snx) / c(n as f64);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * x.norm().max(1.0) * rep.bound());
    }

    #[test]
    fn interval_defect_obeys_the_folner_bound((seed, d) in small_rep(), n in 1u64..200, k in 1u64..50) {
        let (rep, _, x) = peripheral(seed, d);
        let set = FolnerSet::Interval { start: 0, len: n };
        let scheme = NetScheme::Folner { set: set.clone() };
        let g = GroupElement::Step(k);
        let ctx = NormContext::Coord(PNorm::Two);
        let defect = invariance_defect(&scheme, &rep, &g, &x, Side::Right, &ctx).unwrap();
        let bound = rep.bound() * x.norm() * set.relative_symmetric_difference(&g).unwrap();
        prop_assert!(defect <= bound * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn chain_weights_are_convex_and_reproduce_the_chain(seed in 0u64..10_000, k in 1usize..3, length in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = bounded_abelian(&mut rng, 3, k);
        let rep = if k == 1 {
            SemigroupRep::powers(model.generators[0].clone())
        } else {
            SemigroupRep::abelian(model.generators.clone()).unwrap()
        };
        let x = random_vector(&mut rng, 3);
        let trace = convex_chain(&rep, ChainRule::Doubling, length, &x, true).unwrap();
        let weights = trace.weights.unwrap();
        prop_assert_eq!(weights.len(), length + 1);
        for (w, v) in weights.iter().zip(&trace.values) {
            prop_assert!((w.total() - 1.0).abs() <= 1e-12);
            prop_assert!(w.terms.values().all(|&t| t > 0.0));
            let direct = w.apply(&rep, &x).unwrap();
            prop_assert!((direct - v).norm() <= 1e-10 * x.norm() * model.bound);
        }
    }

    #[test]
    fn time_average_splits_at_the_midpoint(seed in 0u64..10_000, s in 0.5f64..4.0) {
        // A_{2s} = (A_s + S(s) A_s) / 2
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = peripheral_contraction(&mut rng, 3);
        let log = crate::operators::Matrix::from_fn(3, 3, |i, j| model.op.matrix()[(i, j)] * 0.5)
            - crate::operators::Matrix::identity(3, 3);
        let gen = DenseOperator::new(log).unwrap();
        let rep = SemigroupRep::one_parameter(gen, 8.0).unwrap();
        let x = random_vector(&mut rng, 3);
        let whole = time_average(&rep, 2.0 * s, 0.25, &x).unwrap().value;
        let half = time_average(&rep, s, 0.25, &x).unwrap().value;
        let moved = rep.apply(&GroupElement::Time(s), &half).unwrap();
        let want = (half + moved) / c(2.0);
        prop_assert!((whole - want).norm() <= 1e-8 * x.norm() * rep.bound());
    }
}

#[test]
fn net_matrix_agrees_with_columnwise_evaluation() {
    let (rep, _, x) = peripheral(21, 4);
    for scheme in [NetScheme::Cesaro { n: 12 }, NetScheme::Cesaro { n: 3000 }, NetScheme::Abel { r: 0.8, tail_eps: 1e-14 }] {
        let m = net_matrix(&scheme, &rep).unwrap();
        let direct = evaluate(&scheme, &rep, &x).unwrap();
        assert!((m * &x - direct).norm() <= 1e-10 * x.norm(), "{scheme:?}");
    }
    assert!(matches!(rep.kind(), RepKind::Powers { .. }));
}
