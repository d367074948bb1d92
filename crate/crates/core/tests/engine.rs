mod common;

use bitmm::bitmatrix::{self, interleave};
use bitmm::engine::{self, Basis};
use bitmm::{Algo, BitMatrix, BmmError, Builtin, LayerPlan, OpCounter, Operand, Semiring, TensorLayout};
use common::{interleaved_position, naive_boolean, naive_gf2, naive_kron_apply, sparse, tensor_bits};
use proptest::prelude::*;

const GF2: Semiring = Semiring::Gf2XorAnd;
const FAST: [Algo; 3] = [Algo::StrassenWinograd, Algo::AltSelfInverse, Algo::AltChaining];

fn random_pair(n: usize, seed: u64) -> (BitMatrix, BitMatrix) {
    (BitMatrix::random(n, n, seed).unwrap(), BitMatrix::random(n, n, seed ^ 0x5555).unwrap())
}

#[test]
fn interleaved_positions_match_definition() {
    for levels in 0..3 {
        let n = 64 << levels;
        let m = BitMatrix::random(n, n, levels as u64 + 40).unwrap();
        for (operand, transposed) in [(Operand::Left, false), (Operand::Right, true), (Operand::Result, false)] {
            let v = interleave(&m, levels, operand).unwrap();
            assert_eq!(v.layout(), TensorLayout::Interleaved { levels, operand });
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(v.bit(interleaved_position(i, j, levels, transposed)), m.get(i, j).unwrap());
                }
            }
        }
    }
}

#[test]
fn cubic_matches_naive_on_odd_shapes() {
    for (m, k, n, seed) in [(1, 1, 1, 0), (3, 70, 5, 1), (65, 63, 129, 2), (130, 1, 64, 3), (64, 64, 64, 4)] {
        let a = BitMatrix::random(m, k, seed).unwrap();
        let b = BitMatrix::random(k, n, seed + 100).unwrap();
        assert_eq!(engine::multiply_cubic(&a, &b, GF2).unwrap(), naive_gf2(&a, &b));
        let sa = sparse(m, k, 0.1, seed);
        let sb = sparse(k, n, 0.1, seed + 1);
        let want = naive_boolean(&sa, &sb);
        assert_eq!(engine::multiply_cubic(&sa, &sb, Semiring::BooleanOrAnd).unwrap(), want);
        assert_eq!(engine::multiply_boolean_reference(&sa, &sb, 2).unwrap(), want);
        assert_eq!(engine::multiply_cubic_with(&a, &b, GF2, 3).unwrap(), naive_gf2(&a, &b));
    }
}

#[test]
fn kernel_matches_naive_block_product() {
    for seed in 0..4 {
        let a = BitMatrix::random(64, 64, seed).unwrap();
        let b = if seed == 3 { sparse(64, 64, 0.02, 9) } else { BitMatrix::random(64, 64, seed + 10).unwrap() };
        let bt = b.transpose();
        for (ring, want) in [(GF2, naive_gf2(&a, &b)), (Semiring::BooleanOrAnd, naive_boolean(&a, &b))] {
            let got = engine::kernel64(a.words(), bt.words(), ring);
            assert_eq!(BitMatrix::from_words(64, 64, got.to_vec()).unwrap(), want);
        }
    }
}

#[test]
fn fast_algorithms_match_naive_at_small_sizes() {
    for levels in 0..3 {
        let n = 64 << levels;
        let (a, b) = random_pair(n, levels as u64);
        let want = naive_gf2(&a, &b);
        for algo in FAST {
            let plan = LayerPlan::for_size(n, 2).unwrap();
            assert_eq!(engine::multiply(&a, &b, algo, &plan, GF2, None).unwrap(), want, "{algo} n={n}");
        }
    }
}

fn split(levels: usize) -> impl Strategy<Value = (usize, usize, usize)> {
    (0..=levels).prop_flat_map(move |h| (Just(h), 0..=levels - h)).prop_map(move |(h, s)| (h, s, levels - h - s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_plan_gives_the_cubic_product(
        (levels, (h, s, p)) in (0usize..4).prop_flat_map(|l| (Just(l), split(l))),
        seed in any::<u64>(),
        workers in 1usize..4,
        algo in prop::sample::select(FAST.to_vec()),
    ) {
        let n = 64 << levels;
        let (a, b) = random_pair(n, seed);
        let plan = LayerPlan::new(h, s, p, workers).unwrap();
        let want = engine::multiply_cubic(&a, &b, GF2).unwrap();
        let counter = OpCounter::new();
        let got = engine::multiply(&a, &b, algo, &plan, GF2, Some(&counter)).unwrap();
        prop_assert_eq!(got, want);
        prop_assert_eq!(counter.snapshot().kernel_invocations, 7u64.pow(levels as u32));
    }

    #[test]
    fn structured_inputs(levels in 0usize..3, kind in 0usize..4, seed in any::<u64>()) {
        let n = 64 << levels;
        let a = match kind {
            0 => BitMatrix::identity(n).unwrap(),
            1 => BitMatrix::zeros(n, n).unwrap(),
            2 => sparse(n, n, 0.01, seed),
            _ => BitMatrix::from_fn(n, n, |_, _| true).unwrap(),
        };
        let b = BitMatrix::random(n, n, seed).unwrap();
        let plan = LayerPlan::for_size(n, 1).unwrap();
        for algo in FAST {
            prop_assert_eq!(
                engine::multiply(&a, &b, algo, &plan, GF2, None).unwrap(),
                engine::multiply_cubic(&a, &b, GF2).unwrap()
            );
            prop_assert_eq!(
                engine::multiply(&b, &a, algo, &plan, GF2, None).unwrap(),
                engine::multiply_cubic(&b, &a, GF2).unwrap()
            );
        }
    }
}

fn linear_words(bilinear: u64, levels: u32) -> u64 {
    bilinear * (7u64.pow(levels) - 4u64.pow(levels)) / 3 * 64
}

#[test]
fn counters_follow_closed_forms() {
    for levels in 1..=4usize {
        let n = 64 << levels;
        let (a, b) = random_pair(n, 3);
        for h in 0..=levels.min(2) {
            for s in 0..=levels - h {
                let p = levels - h - s;
                let plan = LayerPlan::new(h, s, p, 2).unwrap();
                let rest = (levels - h) as u32;
                let sub_words = 64u64 << (2 * rest);
                for (algo, bilinear, w_gamma) in
                    [(Algo::AltSelfInverse, 12, 10u64), (Algo::AltChaining, 12, 12), (Algo::StrassenWinograd, 15, 0)]
                {
                    let c = OpCounter::new();
                    engine::multiply(&a, &b, algo, &plan, GF2, Some(&c)).unwrap();
                    let got = c.snapshot();
                    let tag = format!("{algo} h={h} s={s} p={p}");
                    assert_eq!(got.kernel_invocations, 7u64.pow(levels as u32), "{tag}");
                    assert_eq!(got.word_ands, 7u64.pow(levels as u32) * 4096, "{tag}");
                    if algo == Algo::StrassenWinograd {
                        // Host levels fold into the serial recursion.
                        assert_eq!(got.word_xors, linear_words(15, levels as u32), "{tag}");
                        assert_eq!((got.basis_xors, got.host_xors), (0, 0), "{tag}");
                        continue;
                    }
                    let hh = h as u32;
                    assert_eq!(got.word_xors, 7u64.pow(hh) * linear_words(bilinear, rest), "{tag}");
                    assert_eq!(got.basis_xors, 6 * 4u64.pow(levels as u32 - 1) * levels as u64 * 64, "{tag}");
                    let host = sub_words * (2 * (10u64.pow(hh) - 7u64.pow(hh)) + w_gamma.pow(hh));
                    assert_eq!(got.host_xors, if h == 0 { 0 } else { host }, "{tag}");
                }
            }
        }
    }
}

#[test]
fn multiply_alt_on_sub_sized_operands() {
    let d = Builtin::AltSelfInverse.decomposition();
    let plan = LayerPlan::new(2, 1, 1, 2).unwrap();
    let n = 64 << 2;
    let (a, b) = random_pair(n, 8);
    let a_hat = engine::basis_change(interleave(&a, 2, Operand::Left).unwrap(), &d, Basis::Phi, 2).unwrap();
    let b_hat = engine::basis_change(interleave(&b, 2, Operand::Right).unwrap(), &d, Basis::Psi, 2).unwrap();
    let c = OpCounter::new();
    let c_hat = engine::multiply_alt(&a_hat, &b_hat, &d, &plan, Some(&c)).unwrap();
    assert_eq!(c.snapshot().kernel_invocations, 49);
    let back = engine::basis_change(c_hat, &d, Basis::Chi, 2).unwrap();
    assert_eq!(bitmatrix::deinterleave(&back, 2, Operand::Result).unwrap(), naive_gf2(&a, &b));

    let three = interleave(&BitMatrix::random(512, 512, 1).unwrap(), 3, Operand::Left).unwrap();
    assert!(matches!(engine::multiply_alt(&three, &three.clone(), &d, &plan, None), Err(BmmError::Layout(_))));
}

#[test]
fn basis_change_is_a_kronecker_power() {
    for b in [Builtin::AltSelfInverse, Builtin::AltChaining] {
        let d = b.decomposition();
        let m = BitMatrix::random(256, 256, 12).unwrap();
        for (operand, basis, factor) in
            [(Operand::Left, Basis::Phi, d.phi()), (Operand::Right, Basis::Psi, d.psi()), (Operand::Result, Basis::Chi, d.chi())]
        {
            let v = interleave(&m, 2, operand).unwrap();
            let want = naive_kron_apply(&[factor.clone(), factor.clone()], 4096, &tensor_bits(&v));
            let c = OpCounter::new();
            let got = engine::basis_change_with(v.clone(), &d, basis, 2, 2, Some(&c)).unwrap();
            assert_eq!(tensor_bits(&got), want, "{b} {basis:?}");
            assert_eq!(c.snapshot().basis_xors, 2 * 2 * 4 * 64);
            let undone = engine::basis_change_inverse(got, &d, basis, 2, 1).unwrap();
            assert_eq!(undone, v);
        }
    }
}

#[test]
fn self_inverse_basis_changes_are_involutions() {
    let d = Builtin::AltSelfInverse.decomposition();
    let m = BitMatrix::random(512, 512, 4).unwrap();
    for (operand, basis) in [(Operand::Left, Basis::Phi), (Operand::Right, Basis::Psi), (Operand::Result, Basis::Chi)] {
        let v = interleave(&m, 3, operand).unwrap();
        let once = engine::basis_change(v.clone(), &d, basis, 3).unwrap();
        assert_ne!(once, v);
        assert_eq!(engine::basis_change(once, &d, basis, 3).unwrap(), v);
    }
}

#[test]
fn basis_change_checks_operand_tags() {
    let d = Builtin::AltSelfInverse.decomposition();
    let v = interleave(&BitMatrix::random(128, 128, 1).unwrap(), 1, Operand::Left).unwrap();
    assert!(engine::basis_change(v.clone(), &d, Basis::Psi, 1).is_err());
    assert!(engine::basis_change(v.clone(), &d, Basis::Phi, 2).is_err());
    assert!(engine::to_alt_basis(&BitMatrix::random(128, 128, 1).unwrap(), &d, &LayerPlan::for_size(128, 1).unwrap(), Operand::Result).is_err());
}

#[test]
fn chaining_stays_in_the_alternative_basis() {
    let d = Builtin::AltChaining.decomposition();
    for (n, plan) in [(256, LayerPlan::for_size(256, 2).unwrap()), (512, LayerPlan::new(1, 1, 1, 3).unwrap())] {
        let mats: Vec<BitMatrix> = (0..4).map(|k| BitMatrix::random(n, n, 70 + k).unwrap()).collect();
        let mut hats = vec![engine::to_alt_basis(&mats[0], &d, &plan, Operand::Left).unwrap()];
        for m in &mats[1..] {
            hats.push(engine::to_alt_basis(m, &d, &plan, Operand::Right).unwrap());
        }
        let c = OpCounter::new();
        let prod_hat = engine::chain_multiply(&hats, &d, &plan, Some(&c)).unwrap();
        let got = engine::from_alt_basis(prod_hat, &d, &plan).unwrap();
        let want = mats[1..].iter().fold(mats[0].clone(), |acc, m| engine::multiply_cubic(&acc, m, GF2).unwrap());
        assert_eq!(got, want, "n={n}");
        assert_eq!(c.snapshot().kernel_invocations, 3 * 7u64.pow(plan.outer_levels() as u32));
    }
    let si = Builtin::AltSelfInverse.decomposition();
    let plan = LayerPlan::for_size(128, 1).unwrap();
    let x = engine::to_alt_basis(&BitMatrix::random(128, 128, 1).unwrap(), &si, &plan, Operand::Left).unwrap();
    assert!(matches!(engine::chain_multiply(&[x.clone(), x], &si, &plan, None), Err(BmmError::Unsupported(_))));
}

#[test]
fn semiring_soundness() {
    let (a, b) = random_pair(128, 1);
    let plan = LayerPlan::for_size(128, 1).unwrap();
    for algo in FAST {
        assert!(matches!(
            engine::multiply(&a, &b, algo, &plan, Semiring::BooleanOrAnd, None),
            Err(BmmError::Unsupported(_))
        ));
    }
    assert!(engine::multiply(&a, &b, Algo::BooleanCubic, &plan, GF2, None).is_err());
    let sa = sparse(128, 128, 0.05, 1);
    let sb = sparse(128, 128, 0.05, 2);
    let want = naive_boolean(&sa, &sb);
    for algo in [Algo::Cubic, Algo::BooleanCubic] {
        assert_eq!(engine::multiply(&sa, &sb, algo, &plan, Semiring::BooleanOrAnd, None).unwrap(), want);
    }
    // Cancellation: over GF(2) the all-ones square is zero at even n.
    let ones = BitMatrix::from_fn(128, 128, |_, _| true).unwrap();
    assert!(engine::multiply(&ones, &ones, Algo::AltSelfInverse, &plan, GF2, None).unwrap().count_ones() == 0);
    assert_eq!(engine::multiply(&ones, &ones, Algo::Cubic, &plan, Semiring::BooleanOrAnd, None).unwrap(), ones);
}

#[test]
fn shape_and_plan_errors() {
    let plan = LayerPlan::for_size(128, 1).unwrap();
    let (a, _) = random_pair(128, 1);
    let small = BitMatrix::random(64, 64, 1).unwrap();
    let odd = BitMatrix::random(96, 96, 1).unwrap();
    for algo in FAST {
        assert!(matches!(engine::multiply(&a, &small, algo, &plan, GF2, None), Err(BmmError::Shape(_))));
        assert!(matches!(engine::multiply(&odd, &odd, algo, &plan, GF2, None), Err(BmmError::Shape(_))));
        assert!(matches!(engine::multiply(&small, &small, algo, &plan, GF2, None), Err(BmmError::Plan(_))));
    }
    assert!(LayerPlan::new(0, 0, 0, 0).is_err());
    assert!(LayerPlan::resolve(256, Some(3), None, None, 1).is_err());
}

#[test]
fn worker_count_does_not_change_results_or_counts() {
    let (a, b) = random_pair(1024, 21);
    let want = engine::multiply_cubic(&a, &b, GF2).unwrap();
    let mut counts = Vec::new();
    for workers in [1, 2, 3, 5] {
        for algo in [Algo::AltChaining, Algo::StrassenWinograd] {
            let c = OpCounter::new();
            let plan = LayerPlan::for_size(1024, workers).unwrap();
            assert_eq!(engine::multiply(&a, &b, algo, &plan, GF2, Some(&c)).unwrap(), want);
            counts.push((algo, c.snapshot()));
        }
        assert_eq!(engine::multiply_cubic_with(&a, &b, GF2, workers).unwrap(), want);
    }
    for pair in counts.chunks(2).collect::<Vec<_>>().windows(2) {
        assert_eq!(pair[0], pair[1]);
    }
}
