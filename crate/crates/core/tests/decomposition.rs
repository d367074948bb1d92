mod common;

use bitmm::decomposition::{
    self, check_mutual_inverse, check_self_inverse, compose, kronecker, kronecker_triple, predicted_additions,
    verify_triple_product, weight_distribution, Axis, BilinearTriple, CostPart, Factor, Params,
};
use bitmm::{BitMatrix, Builtin, Decomposition, StraightLineProgram};
use common::displays::*;
use common::{matrix, naive_kron, naive_matvec, naive_triple_product};
use proptest::prelude::*;

fn sw_triple() -> BilinearTriple {
    BilinearTriple {
        zeta: matrix(&SW_ZETA),
        xi: matrix(&SW_XI),
        eta: matrix(&SW_ETA),
        params: Params { s: 2, t: 2, u: 2, r: 7 },
    }
}

#[test]
fn builtin_matrices_match_displays() {
    let si = Builtin::AltSelfInverse.decomposition();
    assert_eq!(si.phi(), &matrix(&SI_PHI));
    assert_eq!(si.psi(), &matrix(&SI_PHI));
    assert_eq!(si.chi(), &matrix(&SI_CHI));
    assert_eq!(si.alpha(), &matrix(&SI_ALPHA));
    assert_eq!(si.beta(), &matrix(&SI_BETA));
    assert_eq!(si.gamma(), &matrix(&SI_GAMMA));

    let ch = Builtin::AltChaining.decomposition();
    assert_eq!(ch.phi(), &matrix(&CH_PHI));
    assert_eq!(ch.psi(), &matrix(&CH_PHI));
    assert_eq!(ch.chi(), &matrix(&CH_CHI));
    assert_eq!(ch.alpha(), &matrix(&CH_ALPHA));
    assert_eq!(ch.beta(), &matrix(&CH_BETA));
    assert_eq!(ch.gamma(), &matrix(&CH_GAMMA));

    let sw = Builtin::StrassenWinograd.decomposition();
    assert!(sw.has_standard_bases());
    let t = compose(&sw).unwrap();
    assert_eq!(t, sw_triple());
}

#[test]
fn triple_products_hold_for_every_builtin() {
    assert!(verify_triple_product(&sw_triple()));
    assert!(naive_triple_product(&matrix(&SW_ZETA), &matrix(&SW_XI), &matrix(&SW_ETA), 2, 2, 2));
    for b in Builtin::ALL {
        let d = b.decomposition();
        let t = compose(&d).unwrap();
        let Params { s, t: tt, u, .. } = t.params;
        assert!(verify_triple_product(&t), "{b}");
        assert!(naive_triple_product(&t.zeta, &t.xi, &t.eta, s, tt, u), "{b}");
    }
}

#[test]
fn composition_is_the_matrix_product() {
    for b in [Builtin::AltSelfInverse, Builtin::AltChaining] {
        let d = b.decomposition();
        let t = compose(&d).unwrap();
        assert_eq!(t.zeta, common::naive_gf2(d.chi(), d.gamma()));
        assert_eq!(t.xi, common::naive_gf2(d.alpha(), d.phi()));
        assert_eq!(t.eta, common::naive_gf2(d.beta(), d.psi()));
    }
}

#[test]
fn basis_properties() {
    let si = Builtin::AltSelfInverse.decomposition();
    for m in [si.phi(), si.psi(), si.chi()] {
        assert!(check_self_inverse(m).unwrap());
    }
    assert_eq!(si.phi(), &si.chi().transpose());
    assert!(si.traits().self_inverse_bases);
    assert!(!si.traits().supports_chaining);

    let ch = Builtin::AltChaining.decomposition();
    assert!(check_mutual_inverse(ch.chi(), ch.phi()).unwrap());
    assert!(check_mutual_inverse(ch.chi(), ch.psi()).unwrap());
    assert!(!check_self_inverse(ch.phi()).unwrap());
    assert!(ch.traits().supports_chaining);
    assert!(!ch.traits().self_inverse_bases);

    let sw = Builtin::StrassenWinograd.decomposition();
    assert!(!check_mutual_inverse(sw.alpha(), sw.alpha()).unwrap_or(false));
}

#[test]
fn weight_multisets() {
    let si = Builtin::AltSelfInverse.decomposition();
    let ch = Builtin::AltChaining.decomposition();
    let small = vec![1, 1, 1, 1, 2, 2, 2];
    for d in [&si, &ch] {
        assert_eq!(weight_distribution(d.alpha(), Axis::Rows), small);
        assert_eq!(weight_distribution(d.beta(), Axis::Rows), small);
    }
    assert_eq!(weight_distribution(si.gamma(), Axis::Cols), small);
    assert_eq!(weight_distribution(ch.gamma(), Axis::Cols), vec![1, 1, 1, 1, 2, 3, 3]);
}

#[test]
fn program_addition_counts() {
    for b in [Builtin::AltSelfInverse, Builtin::AltChaining] {
        let d = b.decomposition();
        let counts: Vec<_> = Factor::ALL.iter().map(|&f| d.additions(f)).collect();
        assert_eq!(counts, [3, 3, 6, 2, 2, 2], "{b}");
    }
    let sw = Builtin::StrassenWinograd.decomposition();
    let bilinear: usize = [Factor::Alpha, Factor::Beta, Factor::Gamma].iter().map(|&f| sw.additions(f)).sum();
    assert_eq!(bilinear, 15);
    for b in Builtin::ALL {
        let d = b.decomposition();
        for f in Factor::ALL {
            assert!(d.slp(f).matches(d.matrix(f)), "{b} {}", f.name());
            assert_eq!(&d.slp(f).to_matrix(), d.matrix(f), "{b} {}", f.name());
        }
    }
}

#[test]
fn kronecker_closure() {
    let scalar = BilinearTriple {
        zeta: matrix(&["1"]),
        xi: matrix(&["1"]),
        eta: matrix(&["1"]),
        params: Params { s: 1, t: 1, u: 1, r: 1 },
    };
    assert!(verify_triple_product(&scalar));
    for b in Builtin::ALL {
        let t = compose(&b.decomposition()).unwrap();
        let with_scalar = kronecker_triple(&t, &scalar);
        assert!(verify_triple_product(&with_scalar), "{b}");
        let squared = kronecker_triple(&t, &t);
        let p = squared.params;
        assert_eq!((p.s, p.t, p.u), (4, 4, 4));
        assert_eq!(p.r, t.params.r * t.params.r);
        assert!(verify_triple_product(&squared), "{b}");
        assert!(naive_triple_product(&squared.zeta, &squared.xi, &squared.eta, 4, 4, 4), "{b}");
    }
    let mixed = kronecker_triple(
        &compose(&Builtin::AltSelfInverse.decomposition()).unwrap(),
        &compose(&Builtin::AltChaining.decomposition()).unwrap(),
    );
    assert!(verify_triple_product(&mixed));
}

#[test]
fn broken_triples_fail() {
    let mut t = sw_triple();
    t.zeta.set(0, 0, !t.zeta.get(0, 0).unwrap()).unwrap();
    assert!(!verify_triple_product(&t));
    assert!(!naive_triple_product(&t.zeta, &t.xi, &t.eta, 2, 2, 2));

    let mut t = compose(&Builtin::AltChaining.decomposition()).unwrap();
    t.eta.set(6, 2, !t.eta.get(6, 2).unwrap()).unwrap();
    assert!(!verify_triple_product(&t));
}

#[test]
fn rejected_constructions() {
    let si = Builtin::AltSelfInverse.decomposition();
    let mats = Factor::ALL.map(|f| si.matrix(f).clone());
    let slps = Factor::ALL.map(|f| si.slp(f).clone());

    let mut wrong_slp = slps.clone();
    wrong_slp[0] = StraightLineProgram::from_matrix(&matrix(&SI_BETA)).unwrap();
    assert!(Decomposition::new("x", Params { s: 2, t: 2, u: 2, r: 7 }, mats.clone(), wrong_slp).is_err());

    let mut singular = mats.clone();
    singular[3] = matrix(&["1000", "0100", "0010", "0010"]);
    let mut singular_slps = slps.clone();
    singular_slps[3] = StraightLineProgram::from_matrix(&singular[3]).unwrap();
    assert!(Decomposition::new("x", Params { s: 2, t: 2, u: 2, r: 7 }, singular, singular_slps).is_err());

    assert!(Decomposition::new("x", Params { s: 2, t: 2, u: 2, r: 8 }, mats, slps).is_err());
}

#[test]
fn predicted_costs() {
    let si = Builtin::AltSelfInverse.decomposition();
    for depth in 1..=6u32 {
        let lin = predicted_additions(&si, depth, CostPart::LinearCombinations).unwrap();
        assert_eq!(lin, 12 * (7u64.pow(depth) - 4u64.pow(depth)) / 3);
        let basis = predicted_additions(&si, depth, CostPart::BasisChanges).unwrap();
        assert_eq!(basis, 6 * 4u64.pow(depth - 1) * depth as u64);
    }
    // One level by hand: 12 additions on 1x1 blocks.
    assert_eq!(predicted_additions(&si, 1, CostPart::LinearCombinations).unwrap(), 12);
    let sw = Builtin::StrassenWinograd.decomposition();
    assert_eq!(predicted_additions(&sw, 2, CostPart::LinearCombinations).unwrap(), 15 * 11);
    assert_eq!(predicted_additions(&sw, 3, CostPart::BasisChanges).unwrap(), 0);
}

#[test]
fn text_dump_round_trips() {
    for b in Builtin::ALL {
        let d = b.decomposition();
        for f in Factor::ALL {
            let text = d.matrix(f).to_text();
            assert_eq!(&BitMatrix::from_text(&text).unwrap(), d.matrix(f));
            let program = d.slp(f).to_string();
            let parsed = StraightLineProgram::parse(d.matrix(f).cols(), d.matrix(f).rows(), &program).unwrap();
            assert!(parsed.matches(d.matrix(f)));
            assert_eq!(parsed.addition_count(), d.additions(f));
        }
    }
}

fn random_matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
    proptest::collection::vec(any::<bool>(), rows * cols)
        .prop_map(move |bits| BitMatrix::from_fn(rows, cols, |i, j| bits[i * cols + j]).unwrap())
}

proptest! {
    #[test]
    fn kronecker_matches_entrywise(a in random_matrix(3, 2), b in random_matrix(2, 4)) {
        prop_assert_eq!(kronecker(&a, &b), naive_kron(&a, &b));
    }

    #[test]
    fn programs_from_matrices_evaluate_correctly(
        (rows, cols) in (1usize..9, 1usize..9),
        seed in any::<u64>(),
    ) {
        let m = BitMatrix::random(rows, cols, seed).unwrap();
        if m.row_weights().contains(&0) {
            prop_assert!(StraightLineProgram::from_matrix(&m).is_err());
            return Ok(());
        }
        let p = StraightLineProgram::from_matrix(&m).unwrap();
        prop_assert!(p.matches(&m));
        let x: Vec<u64> = (0..cols as u64).map(|k| seed.rotate_left(k as u32 * 7) ^ k).collect();
        let y = p.eval(&x).unwrap();
        for bit in 0..64 {
            let xb: Vec<bool> = x.iter().map(|w| (w >> bit) & 1 == 1).collect();
            let yb = naive_matvec(&m, &xb);
            for (i, &want) in yb.iter().enumerate() {
                prop_assert_eq!((y[i] >> bit) & 1 == 1, want);
            }
        }
    }

    #[test]
    fn narrow_lanes_agree(seed in any::<u64>()) {
        let d = Builtin::AltChaining.decomposition();
        let p = d.slp(Factor::Gamma);
        let x64: Vec<u64> = (0..7).map(|k| seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(k * 9)).collect();
        let x8: Vec<u8> = x64.iter().map(|&w| w as u8).collect();
        let x128: Vec<u128> = x64.iter().map(|&w| (w as u128) << 64 | w as u128).collect();
        let y64 = p.eval(&x64).unwrap();
        let y8 = p.eval(&x8).unwrap();
        let y128 = p.eval(&x128).unwrap();
        for i in 0..4 {
            prop_assert_eq!(y8[i], y64[i] as u8);
            prop_assert_eq!(y128[i], (y64[i] as u128) << 64 | y64[i] as u128);
        }
    }

    #[test]
    fn gauss_jordan_inverse_is_two_sided(seed in any::<u64>(), n in 1usize..12) {
        let m = BitMatrix::random(n, n, seed).unwrap();
        match m.inverse_gf2().unwrap() {
            Some(inv) => {
                prop_assert!(common::naive_gf2(&m, &inv).is_identity());
                prop_assert!(common::naive_gf2(&inv, &m).is_identity());
            }
            None => prop_assert!(decomposition::check_mutual_inverse(&m, &m.transpose()).map(|ok| !ok).unwrap()),
        }
    }
}
