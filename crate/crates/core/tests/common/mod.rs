//! Reference implementations used as oracles. Everything here works one bit
//! at a time through `get`, independent of the word-level code under test.

#![allow(dead_code)]

use bitmm::{BitMatrix, BitVectorTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn naive_gf2(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(a.cols(), b.rows());
    BitMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).fold(false, |acc, k| acc ^ (a.get(i, k).unwrap() & b.get(k, j).unwrap()))
    })
    .unwrap()
}

/// Boolean product by set union: row `i` of the result is the union of the
/// supports of the rows of `b` selected by row `i` of `a`. A row stops
/// early once it is all ones, so dense inputs stay cheap too.
pub fn naive_boolean(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(a.cols(), b.rows());
    let support = |m: &BitMatrix, i: usize| (0..m.cols()).filter(|&k| m.get(i, k).unwrap()).collect::<Vec<_>>();
    let b_rows: Vec<Vec<usize>> = (0..b.rows()).map(|k| support(b, k)).collect();
    let mut c = BitMatrix::zeros(a.rows(), b.cols()).unwrap();
    for i in 0..a.rows() {
        let mut row = vec![false; b.cols()];
        let mut missing = b.cols();
        for k in support(a, i) {
            for &j in &b_rows[k] {
                if !row[j] {
                    row[j] = true;
                    missing -= 1;
                }
            }
            if missing == 0 {
                break;
            }
        }
        for (j, &bit) in row.iter().enumerate() {
            if bit {
                c.set(i, j, true).unwrap();
            }
        }
    }
    c
}

/// Entries are one with probability `p`.
pub fn sparse(rows: usize, cols: usize, p: f64, seed: u64) -> BitMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BitMatrix::from_fn(rows, cols, |_, _| rng.gen_bool(p)).unwrap()
}

pub fn matrix(rows: &[&str]) -> BitMatrix {
    BitMatrix::from_rows(rows).unwrap()
}

pub fn naive_kron(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    BitMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
        a.get(i / b.rows(), j / b.cols()).unwrap() & b.get(i % b.rows(), j % b.cols()).unwrap()
    })
    .unwrap()
}

/// `(mu_1 ⊗ ... ⊗ mu_d ⊗ I_trailing) x` with `x` a flat bit vector whose
/// first mode is most significant.
pub fn naive_kron_apply(factors: &[BitMatrix], trailing: usize, x: &[bool]) -> Vec<bool> {
    let k = factors.iter().skip(1).fold(factors[0].clone(), |acc, f| naive_kron(&acc, f));
    assert_eq!(x.len(), k.cols() * trailing);
    let mut y = vec![false; k.rows() * trailing];
    for i in 0..k.rows() {
        for j in 0..k.cols() {
            if k.get(i, j).unwrap() {
                for t in 0..trailing {
                    y[i * trailing + t] ^= x[j * trailing + t];
                }
            }
        }
    }
    y
}

pub fn tensor_bits(v: &BitVectorTensor) -> Vec<bool> {
    (0..v.bits()).map(|i| v.bit(i)).collect()
}

pub fn naive_matvec(m: &BitMatrix, x: &[bool]) -> Vec<bool> {
    (0..m.rows()).map(|i| (0..m.cols()).fold(false, |acc, j| acc ^ (m.get(i, j).unwrap() & x[j]))).collect()
}

/// Flat position of bit `(i, j)` of an `n x n` matrix with `levels` outer
/// levels in the interleaved layout: one base-4 digit `2 row_bit + col_bit`
/// per level from the most significant, then the 64x64 block, row-major
/// (`transposed = false`) or column-major.
pub fn interleaved_position(i: usize, j: usize, levels: usize, transposed: bool) -> usize {
    let (br, bc) = (i / 64, j / 64);
    let mut outer = 0;
    for l in (0..levels).rev() {
        outer = outer * 4 + 2 * ((br >> l) & 1) + ((bc >> l) & 1);
    }
    let inner = if transposed { (j % 64) * 64 + i % 64 } else { (i % 64) * 64 + j % 64 };
    outer * 4096 + inner
}

/// The matrices as displayed for the three builtin `<2,2,2>_7` algorithms.
pub mod displays {
    pub const SW_XI: [&str; 7] = ["0011", "0100", "0101", "0111", "1111", "0010", "1000"];
    pub const SW_ETA: [&str; 7] = ["0011", "0010", "0101", "0111", "0100", "1111", "1000"];
    pub const SW_ZETA: [&str; 4] = ["0100001", "1101100", "0111010", "1111000"];

    pub const SI_PHI: [&str; 4] = ["1000", "0100", "0010", "0111"];
    pub const SI_CHI: [&str; 4] = ["1000", "0101", "0011", "0001"];
    pub const SI_ALPHA: [&str; 7] = ["1000", "0100", "0010", "0001", "1001", "0101", "0011"];
    pub const SI_BETA: [&str; 7] = ["1000", "0010", "1001", "0001", "0100", "0101", "0011"];
    pub const SI_GAMMA: [&str; 4] = ["1100000", "0000101", "0010010", "0101011"];

    pub const CH_PHI: [&str; 4] = ["1000", "0100", "0111", "0101"];
    pub const CH_CHI: [&str; 4] = ["1000", "0100", "0011", "0101"];
    pub const CH_ALPHA: [&str; 7] = ["1000", "0100", "0010", "0001", "1010", "0110", "0011"];
    pub const CH_BETA: [&str; 7] = ["1000", "0011", "0010", "0001", "0100", "0110", "1010"];
    pub const CH_GAMMA: [&str; 4] = ["1100000", "0110110", "0110101", "0001100"];
}

/// Checks `C = zeta (xi A ⊙ eta B)` for every pair of elementary matrices
/// by expanding the bilinear form entrywise.
pub fn naive_triple_product(zeta: &BitMatrix, xi: &BitMatrix, eta: &BitMatrix, s: usize, t: usize, u: usize) -> bool {
    let r = xi.rows();
    for (ai, aj) in (0..s).flat_map(|i| (0..t).map(move |j| (i, j))) {
        for (bi, bj) in (0..t).flat_map(|i| (0..u).map(move |j| (i, j))) {
            for (ci, cj) in (0..s).flat_map(|i| (0..u).map(move |j| (i, j))) {
                let want = ai == ci && aj == bi && bj == cj;
                let got = (0..r).fold(false, |acc, q| {
                    acc ^ (zeta.get(ci * u + cj, q).unwrap()
                        & xi.get(q, ai * t + aj).unwrap()
                        & eta.get(q, bi * u + bj).unwrap())
                });
                if got != want {
                    return false;
                }
            }
        }
    }
    true
}
