//! Packed bit matrices, the BMM1 file format and the interleaved layout.
//!
//! Rows are stored LSB-first: bit `j` of a row lives in word `j / 64` at
//! bit position `j % 64`, and every row starts on a word boundary. Bits
//! past `cols` in the last word of a row are kept at zero by every public
//! operation.

mod io;
mod tensor;
mod transpose;

pub use io::{read_bmm1, write_bmm1, load, save};
pub use tensor::{from_interleaved, interleave, deinterleave, to_interleaved, BitVectorTensor, Operand, TensorLayout};
pub use transpose::transpose64;

use crate::error::{BmmError, Result};
use crate::WORD_BITS;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// A dense row-major bit matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(cols: usize) -> u64 {
    match cols % WORD_BITS {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

impl BitMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(BmmError::ZeroDimension { rows, cols });
        }
        let stride = words_for(cols);
        Ok(BitMatrix { rows, cols, stride, words: vec![0; rows * stride] })
    }

    /// Uniformly random matrix, reproducible from `seed`.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in m.words.iter_mut() {
            *w = rng.next_u64();
        }
        m.clear_padding();
        Ok(m)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.put(i, i, true);
        }
        Ok(m)
    }

    /// Builds a matrix bit by bit.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.put(i, j, true);
                }
            }
        }
        Ok(m)
    }

    /// Wraps an existing word array. Pad bits must already be zero.
    pub fn from_words(rows: usize, cols: usize, words: Vec<u64>) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        if words.len() != m.words.len() {
            return Err(BmmError::Shape(format!(
                "{}x{} needs {} words, got {}",
                rows,
                cols,
                m.words.len(),
                words.len()
            )));
        }
        m.words = words;
        if !m.padding_is_clean() {
            return Err(BmmError::Format("nonzero pad bits".into()));
        }
        Ok(m)
    }

    /// Parses rows of `0`/`1` characters, one row per non-empty line.
    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let cols = lines.first().map_or(0, |l| l.len());
        let mut m = Self::zeros(lines.len(), cols)?;
        for (i, line) in lines.iter().enumerate() {
            if line.len() != cols {
                return Err(BmmError::Format(format!("row {i} has {} columns, expected {cols}", line.len())));
            }
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.put(i, j, true),
                    other => return Err(BmmError::Format(format!("unexpected character {other:?}"))),
                }
            }
        }
        Ok(m)
    }

    /// Shorthand for small literal matrices: `from_rows(&["10", "01"])`.
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        Self::from_text(&rows.join("\n"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.push(if self.bit(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Words per row.
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn into_words(self) -> Vec<u64> {
        self.words
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.words[i * self.stride..(i + 1) * self.stride]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.words[i * self.stride..(i + 1) * self.stride]
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Result<bool> {
        self.check(i, j)?;
        Ok(self.bit(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) -> Result<()> {
        self.check(i, j)?;
        self.put(i, j, b);
        Ok(())
    }

    /// Unchecked read; panics on out-of-range indices.
    #[inline]
    pub fn bit(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.words[i * self.stride + j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub(crate) fn put(&mut self, i: usize, j: usize, b: bool) {
        let w = &mut self.words[i * self.stride + j / WORD_BITS];
        let m = 1u64 << (j % WORD_BITS);
        if b {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(BmmError::OutOfBounds { row: i, col: j, rows: self.rows, cols: self.cols });
        }
        Ok(())
    }

    pub(crate) fn clear_padding(&mut self) {
        let mask = tail_mask(self.cols);
        if mask != !0 {
            for i in 0..self.rows {
                self.words[i * self.stride + self.stride - 1] &= mask;
            }
        }
    }

    /// True when every bit beyond `cols` is zero.
    pub fn padding_is_clean(&self) -> bool {
        let mask = tail_mask(self.cols);
        (0..self.rows).all(|i| self.words[i * self.stride + self.stride - 1] & !mask == 0)
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows).map(|i| self.row(i).iter().map(|w| w.count_ones() as usize).sum()).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        (0..self.cols).map(|j| (0..self.rows).filter(|&i| self.bit(i, j)).count()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..self.cols).all(|j| self.bit(i, j) == (i == j)))
    }

    /// Full transpose.
    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows).expect("dims already validated");
        if self.rows.is_multiple_of(64) && self.cols.is_multiple_of(64) {
            let mut block = [0u64; 64];
            for bi in 0..self.rows / 64 {
                for bj in 0..self.cols / 64 {
                    for (r, w) in block.iter_mut().enumerate() {
                        *w = self.words[(bi * 64 + r) * self.stride + bj];
                    }
                    transpose64(&mut block);
                    for (r, w) in block.iter().enumerate() {
                        t.words[(bj * 64 + r) * t.stride + bi] = *w;
                    }
                }
            }
        } else {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    if self.bit(i, j) {
                        t.put(j, i, true);
                    }
                }
            }
        }
        t
    }

    /// Transposes every aligned 64x64 block in place of itself; block
    /// positions do not move.
    pub fn transpose_blocks64(&self) -> Result<BitMatrix> {
        if !self.rows.is_multiple_of(64) || !self.cols.is_multiple_of(64) {
            return Err(BmmError::Shape(format!(
                "blockwise transpose needs dimensions divisible by 64, got {}x{}",
                self.rows, self.cols
            )));
        }
        let mut out = self.clone();
        let mut block = [0u64; 64];
        for bi in 0..self.rows / 64 {
            for bj in 0..self.stride {
                for (r, w) in block.iter_mut().enumerate() {
                    *w = out.words[(bi * 64 + r) * self.stride + bj];
                }
                transpose64(&mut block);
                for (r, w) in block.iter().enumerate() {
                    out.words[(bi * 64 + r) * self.stride + bj] = *w;
                }
            }
        }
        Ok(out)
    }

    /// Embeds the matrix in the top-left corner of a zero square matrix whose
    /// side is the next power of two, and at least 64.
    pub fn pad_pow2(&self) -> BitMatrix {
        let n = self.rows.max(self.cols).max(64).next_power_of_two();
        self.embed(n, n).expect("target is at least as large")
    }

    /// Copies the matrix into the top-left corner of a larger zero matrix.
    pub fn embed(&self, rows: usize, cols: usize) -> Result<BitMatrix> {
        if rows < self.rows || cols < self.cols {
            return Err(BmmError::Shape("embedding target is smaller than the source".into()));
        }
        let mut out = BitMatrix::zeros(rows, cols)?;
        for i in 0..self.rows {
            let src = self.row(i);
            out.row_mut(i)[..src.len()].copy_from_slice(src);
        }
        Ok(out)
    }

    /// Top-left `rows x cols` corner.
    pub fn crop(&self, rows: usize, cols: usize) -> Result<BitMatrix> {
        if rows > self.rows || cols > self.cols {
            return Err(BmmError::Shape("crop larger than the source".into()));
        }
        let mut out = BitMatrix::zeros(rows, cols)?;
        let stride = out.stride;
        for i in 0..rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[..stride]);
        }
        out.clear_padding();
        Ok(out)
    }

    /// Elementwise XOR.
    pub fn xor(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(BmmError::Shape("xor of differently shaped matrices".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(out)
    }

    /// Product over GF(2).
    pub fn mul_gf2(&self, other: &BitMatrix) -> Result<BitMatrix> {
        crate::engine::multiply_cubic(self, other, crate::Semiring::Gf2XorAnd)
    }

    /// Inverse over GF(2) by Gauss-Jordan elimination, `None` if singular.
    pub fn inverse_gf2(&self) -> Result<Option<BitMatrix>> {
        if !self.is_square() {
            return Err(BmmError::Shape(format!("inverse of non-square {}x{} matrix", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = BitMatrix::identity(n)?;
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| a.bit(r, col)) else {
                return Ok(None);
            };
            if p != col {
                a.swap_rows(p, col);
                inv.swap_rows(p, col);
            }
            for r in 0..n {
                if r != col && a.bit(r, col) {
                    a.xor_row_from(r, col);
                    inv.xor_row_from(r, col);
                }
            }
        }
        Ok(Some(inv))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for w in 0..self.stride {
            self.words.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    fn xor_row_from(&mut self, dst: usize, src: usize) {
        for w in 0..self.stride {
            let v = self.words[src * self.stride + w];
            self.words[dst * self.stride + w] ^= v;
        }
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows <= 16 && self.cols <= 64 {
            write!(f, "BitMatrix {}x{}\n{}", self.rows, self.cols, self.to_text())
        } else {
            write!(f, "BitMatrix {}x{} ({} ones)", self.rows, self.cols, self.count_ones())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_shapes() {
        let m = BitMatrix::zeros(1, 1).unwrap();
        assert_eq!(m.words(), &[0]);
        let m = BitMatrix::zeros(64, 64).unwrap();
        assert_eq!(m.words().len(), 64);
        assert!(m.is_zero());
        assert!(BitMatrix::zeros(0, 3).is_err());
        assert!(BitMatrix::zeros(3, 0).is_err());
    }

    #[test]
    fn wide_rows_keep_padding_clean() {
        let mut m = BitMatrix::zeros(3, 130).unwrap();
        assert_eq!(m.stride(), 3);
        m.set(0, 129, true).unwrap();
        assert_eq!(m.words()[2], 1 << 1);
        assert!(m.padding_is_clean());
        assert!(m.set(0, 130, true).is_err());
    }

    #[test]
    fn random_is_deterministic_and_balanced() {
        let a = BitMatrix::random(256, 256, 1).unwrap();
        assert_eq!(a, BitMatrix::random(256, 256, 1).unwrap());
        assert_ne!(a, BitMatrix::random(256, 256, 2).unwrap());
        let big = BitMatrix::random(1024, 1024, 3).unwrap();
        let density = big.count_ones() as f64 / (1024.0 * 1024.0);
        assert!((0.45..=0.55).contains(&density), "{density}");
        let odd = BitMatrix::random(5, 70, 9).unwrap();
        assert!(odd.padding_is_clean());
    }

    #[test]
    fn set_flips_one_bit() {
        let mut m = BitMatrix::random(70, 200, 4).unwrap();
        let before = m.words().to_vec();
        let was = m.get(33, 150).unwrap();
        m.set(33, 150, !was).unwrap();
        let diff: u32 = before.iter().zip(m.words()).map(|(a, b)| (a ^ b).count_ones()).sum();
        assert_eq!(diff, 1);
        assert_eq!(m.get(33, 150).unwrap(), !was);
    }

    #[test]
    fn text_round_trip() {
        let m = BitMatrix::from_rows(&["0011", "0100", "1111"]).unwrap();
        assert_eq!(m.rows(), 3);
        assert!(m.bit(0, 2) && !m.bit(0, 1));
        assert_eq!(BitMatrix::from_text(&m.to_text()).unwrap(), m);
        assert!(BitMatrix::from_rows(&["01", "1"]).is_err());
        assert!(BitMatrix::from_rows(&["0x"]).is_err());
    }

    #[test]
    fn transpose_blocks_involution_and_identity() {
        let id = BitMatrix::identity(128).unwrap();
        assert_eq!(id.transpose_blocks64().unwrap(), id);
        let m = BitMatrix::random(128, 192, 5).unwrap();
        let t = m.transpose_blocks64().unwrap();
        assert_eq!(t.transpose_blocks64().unwrap(), m);
        for i in 0..128 {
            for j in 0..192 {
                let (bi, bj) = (i / 64 * 64, j / 64 * 64);
                assert_eq!(t.bit(bi + j % 64, bj + i % 64), m.bit(i, j));
            }
        }
        assert!(BitMatrix::zeros(64, 65).unwrap().transpose_blocks64().is_err());
    }

    #[test]
    fn full_transpose_matches_naive() {
        for (r, c) in [(3, 5), (128, 64), (64, 192)] {
            let m = BitMatrix::random(r, c, 6).unwrap();
            let t = m.transpose();
            for i in 0..r {
                for j in 0..c {
                    assert_eq!(t.bit(j, i), m.bit(i, j));
                }
            }
        }
    }

    #[test]
    fn pad_and_crop() {
        let m = BitMatrix::random(70, 90, 7).unwrap();
        let p = m.pad_pow2();
        assert_eq!((p.rows(), p.cols()), (128, 128));
        assert_eq!(p.crop(70, 90).unwrap(), m);
        assert_eq!(BitMatrix::random(3, 3, 1).unwrap().pad_pow2().rows(), 64);
    }

    #[test]
    fn gauss_jordan_inverse() {
        let m = BitMatrix::from_rows(&["1000", "0101", "0011", "0001"]).unwrap();
        let inv = m.inverse_gf2().unwrap().unwrap();
        assert!(m.mul_gf2(&inv).unwrap().is_identity());
        let singular = BitMatrix::from_rows(&["11", "11"]).unwrap();
        assert!(singular.inverse_gf2().unwrap().is_none());
        assert!(BitMatrix::zeros(2, 3).unwrap().inverse_gf2().is_err());
    }
}
