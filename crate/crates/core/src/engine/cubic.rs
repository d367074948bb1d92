//! Elementary cubic multiplication, used both as an algorithm and as the
//! reference every other algorithm is checked against.

use super::Semiring;
use crate::bitmatrix::BitMatrix;
use crate::error::{BmmError, Result};
use crate::par::{self, SharedWords};
use crate::WORD_BITS;

/// `C = A B`, single-threaded. Works for any compatible shapes.
pub fn multiply_cubic(a: &BitMatrix, b: &BitMatrix, ring: Semiring) -> Result<BitMatrix> {
    multiply_cubic_with(a, b, ring, 1)
}

/// `C = A B` with the rows of `C` split across `workers` threads. Row `i`
/// of `C` accumulates row `j` of `B` for every set bit `a[i][j]`.
pub fn multiply_cubic_with(a: &BitMatrix, b: &BitMatrix, ring: Semiring, workers: usize) -> Result<BitMatrix> {
    if a.cols() != b.rows() {
        return Err(BmmError::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut c = BitMatrix::zeros(a.rows(), b.cols())?;
    let stride = c.stride();
    let out = SharedWords::new(c.words_mut());
    par::for_each_range(a.rows(), workers, |rows| {
        for i in rows {
            // SAFETY: each row of C is written by exactly one range.
            let dst = unsafe { out.slice_mut(i * stride, stride) };
            for (w, &word) in a.row(i).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let j = w * WORD_BITS + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let src = b.row(j);
                    match ring {
                        Semiring::Gf2XorAnd => dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s),
                        Semiring::BooleanOrAnd => dst.iter_mut().zip(src).for_each(|(d, s)| *d |= s),
                    }
                }
            }
        }
    });
    Ok(c)
}

/// Boolean product by inner products: `c[i][k]` is set as soon as row `i`
/// of `A` and column `k` of `B` share a set bit.
pub fn multiply_boolean_reference(a: &BitMatrix, b: &BitMatrix, workers: usize) -> Result<BitMatrix> {
    if a.cols() != b.rows() {
        return Err(BmmError::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let bt = b.transpose();
    let mut c = BitMatrix::zeros(a.rows(), b.cols())?;
    let stride = c.stride();
    let out = SharedWords::new(c.words_mut());
    par::for_each_range(a.rows(), workers, |rows| {
        for i in rows {
            // SAFETY: each row of C is written by exactly one range.
            let dst = unsafe { out.slice_mut(i * stride, stride) };
            let ra = a.row(i);
            for k in 0..bt.rows() {
                if ra.iter().zip(bt.row(k)).any(|(x, y)| x & y != 0) {
                    dst[k / WORD_BITS] |= 1 << (k % WORD_BITS);
                }
            }
        }
    });
    Ok(c)
}
