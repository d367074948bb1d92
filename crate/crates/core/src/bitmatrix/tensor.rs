//! Bit vectors with a mode structure, and the interleaved recursive layout.
//!
//! An `n x n` matrix with `n = 2^L * 64` becomes a vector with modes
//! `(4, 4, ..., 4, 4096)`: one mode per outer level holding the digit pair
//! (block-row bit, block-column bit) as `2i + j`, most significant level
//! first, and a final mode for the 64x64 inner block. Left and Result
//! operands keep the inner block row-major; Right operands store it
//! transposed so the inner kernel reads columns of B as words.

use super::{transpose::transpose64_slice, words_for, BitMatrix};
use crate::engine::LayerPlan;
use crate::error::{BmmError, Result};
use crate::{BLOCK, BLOCK_WORDS, WORD_BITS};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Role of a matrix in a product `C = A B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Left,
    Right,
    Result,
}

/// How the bits of a tensor map back to a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TensorLayout {
    /// No matrix interpretation.
    Plain,
    /// Interleaved layout over `levels` outer levels.
    Interleaved { levels: usize, operand: Operand },
}

/// A packed bit vector with first-index-major mode structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitVectorTensor {
    mode_lengths: Vec<usize>,
    words: Vec<u64>,
    layout: TensorLayout,
}

fn total_bits(mode_lengths: &[usize]) -> Result<usize> {
    if mode_lengths.is_empty() || mode_lengths.contains(&0) {
        return Err(BmmError::Shape(format!("invalid mode lengths {mode_lengths:?}")));
    }
    mode_lengths
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m))
        .ok_or_else(|| BmmError::Shape("tensor too large".into()))
}

/// Mode lengths of an interleaved square operand.
pub(crate) fn interleaved_modes(levels: usize) -> Vec<usize> {
    let mut modes = vec![4; levels];
    modes.push(BLOCK * BLOCK);
    modes
}

impl BitVectorTensor {
    pub fn zeros(mode_lengths: Vec<usize>, layout: TensorLayout) -> Result<Self> {
        let bits = total_bits(&mode_lengths)?;
        let t = BitVectorTensor { words: vec![0; words_for(bits)], mode_lengths, layout };
        t.check_layout()?;
        Ok(t)
    }

    /// Zero tensor shaped as an interleaved square operand.
    pub fn interleaved_zeros(levels: usize, operand: Operand) -> Self {
        Self::zeros(interleaved_modes(levels), TensorLayout::Interleaved { levels, operand })
            .expect("interleaved shape is valid")
    }

    pub fn from_words(mode_lengths: Vec<usize>, words: Vec<u64>, layout: TensorLayout) -> Result<Self> {
        let bits = total_bits(&mode_lengths)?;
        if words.len() != words_for(bits) {
            return Err(BmmError::Shape(format!("{bits} bits need {} words, got {}", words_for(bits), words.len())));
        }
        let t = BitVectorTensor { mode_lengths, words, layout };
        if !t.padding_is_clean() {
            return Err(BmmError::Format("nonzero pad bits".into()));
        }
        t.check_layout()?;
        Ok(t)
    }

    pub fn random(mode_lengths: Vec<usize>, seed: u64, layout: TensorLayout) -> Result<Self> {
        let mut t = Self::zeros(mode_lengths, layout)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        t.words.iter_mut().for_each(|w| *w = rng.next_u64());
        let r = t.bits() % WORD_BITS;
        if r != 0 {
            *t.words.last_mut().unwrap() &= (1u64 << r) - 1;
        }
        Ok(t)
    }

    fn check_layout(&self) -> Result<()> {
        if let TensorLayout::Interleaved { levels, .. } = self.layout {
            if self.mode_lengths != interleaved_modes(levels) {
                return Err(BmmError::Layout(format!(
                    "modes {:?} do not match an interleaved layout with {levels} levels",
                    self.mode_lengths
                )));
            }
        }
        Ok(())
    }

    pub fn mode_lengths(&self) -> &[usize] {
        &self.mode_lengths
    }

    pub fn bits(&self) -> usize {
        self.mode_lengths.iter().product()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn into_words(self) -> Vec<u64> {
        self.words
    }

    pub fn layout(&self) -> TensorLayout {
        self.layout
    }

    /// Outer level count of an interleaved tensor.
    pub fn levels(&self) -> Option<usize> {
        match self.layout {
            TensorLayout::Interleaved { levels, .. } => Some(levels),
            TensorLayout::Plain => None,
        }
    }

    pub fn operand(&self) -> Option<Operand> {
        match self.layout {
            TensorLayout::Interleaved { operand, .. } => Some(operand),
            TensorLayout::Plain => None,
        }
    }

    /// Reinterprets a Left operand as a Result or the other way round. The
    /// two roles share one bit map, which is what lets a product feed the
    /// next multiplication directly.
    pub fn relabel(mut self, operand: Operand) -> Result<Self> {
        match self.layout {
            TensorLayout::Interleaved { levels, operand: cur }
                if cur != Operand::Right && operand != Operand::Right =>
            {
                self.layout = TensorLayout::Interleaved { levels, operand };
                Ok(self)
            }
            TensorLayout::Interleaved { operand: cur, .. } if cur == operand => Ok(self),
            other => Err(BmmError::Layout(format!("cannot relabel {other:?} as {operand:?}"))),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn padding_is_clean(&self) -> bool {
        match self.bits() % WORD_BITS {
            0 => true,
            r => self.words.last().is_none_or(|w| w >> r == 0),
        }
    }

    /// `self ^= other`; shapes and layouts must agree.
    pub fn xor_assign(&mut self, other: &BitVectorTensor) -> Result<()> {
        if self.mode_lengths != other.mode_lengths || self.layout != other.layout {
            return Err(BmmError::Shape("xor of differently shaped tensors".into()));
        }
        crate::word::xor_into(&mut self.words, &other.words);
        Ok(())
    }

    /// Bit at a flat position.
    pub fn bit(&self, index: usize) -> bool {
        (self.words[index / WORD_BITS] >> (index % WORD_BITS)) & 1 == 1
    }

    /// Flat position of a multi-index, first index most significant.
    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.mode_lengths.len() {
            return Err(BmmError::Shape("index rank differs from tensor rank".into()));
        }
        let mut flat = 0;
        for (&i, &m) in index.iter().zip(&self.mode_lengths) {
            if i >= m {
                return Err(BmmError::Shape(format!("index {i} outside mode of length {m}")));
            }
            flat = flat * m + i;
        }
        Ok(flat)
    }
}

/// Spreads the low 32 bits of `x` to the even bit positions.
fn spread(x: usize) -> usize {
    let mut x = x as u64 & 0xffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x as usize
}

/// Outer index of block `(br, bc)`: level digits `2i + j`, most significant first.
pub(crate) fn morton(br: usize, bc: usize) -> usize {
    (spread(br) << 1) | spread(bc)
}

fn levels_of(m: &BitMatrix) -> Result<usize> {
    let n = m.rows();
    if !m.is_square() || n < BLOCK || !n.is_power_of_two() {
        return Err(BmmError::Shape(format!(
            "interleaved layout needs a square power-of-two matrix of side at least 64, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok((n / BLOCK).trailing_zeros() as usize)
}

/// Permutes a row-major matrix into the interleaved layout with `levels` outer levels.
pub fn interleave(m: &BitMatrix, levels: usize, operand: Operand) -> Result<BitVectorTensor> {
    let have = levels_of(m)?;
    if have != levels {
        return Err(BmmError::Shape(format!(
            "matrix of side {} has {have} outer levels, plan expects {levels}",
            m.rows()
        )));
    }
    let nb = 1usize << levels;
    let stride = m.stride();
    let src = m.words();
    let mut out = BitVectorTensor::interleaved_zeros(levels, operand);
    for br in 0..nb {
        for bc in 0..nb {
            let o = morton(br, bc) * BLOCK_WORDS;
            let dst = &mut out.words[o..o + BLOCK_WORDS];
            for (r, w) in dst.iter_mut().enumerate() {
                *w = src[(br * BLOCK + r) * stride + bc];
            }
            if operand == Operand::Right {
                transpose64_slice(dst);
            }
        }
    }
    Ok(out)
}

/// Inverse of [`interleave`].
pub fn deinterleave(v: &BitVectorTensor, levels: usize, operand: Operand) -> Result<BitMatrix> {
    let want = TensorLayout::Interleaved { levels, operand };
    if v.layout != want {
        return Err(BmmError::Layout(format!("expected {want:?}, tensor is {:?}", v.layout)));
    }
    let nb = 1usize << levels;
    let n = nb * BLOCK;
    let mut m = BitMatrix::zeros(n, n)?;
    let stride = m.stride();
    let mut block = [0u64; BLOCK_WORDS];
    let dst = m.words_mut();
    for br in 0..nb {
        for bc in 0..nb {
            let o = morton(br, bc) * BLOCK_WORDS;
            block.copy_from_slice(&v.words[o..o + BLOCK_WORDS]);
            if operand == Operand::Right {
                super::transpose64(&mut block);
            }
            for (r, w) in block.iter().enumerate() {
                dst[(br * BLOCK + r) * stride + bc] = *w;
            }
        }
    }
    Ok(m)
}

/// Interleaves over the outer levels of `plan`.
pub fn to_interleaved(m: &BitMatrix, plan: &LayerPlan, operand: Operand) -> Result<BitVectorTensor> {
    interleave(m, plan.outer_levels(), operand)
}

pub fn from_interleaved(v: &BitVectorTensor, plan: &LayerPlan, operand: Operand) -> Result<BitMatrix> {
    deinterleave(v, plan.outer_levels(), operand)
}
