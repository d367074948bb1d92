//! Bit-matrix multiplication over GF(2) and the Boolean semiring.
//!
//! The crate provides packed bit matrices and the interleaved recursive
//! layout ([`bitmatrix`]), bilinear decompositions with their straight-line
//! programs ([`decomposition`]), Kronecker-structured transforms
//! ([`yates`]), the multiplication algorithms themselves ([`engine`]) and a
//! host-side coordinator that spreads sub-instances over worker pipelines
//! ([`pipeline`]).
//!
//! ```
//! use bitmm::{engine, BitMatrix, LayerPlan, Semiring};
//!
//! let a = BitMatrix::random(128, 128, 1).unwrap();
//! let b = BitMatrix::random(128, 128, 2).unwrap();
//! let plan = LayerPlan::for_size(128, 1).unwrap();
//! let c = engine::multiply(&a, &b, engine::Algo::AltSelfInverse, &plan, Semiring::Gf2XorAnd, None).unwrap();
//! assert_eq!(c, engine::multiply_cubic(&a, &b, Semiring::Gf2XorAnd).unwrap());
//! ```

pub mod bitmatrix;
pub mod decomposition;
pub mod engine;
mod error;
mod par;
pub mod pipeline;
pub mod word;
pub mod yates;

pub use bitmatrix::{BitMatrix, BitVectorTensor, Operand, TensorLayout};
pub use decomposition::{Builtin, Decomposition, StraightLineProgram};
pub use engine::{Algo, LayerPlan, OpCounter, OpCounts, Semiring};
pub use error::{BmmError, Result};
pub use word::Word;

/// Bits per storage word.
pub const WORD_BITS: usize = 64;

/// Side of the innermost square block handled by the 64x64 kernel.
pub const BLOCK: usize = 64;

/// Words in one innermost block.
pub const BLOCK_WORDS: usize = BLOCK * BLOCK / WORD_BITS;

/// Narrow-lane straight-line program evaluation, 8 bits per lane.
pub type Lanes8 = u8;
/// Word lanes used by the matrix engine.
pub type Lanes64 = u64;
/// Wide lanes, enough to check a 7-input program on all inputs at once.
pub type Lanes128 = u128;
