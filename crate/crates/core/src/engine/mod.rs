//! Multiplication algorithms: the elementary cubic algorithm, the 64x64
//! kernel, Strassen-Winograd, and the layered alternative-basis algorithm.

mod alt;
mod counter;
mod cubic;
mod kernel;
mod layered;
mod plan;

pub use alt::{basis_change, basis_change_inverse, basis_change_with, chain_multiply, from_alt_basis, multiply_alt, to_alt_basis, Basis};
pub(crate) use alt::solve;
pub use counter::{OpCounter, OpCounts};
pub use cubic::{multiply_boolean_reference, multiply_cubic, multiply_cubic_with};
pub use kernel::{kernel64, kernel64_into};
pub use plan::{outer_levels_for, LayerPlan};

use crate::bitmatrix::{self, BitMatrix, BitVectorTensor, Operand};
use crate::decomposition::{Builtin, Decomposition};
use crate::error::{BmmError, Result};
use std::fmt;
use std::str::FromStr;

/// Addition and multiplication of bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semiring {
    /// OR and AND.
    BooleanOrAnd,
    /// XOR and AND.
    Gf2XorAnd,
}

impl Semiring {
    pub fn name(self) -> &'static str {
        match self {
            Semiring::BooleanOrAnd => "boolean",
            Semiring::Gf2XorAnd => "gf2",
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semiring {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "boolean" => Ok(Semiring::BooleanOrAnd),
            "gf2" => Ok(Semiring::Gf2XorAnd),
            _ => Err(format!("unknown semiring {s:?}; expected gf2 or boolean")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    /// Row-combination cubic algorithm, either semiring.
    Cubic,
    /// Boolean inner-product reference with early exit.
    BooleanCubic,
    StrassenWinograd,
    AltSelfInverse,
    AltChaining,
}

impl Algo {
    pub const ALL: [Algo; 5] =
        [Algo::Cubic, Algo::BooleanCubic, Algo::StrassenWinograd, Algo::AltSelfInverse, Algo::AltChaining];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Cubic => "cubic",
            Algo::BooleanCubic => "boolean-cubic",
            Algo::StrassenWinograd => "sw",
            Algo::AltSelfInverse => "alt-si",
            Algo::AltChaining => "alt-chain",
        }
    }

    /// Decomposition behind a Strassen-family algorithm.
    pub fn decomposition(self) -> Option<Decomposition> {
        match self {
            Algo::Cubic | Algo::BooleanCubic => None,
            Algo::StrassenWinograd => Some(Builtin::StrassenWinograd.decomposition()),
            Algo::AltSelfInverse => Some(Builtin::AltSelfInverse.decomposition()),
            Algo::AltChaining => Some(Builtin::AltChaining.decomposition()),
        }
    }

    /// Whether the algorithm is defined over `ring`.
    pub fn supports(self, ring: Semiring) -> bool {
        match self {
            Algo::Cubic => true,
            Algo::BooleanCubic => ring == Semiring::BooleanOrAnd,
            _ => ring == Semiring::Gf2XorAnd,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}; expected cubic, boolean-cubic, sw, alt-si or alt-chain"))
    }
}

fn unsound(algo: Algo, ring: Semiring) -> BmmError {
    BmmError::Unsupported(match algo {
        Algo::BooleanCubic => "boolean-cubic computes Boolean products only".to_string(),
        _ => format!("{algo} needs additive inverses and is unsound over the {ring} semiring"),
    })
}

/// Strassen-Winograd over GF(2) with `7^(d_host + d_serial + d_parallel)`
/// kernel calls.
pub fn multiply_strassen_winograd(
    a: &BitMatrix,
    b: &BitMatrix,
    plan: &LayerPlan,
    ring: Semiring,
    counter: Option<&OpCounter>,
) -> Result<BitMatrix> {
    if ring != Semiring::Gf2XorAnd {
        return Err(unsound(Algo::StrassenWinograd, ring));
    }
    let algo = Algo::StrassenWinograd;
    let (a_hat, b_hat) = prepare(a, b, algo, plan, counter)?;
    let c_hat = solve_prepared(&a_hat, &b_hat, algo, plan, counter)?;
    finish(c_hat, algo, plan, counter)
}

fn check_operands(a: &BitMatrix, b: &BitMatrix, plan: &LayerPlan) -> Result<()> {
    if !a.is_square() || (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(BmmError::Shape(format!(
            "fast algorithms need two square matrices of one size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    outer_levels_for(a.rows())?;
    plan.check_size(a.rows())
}

/// Standard-basis product by any algorithm. Fast algorithms run as
/// [`prepare`], [`solve_prepared`] and [`finish`]; alternative-basis products
/// go through the host pipeline when the plan has host levels.
pub fn multiply(
    a: &BitMatrix,
    b: &BitMatrix,
    algo: Algo,
    plan: &LayerPlan,
    ring: Semiring,
    counter: Option<&OpCounter>,
) -> Result<BitMatrix> {
    if !algo.supports(ring) {
        return Err(unsound(algo, ring));
    }
    match algo {
        Algo::Cubic => multiply_cubic_with(a, b, ring, plan.workers),
        Algo::BooleanCubic => multiply_boolean_reference(a, b, plan.workers),
        Algo::StrassenWinograd | Algo::AltSelfInverse | Algo::AltChaining => {
            let (a_hat, b_hat) = prepare(a, b, algo, plan, counter)?;
            let c_hat = solve_prepared(&a_hat, &b_hat, algo, plan, counter)?;
            finish(c_hat, algo, plan, counter)
        }
    }
}

fn fast(algo: Algo) -> Result<Decomposition> {
    algo.decomposition()
        .ok_or_else(|| BmmError::Unsupported(format!("{algo} works on row-major matrices only")))
}

/// Permutes both operands into the interleaved layout and, for
/// alternative-basis algorithms, applies `phi` and `psi`.
pub fn prepare(
    a: &BitMatrix,
    b: &BitMatrix,
    algo: Algo,
    plan: &LayerPlan,
    counter: Option<&OpCounter>,
) -> Result<(BitVectorTensor, BitVectorTensor)> {
    let d = fast(algo)?;
    check_operands(a, b, plan)?;
    let levels = plan.outer_levels();
    let a_hat = bitmatrix::to_interleaved(a, plan, Operand::Left)?;
    let b_hat = bitmatrix::to_interleaved(b, plan, Operand::Right)?;
    if d.has_standard_bases() {
        return Ok((a_hat, b_hat));
    }
    Ok((
        basis_change_with(a_hat, &d, Basis::Phi, levels, plan.workers, counter)?,
        basis_change_with(b_hat, &d, Basis::Psi, levels, plan.workers, counter)?,
    ))
}

/// The bilinear phase on prepared operands.
pub fn solve_prepared(
    a_hat: &BitVectorTensor,
    b_hat: &BitVectorTensor,
    algo: Algo,
    plan: &LayerPlan,
    counter: Option<&OpCounter>,
) -> Result<BitVectorTensor> {
    let d = fast(algo)?;
    let local = OpCounter::new();
    let counter = counter.unwrap_or(&local);
    if d.has_standard_bases() {
        multiply_alt(a_hat, b_hat, &d, plan, Some(counter))
    } else {
        solve(a_hat, b_hat, &d, plan, counter)
    }
}

/// Applies `chi` where needed and permutes the result back to row-major.
pub fn finish(c_hat: BitVectorTensor, algo: Algo, plan: &LayerPlan, counter: Option<&OpCounter>) -> Result<BitMatrix> {
    let d = fast(algo)?;
    let c = if d.has_standard_bases() {
        c_hat
    } else {
        basis_change_with(c_hat, &d, Basis::Chi, plan.outer_levels(), plan.workers, counter)?
    };
    bitmatrix::from_interleaved(&c, plan, Operand::Result)
}
