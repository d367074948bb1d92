//! Basis changes and multiplication in alternative bases.

use super::layered::Layered;
use super::{LayerPlan, OpCounter};
use crate::bitmatrix::{self, BitMatrix, BitVectorTensor, Operand, TensorLayout};
use crate::decomposition::{Decomposition, Factor, StraightLineProgram};
use crate::error::{BmmError, Result};
use crate::yates::{self, KroneckerChain, LevelOrder};

/// Which basis-change matrix to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Left operand into the alternative basis.
    Phi,
    /// Right operand into the alternative basis.
    Psi,
    /// Result back to the standard basis.
    Chi,
}

impl Basis {
    fn factor(self) -> Factor {
        match self {
            Basis::Phi => Factor::Phi,
            Basis::Psi => Factor::Psi,
            Basis::Chi => Factor::Chi,
        }
    }

    fn operand(self) -> Operand {
        match self {
            Basis::Phi => Operand::Left,
            Basis::Psi => Operand::Right,
            Basis::Chi => Operand::Result,
        }
    }
}

/// Applies the chosen basis change over the outer `levels` modes, in place.
pub fn basis_change(v: BitVectorTensor, d: &Decomposition, which: Basis, levels: usize) -> Result<BitVectorTensor> {
    basis_change_with(v, d, which, levels, 1, None)
}

pub fn basis_change_with(
    mut v: BitVectorTensor,
    d: &Decomposition,
    which: Basis,
    levels: usize,
    workers: usize,
    counter: Option<&OpCounter>,
) -> Result<BitVectorTensor> {
    let TensorLayout::Interleaved { levels: have, operand } = v.layout() else {
        return Err(BmmError::Layout("basis change needs an interleaved tensor".into()));
    };
    if operand != which.operand() {
        return Err(BmmError::Layout(format!("{which:?} applies to {:?} operands, tensor is {operand:?}", which.operand())));
    }
    if levels > have {
        return Err(BmmError::Layout(format!("{levels} basis-change levels on a tensor with {have}")));
    }
    let f = which.factor();
    if levels == 0 || d.matrix(f).is_identity() {
        return Ok(v);
    }
    let trailing = v.bits() >> (2 * levels);
    let chain = KroneckerChain::of_factor(d, f, levels, trailing)?;
    yates::run_in_place(
        &chain,
        v.words_mut(),
        &LevelOrder::identity(levels),
        workers,
        true,
        counter.map(OpCounter::basis_sink),
    );
    Ok(v)
}

/// Applies the inverse of the chosen basis-change matrix, using a
/// straight-line program derived from the inverse.
pub fn basis_change_inverse(
    mut v: BitVectorTensor,
    d: &Decomposition,
    which: Basis,
    levels: usize,
    workers: usize,
) -> Result<BitVectorTensor> {
    let TensorLayout::Interleaved { levels: have, operand } = v.layout() else {
        return Err(BmmError::Layout("basis change needs an interleaved tensor".into()));
    };
    if operand != which.operand() || levels > have {
        return Err(BmmError::Layout(format!("cannot undo {which:?} on {levels} levels of a {operand:?} tensor")));
    }
    let m = d.matrix(which.factor());
    if levels == 0 || m.is_identity() {
        return Ok(v);
    }
    let inv = m
        .inverse_gf2()?
        .ok_or_else(|| BmmError::Unsupported(format!("{which:?} of {} is singular", d.name())))?;
    let slp = StraightLineProgram::from_matrix(&inv)?;
    let trailing = v.bits() >> (2 * levels);
    let chain = KroneckerChain::repeated(&inv, &slp, levels, trailing)?;
    yates::run_in_place(&chain, v.words_mut(), &LevelOrder::identity(levels), workers, true, None);
    Ok(v)
}

fn check_square_blocks(d: &Decomposition) -> Result<()> {
    let p = d.params();
    if (p.s, p.t, p.u) != (2, 2, 2) {
        return Err(BmmError::Unsupported(format!(
            "the engine runs <2,2,2> decompositions, got <{},{},{}>",
            p.s, p.t, p.u
        )));
    }
    Ok(())
}

fn operand_levels(v: &BitVectorTensor, want: Operand) -> Result<usize> {
    match v.layout() {
        TensorLayout::Interleaved { levels, operand } if operand == want => Ok(levels),
        other => Err(BmmError::Layout(format!("expected an interleaved {want:?} operand, got {other:?}"))),
    }
}

/// `c_hat = gamma (alpha a_hat ⊙ beta b_hat)` over the serial and parallel
/// layers of `plan`, with `r^(d_serial + d_parallel)` kernel calls. Operands
/// may also span the host levels, which are then recursed serially.
pub fn multiply_alt(
    a_hat: &BitVectorTensor,
    b_hat: &BitVectorTensor,
    d: &Decomposition,
    plan: &LayerPlan,
    counter: Option<&OpCounter>,
) -> Result<BitVectorTensor> {
    check_square_blocks(d)?;
    let levels = operand_levels(a_hat, Operand::Left)?;
    if operand_levels(b_hat, Operand::Right)? != levels {
        return Err(BmmError::Shape("operands have different sizes".into()));
    }
    let inner = plan.d_serial + plan.d_parallel;
    if levels != inner && levels != plan.outer_levels() {
        return Err(BmmError::Plan(format!(
            "operands have {levels} levels; plan has {inner} serial and parallel levels and {} host levels",
            plan.d_host
        )));
    }
    let local = OpCounter::new();
    let counter = counter.unwrap_or(&local);
    let engine = Layered::new(d, counter, plan.workers, plan.d_parallel);
    let c = engine.multiply(a_hat.words(), b_hat.words(), levels - plan.d_parallel);
    BitVectorTensor::from_words(
        a_hat.mode_lengths().to_vec(),
        c,
        TensorLayout::Interleaved { levels, operand: Operand::Result },
    )
}

/// Host sub-instances go through the pipeline, everything else straight to
/// [`multiply_alt`].
pub(crate) fn solve(
    a_hat: &BitVectorTensor,
    b_hat: &BitVectorTensor,
    d: &Decomposition,
    plan: &LayerPlan,
    counter: &OpCounter,
) -> Result<BitVectorTensor> {
    if plan.d_host > 0 && a_hat.levels() == Some(plan.outer_levels()) {
        Ok(crate::pipeline::coordinate_with(a_hat, b_hat, plan.workers, plan, d, Some(counter))?.output)
    } else {
        multiply_alt(a_hat, b_hat, d, plan, Some(counter))
    }
}

/// Interleaves a matrix and moves it into the alternative basis: `phi` for
/// a Left operand, `psi` for a Right one.
pub fn to_alt_basis(m: &BitMatrix, d: &Decomposition, plan: &LayerPlan, operand: Operand) -> Result<BitVectorTensor> {
    let which = match operand {
        Operand::Left => Basis::Phi,
        Operand::Right => Basis::Psi,
        Operand::Result => return Err(BmmError::Layout("only Left and Right operands enter the alternative basis".into())),
    };
    let v = bitmatrix::to_interleaved(m, plan, operand)?;
    basis_change_with(v, d, which, plan.outer_levels(), plan.workers, None)
}

/// Applies `chi` to a result and returns it to row-major form.
pub fn from_alt_basis(c_hat: BitVectorTensor, d: &Decomposition, plan: &LayerPlan) -> Result<BitMatrix> {
    let c = basis_change_with(c_hat, d, Basis::Chi, plan.outer_levels(), plan.workers, None)?;
    bitmatrix::from_interleaved(&c, plan, Operand::Result)
}

/// Multiplies a chain of operands without leaving the alternative basis. The
/// first operand is a Left (or a previous Result), the others are Right.
pub fn chain_multiply(
    matrices_hat: &[BitVectorTensor],
    d: &Decomposition,
    plan: &LayerPlan,
    counter: Option<&OpCounter>,
) -> Result<BitVectorTensor> {
    if !d.traits().supports_chaining {
        return Err(BmmError::Unsupported(format!("{} does not support chaining", d.name())));
    }
    let [first, rest @ ..] = matrices_hat else {
        return Err(BmmError::Shape("chain needs at least two operands".into()));
    };
    if rest.is_empty() {
        return Err(BmmError::Shape("chain needs at least two operands".into()));
    }
    let local = OpCounter::new();
    let counter = counter.unwrap_or(&local);
    let mut acc = first.clone().relabel(Operand::Left)?;
    for b in rest {
        acc = solve(&acc, b, d, plan, counter)?.relabel(Operand::Left)?;
    }
    acc.relabel(Operand::Result)
}
