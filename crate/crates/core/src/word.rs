//! Lane types for straight-line program evaluation.

use num_traits::PrimInt;
use std::ops::BitXorAssign;

/// An unsigned machine word treated as a vector of independent GF(2) lanes.
pub trait Word: PrimInt + BitXorAssign + Send + Sync + 'static {
    const BITS: usize;
}

macro_rules! impl_word {
    ($($t:ty),*) => {
        $(impl Word for $t {
            const BITS: usize = <$t>::BITS as usize;
        })*
    };
}

impl_word!(u8, u16, u32, u64, u128);

/// `dst ^= src`, lane by lane.
#[inline]
pub fn xor_into<W: Word>(dst: &mut [W], src: &[W]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// `dst = a ^ b`.
#[inline]
pub fn xor_to<W: Word>(dst: &mut [W], a: &[W], b: &[W]) {
    debug_assert!(dst.len() == a.len() && a.len() == b.len());
    for ((d, x), y) in dst.iter_mut().zip(a).zip(b) {
        *d = *x ^ *y;
    }
}
