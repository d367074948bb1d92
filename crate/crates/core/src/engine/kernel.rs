//! The 64x64 inner kernel.

use super::Semiring;
use crate::BLOCK_WORDS;

/// Multiplies one 64x64 block by another whose rows are the columns of the
/// right factor. Row `i`, bit `k` of the result reduces `a[i] & bt[k]`: by
/// parity over GF(2), by a nonzero test over the Boolean semiring.
pub fn kernel64(a: &[u64], bt: &[u64], ring: Semiring) -> [u64; BLOCK_WORDS] {
    let mut out = [0u64; BLOCK_WORDS];
    kernel64_into(a, bt, &mut out, ring);
    out
}

/// [`kernel64`] writing into `out`.
pub fn kernel64_into(a: &[u64], bt: &[u64], out: &mut [u64], ring: Semiring) {
    let a: &[u64; BLOCK_WORDS] = a.try_into().expect("64-word block");
    let bt: &[u64; BLOCK_WORDS] = bt.try_into().expect("64-word block");
    let out: &mut [u64; BLOCK_WORDS] = out.try_into().expect("64-word block");
    match ring {
        Semiring::Gf2XorAnd => gf2(a, bt, out),
        Semiring::BooleanOrAnd => boolean(a, bt, out),
    }
}

#[inline(always)]
fn gf2_body(a: &[u64; 64], bt: &[u64; 64], out: &mut [u64; 64]) {
    for (o, &row) in out.iter_mut().zip(a) {
        let mut acc = 0u64;
        for (k, &col) in bt.iter().enumerate() {
            acc |= u64::from((row & col).count_ones() & 1) << k;
        }
        *o = acc;
    }
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    #[target_feature(enable = "popcnt")]
    pub(super) unsafe fn gf2_popcnt(a: &[u64; 64], bt: &[u64; 64], out: &mut [u64; 64]) {
        super::gf2_body(a, bt, out)
    }

    #[target_feature(enable = "popcnt,avx2")]
    pub(super) unsafe fn gf2_avx2(a: &[u64; 64], bt: &[u64; 64], out: &mut [u64; 64]) {
        super::gf2_body(a, bt, out)
    }

    #[target_feature(enable = "popcnt,avx2,avx512f,avx512bw,avx512vl,avx512vpopcntdq")]
    pub(super) unsafe fn gf2_avx512(a: &[u64; 64], bt: &[u64; 64], out: &mut [u64; 64]) {
        super::gf2_body(a, bt, out)
    }

    #[derive(Clone, Copy, PartialEq, Eq)]
    pub(super) enum Level {
        Portable,
        Popcnt,
        Avx2,
        Avx512,
    }

    pub(super) fn level() -> Level {
        use std::sync::OnceLock;
        static LEVEL: OnceLock<Level> = OnceLock::new();
        *LEVEL.get_or_init(|| {
            if std::env::var_os("BMM_PORTABLE_KERNEL").is_some() {
                Level::Portable
            } else if is_x86_feature_detected!("avx512vpopcntdq")
                && is_x86_feature_detected!("avx512f")
                && is_x86_feature_detected!("avx512bw")
                && is_x86_feature_detected!("avx512vl")
            {
                Level::Avx512
            } else if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("popcnt") {
                Level::Avx2
            } else if is_x86_feature_detected!("popcnt") {
                Level::Popcnt
            } else {
                Level::Portable
            }
        })
    }
}

fn gf2(a: &[u64; 64], bt: &[u64; 64], out: &mut [u64; 64]) {
    #[cfg(target_arch = "x86_64")]
    {
        use x86::Level;
        // SAFETY: each variant is only called after its features were detected.
        unsafe {
            match x86::level() {
                Level::Avx512 => return x86::gf2_avx512(a, bt, out),
                Level::Avx2 => return x86::gf2_avx2(a, bt, out),
                Level::Popcnt => return x86::gf2_popcnt(a, bt, out),
                Level::Portable => {}
            }
        }
    }
    gf2_body(a, bt, out)
}

fn boolean(a: &[u64; 64], bt: &[u64; 64], out: &mut [u64; 64]) {
    for (o, &row) in out.iter_mut().zip(a) {
        let mut acc = 0u64;
        for (k, &col) in bt.iter().enumerate() {
            acc |= u64::from(row & col != 0) << k;
        }
        *o = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BitMatrix;

    #[test]
    fn identity_and_all_ones() {
        let id: Vec<u64> = (0..64).map(|i| 1u64 << i).collect();
        for ring in [Semiring::Gf2XorAnd, Semiring::BooleanOrAnd] {
            assert_eq!(kernel64(&id, &id, ring).to_vec(), id);
        }
        let ones = [!0u64; 64];
        assert_eq!(kernel64(&ones, &ones, Semiring::Gf2XorAnd), [0; 64]);
        assert_eq!(kernel64(&ones, &ones, Semiring::BooleanOrAnd), [!0; 64]);
    }

    #[test]
    fn every_variant_agrees_with_portable() {
        let a = BitMatrix::random(64, 64, 3).unwrap();
        let b = BitMatrix::random(64, 64, 4).unwrap();
        let (a, b): (&[u64; 64], &[u64; 64]) = (a.words().try_into().unwrap(), b.words().try_into().unwrap());
        let mut want = [0u64; 64];
        gf2_body(a, b, &mut want);
        #[cfg(target_arch = "x86_64")]
        {
            let mut got = [0u64; 64];
            if is_x86_feature_detected!("popcnt") {
                unsafe { x86::gf2_popcnt(a, b, &mut got) };
                assert_eq!(got, want);
            }
            if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("popcnt") {
                unsafe { x86::gf2_avx2(a, b, &mut got) };
                assert_eq!(got, want);
            }
            if x86::level() == x86::Level::Avx512 {
                unsafe { x86::gf2_avx512(a, b, &mut got) };
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn agrees_with_bitwise_definition() {
        let a = BitMatrix::random(64, 64, 1).unwrap();
        let b = BitMatrix::random(64, 64, 2).unwrap();
        let bt = b.transpose();
        for ring in [Semiring::Gf2XorAnd, Semiring::BooleanOrAnd] {
            let c = kernel64(a.words(), bt.words(), ring);
            for (i, row) in c.iter().enumerate() {
                for k in 0..64 {
                    let hits = (0..64).filter(|&j| a.bit(i, j) && b.bit(j, k)).count();
                    let want = match ring {
                        Semiring::Gf2XorAnd => hits % 2 == 1,
                        Semiring::BooleanOrAnd => hits > 0,
                    };
                    assert_eq!((row >> k) & 1 == 1, want);
                }
            }
        }
    }
}
