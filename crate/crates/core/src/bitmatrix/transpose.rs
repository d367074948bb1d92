/// In-place transpose of a 64x64 bit block, one word per row, LSB-first.
///
/// Recursive block swap with word operations: at step `j` the off-diagonal
/// `j x j` sub-blocks of every `2j x 2j` tile are exchanged.
pub fn transpose64(a: &mut [u64; 64]) {
    let mut j = 32usize;
    let mut m: u64 = 0x0000_0000_ffff_ffff;
    while j != 0 {
        let mut k = 0usize;
        while k < 64 {
            let t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k + j] ^= t;
            a[k] ^= t << j;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

/// Transpose a block stored in a slice of exactly 64 words.
pub(crate) fn transpose64_slice(s: &mut [u64]) {
    let block: &mut [u64; 64] = s.try_into().expect("block of 64 words");
    transpose64(block);
}
