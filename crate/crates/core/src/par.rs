//! Static work splitting over scoped threads.

use std::ops::Range;

/// Split `0..n` into at most `parts` contiguous ranges of near-equal length.
pub(crate) fn split(n: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.clamp(1, n.max(1));
    let base = n / parts;
    let extra = n % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let len = base + usize::from(p < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Run `f` on each range of a static split, one scoped thread per range.
/// With a single range the closure runs on the calling thread.
pub(crate) fn for_each_range<F>(n: usize, workers: usize, f: F)
where
    F: Fn(Range<usize>) + Sync,
{
    let ranges = split(n, workers);
    if ranges.len() <= 1 {
        if n > 0 {
            f(0..n);
        }
        return;
    }
    std::thread::scope(|s| {
        let f = &f;
        let mut ranges = ranges.into_iter();
        let first = ranges.next().unwrap();
        for r in ranges {
            s.spawn(move || f(r));
        }
        f(first);
    });
}

/// Raw view of a word buffer that several threads write at disjoint offsets.
#[derive(Clone, Copy)]
pub(crate) struct SharedWords {
    ptr: *mut u64,
    len: usize,
}

// SAFETY: callers guarantee that concurrent accesses through copies of this
// handle touch disjoint indices.
unsafe impl Send for SharedWords {}
unsafe impl Sync for SharedWords {}

impl SharedWords {
    pub(crate) fn new(buf: &mut [u64]) -> Self {
        SharedWords { ptr: buf.as_mut_ptr(), len: buf.len() }
    }

    /// # Safety
    /// No other thread may access `range` for the lifetime of the slice.
    #[allow(clippy::mut_from_ref)]
    pub(crate) unsafe fn slice_mut(&self, start: usize, len: usize) -> &mut [u64] {
        assert!(start + len <= self.len);
        std::slice::from_raw_parts_mut(self.ptr.add(start), len)
    }

    /// # Safety
    /// No other thread may write `range` for the lifetime of the slice.
    pub(crate) unsafe fn slice(&self, start: usize, len: usize) -> &[u64] {
        assert!(start + len <= self.len);
        std::slice::from_raw_parts(self.ptr.add(start), len)
    }
}
