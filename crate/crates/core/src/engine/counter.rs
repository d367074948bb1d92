use std::sync::atomic::{AtomicU64, Ordering};

/// Operation counts gathered during a multiplication. Safe to share between
/// threads; totals are exact once the operation returns.
#[derive(Debug, Default)]
pub struct OpCounter {
    word_ands: AtomicU64,
    word_xors: AtomicU64,
    basis_xors: AtomicU64,
    host_xors: AtomicU64,
    kernel_invocations: AtomicU64,
}

/// A snapshot of an [`OpCounter`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// Word ANDs inside the 64x64 kernels.
    pub word_ands: u64,
    /// Word XORs forming linear combinations of operands and products,
    /// excluding basis changes and host-side instance handling.
    pub word_xors: u64,
    /// Word XORs spent on basis changes.
    pub basis_xors: u64,
    /// Word XORs spent generating and aggregating host sub-instances.
    pub host_xors: u64,
    pub kernel_invocations: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn snapshot(&self) -> OpCounts {
        OpCounts {
            word_ands: self.word_ands.load(Ordering::Relaxed),
            word_xors: self.word_xors.load(Ordering::Relaxed),
            basis_xors: self.basis_xors.load(Ordering::Relaxed),
            host_xors: self.host_xors.load(Ordering::Relaxed),
            kernel_invocations: self.kernel_invocations.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        for c in [&self.word_ands, &self.word_xors, &self.basis_xors, &self.host_xors, &self.kernel_invocations] {
            c.store(0, Ordering::Relaxed);
        }
    }

    pub(crate) fn xor_sink(&self) -> &AtomicU64 {
        &self.word_xors
    }

    pub(crate) fn basis_sink(&self) -> &AtomicU64 {
        &self.basis_xors
    }

    pub(crate) fn add_xors(&self, n: u64) {
        self.word_xors.fetch_add(n, Ordering::Relaxed);
    }

    pub(crate) fn add_host_xors(&self, n: u64) {
        self.host_xors.fetch_add(n, Ordering::Relaxed);
    }

    pub(crate) fn add_kernels(&self, calls: u64) {
        self.kernel_invocations.fetch_add(calls, Ordering::Relaxed);
        self.word_ands.fetch_add(calls * 64 * 64, Ordering::Relaxed);
    }
}
