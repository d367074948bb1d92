//! Recursive execution of a ⟨2,2,2⟩ decomposition on interleaved operands.
//!
//! Operands hold `4^levels` blocks of 64 words. The outer `serial` levels
//! recurse depth first: form every left and right linear combination with
//! the alpha and beta programs, solve the `r` sub-products one after another
//! into per-level scratch, then combine them with the gamma program. The
//! remaining `parallel` levels run breadth first: all but the last are
//! expanded with a Kronecker chain of alpha (beta), the last level is
//! expanded, multiplied and compressed block by block inside the kernel,
//! and the products are compressed with a chain of gamma.

use super::kernel::kernel64_into;
use super::{OpCounter, Semiring};
use crate::decomposition::{Decomposition, Factor};
use crate::par::{self, SharedWords};
use crate::yates::{self, KroneckerChain, LevelOrder};
use crate::BLOCK_WORDS;

/// Words in the four quadrant blocks one kernel instance consumes.
const QUAD_WORDS: usize = 4 * BLOCK_WORDS;

pub(crate) struct Layered<'a> {
    d: &'a Decomposition,
    counter: &'a OpCounter,
    workers: usize,
    /// alpha, beta and gamma chains over all parallel levels but the last.
    chains: Option<[KroneckerChain; 3]>,
    parallel: usize,
}

struct LevelScratch {
    t: Vec<u64>,
    s: Vec<u64>,
    q: Vec<u64>,
    temps: Vec<u64>,
}

impl<'a> Layered<'a> {
    pub(crate) fn new(d: &'a Decomposition, counter: &'a OpCounter, workers: usize, parallel: usize) -> Self {
        let chains = (parallel >= 2).then(|| {
            let chain = |f| {
                KroneckerChain::of_factor(d, f, parallel - 1, QUAD_WORDS * crate::WORD_BITS)
                    .expect("decomposition programs match their matrices")
            };
            [chain(Factor::Alpha), chain(Factor::Beta), chain(Factor::Gamma)]
        });
        Layered { d, counter, workers: workers.max(1), chains, parallel }
    }

    fn r(&self) -> usize {
        self.d.params().r
    }

    fn max_temps(&self) -> usize {
        [Factor::Alpha, Factor::Beta, Factor::Gamma].iter().map(|&f| self.d.slp(f).temp_count()).max().unwrap_or(0)
    }

    fn scratch(&self, serial: usize) -> Vec<LevelScratch> {
        (0..serial)
            .map(|k| {
                let q = BLOCK_WORDS << (2 * (serial - 1 - k + self.parallel));
                LevelScratch {
                    t: vec![0; self.r() * q],
                    s: vec![0; self.r() * q],
                    q: vec![0; self.r() * q],
                    temps: vec![0; self.max_temps() * q],
                }
            })
            .collect()
    }

    /// Product of two operands with `serial + parallel` levels.
    pub(crate) fn multiply(&self, a: &[u64], b: &[u64], serial: usize) -> Vec<u64> {
        debug_assert_eq!(a.len(), BLOCK_WORDS << (2 * (serial + self.parallel)));
        let mut c = vec![0u64; a.len()];
        let mut scratch = self.scratch(serial);
        let fan_out = self.workers > 1 && self.parallel == 0;
        self.serial(a, b, &mut c, &mut scratch, fan_out);
        c
    }

    fn serial(&self, a: &[u64], b: &[u64], c: &mut [u64], scratch: &mut [LevelScratch], fan_out: bool) {
        let Some((lv, deeper)) = scratch.split_first_mut() else {
            return self.parallel_layers(a, b, c);
        };
        let q = a.len() / 4;
        let r = self.r();
        let mut xors = self.d.slp(Factor::Alpha).eval_flat(a, &mut lv.t, q, &mut lv.temps);
        xors += self.d.slp(Factor::Beta).eval_flat(b, &mut lv.s, q, &mut lv.temps);
        self.counter.add_xors(xors);
        let (t, s) = (&lv.t, &lv.s);
        if fan_out {
            let levels_below = deeper.len();
            std::thread::scope(|scope| {
                let mut rest: &mut [u64] = &mut lv.q;
                for range in par::split(r, self.workers) {
                    let (mine, tail) = std::mem::take(&mut rest).split_at_mut(range.len() * q);
                    rest = tail;
                    scope.spawn(move || {
                        let mut own = self.scratch(levels_below);
                        for (k, h) in range.enumerate() {
                            let (th, sh) = (&t[h * q..(h + 1) * q], &s[h * q..(h + 1) * q]);
                            self.serial(th, sh, &mut mine[k * q..(k + 1) * q], &mut own, false);
                        }
                    });
                }
            });
        } else {
            for h in 0..r {
                let (th, sh) = (&t[h * q..(h + 1) * q], &s[h * q..(h + 1) * q]);
                self.serial(th, sh, &mut lv.q[h * q..(h + 1) * q], deeper, false);
            }
        }
        let xors = self.d.slp(Factor::Gamma).eval_flat(&lv.q, c, q, &mut lv.temps);
        self.counter.add_xors(xors);
    }

    fn parallel_layers(&self, a: &[u64], b: &[u64], c: &mut [u64]) {
        if self.parallel == 0 {
            kernel64_into(a, b, c, Semiring::Gf2XorAnd);
            self.counter.add_kernels(1);
            return;
        }
        let sink = Some(self.counter.xor_sink());
        let Some([ca, cb, cg]) = &self.chains else {
            return self.shifted_kernels(a, b, c);
        };
        let order = LevelOrder::identity(self.parallel - 1);
        let ta = yates::run(ca, a, &order, self.workers, true, sink);
        let sb = yates::run(cb, b, &order, self.workers, true, sink);
        let mut qc = vec![0u64; ta.len()];
        self.shifted_kernels(&ta, &sb, &mut qc);
        let out = yates::run(cg, &qc, &order, self.workers, true, sink);
        c.copy_from_slice(&out);
    }

    /// One instance per group of four quadrant blocks: expand to `r` left and
    /// right blocks, multiply them pairwise, compress back to four.
    fn shifted_kernels(&self, a: &[u64], b: &[u64], c: &mut [u64]) {
        let r = self.r();
        let instances = a.len() / QUAD_WORDS;
        let out = SharedWords::new(c);
        let (alpha, beta, gamma) =
            (self.d.slp(Factor::Alpha), self.d.slp(Factor::Beta), self.d.slp(Factor::Gamma));
        par::for_each_range(instances, self.workers, |range| {
            let mut t = vec![0u64; r * BLOCK_WORDS];
            let mut s = vec![0u64; r * BLOCK_WORDS];
            let mut q = vec![0u64; r * BLOCK_WORDS];
            let mut temps = vec![0u64; self.max_temps() * BLOCK_WORDS];
            let (mut xors, calls) = (0u64, range.len() as u64 * r as u64);
            for e in range {
                let span = e * QUAD_WORDS..(e + 1) * QUAD_WORDS;
                xors += alpha.eval_flat(&a[span.clone()], &mut t, BLOCK_WORDS, &mut temps);
                xors += beta.eval_flat(&b[span.clone()], &mut s, BLOCK_WORDS, &mut temps);
                for h in 0..r {
                    let blk = h * BLOCK_WORDS..(h + 1) * BLOCK_WORDS;
                    kernel64_into(&t[blk.clone()], &s[blk.clone()], &mut q[blk], Semiring::Gf2XorAnd);
                }
                // SAFETY: instance e alone writes this span.
                let dst = unsafe { out.slice_mut(span.start, QUAD_WORDS) };
                xors += gamma.eval_flat(&q, dst, BLOCK_WORDS, &mut temps);
            }
            self.counter.add_xors(xors);
            self.counter.add_kernels(calls);
        });
    }
}
