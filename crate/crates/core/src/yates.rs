//! Kronecker-structured matrix-vector products, one factor at a time.
//!
//! For `mu = mu_1 ⊗ ... ⊗ mu_d ⊗ I` with `mu_l` of shape `b_l x a_l`, the
//! input vector has modes `(a_1, ..., a_d, trailing)`. Applying factor `l`
//! replaces mode `l` by `b_l` and costs `P_l` word XORs per remaining index
//! combination, where `P_l` is the addition count of the factor's program.
//! The order in which the levels are applied is a free parameter: it does not
//! change the result, only the cost.

use crate::bitmatrix::{BitMatrix, BitVectorTensor, TensorLayout};
use crate::decomposition::{Decomposition, Factor, StraightLineProgram};
use crate::engine::OpCounter;
use crate::error::{BmmError, Result};
use crate::par::{self, SharedWords};
use crate::WORD_BITS;
use std::sync::atomic::{AtomicU64, Ordering};

/// Largest factor side that is fused with a neighbour.
const FUSE_LIMIT: usize = 8;
/// Words per lane chunk inside one mat-vec instance.
const LANE_WORDS: usize = 64;
/// Below this many words a level runs on the calling thread.
const PARALLEL_MIN_WORDS: usize = 1 << 15;

/// A chain `mu_1 ⊗ ... ⊗ mu_d ⊗ I_trailing`.
#[derive(Clone, Debug)]
pub struct KroneckerChain {
    factors: Vec<(BitMatrix, StraightLineProgram)>,
    trailing_identity: usize,
}

impl KroneckerChain {
    /// `trailing_identity` is in bits and must be a positive multiple of 64.
    pub fn new(factors: Vec<(BitMatrix, StraightLineProgram)>, trailing_identity: usize) -> Result<Self> {
        if trailing_identity == 0 || !trailing_identity.is_multiple_of(WORD_BITS) {
            return Err(BmmError::Shape(format!(
                "trailing identity must be a positive multiple of {WORD_BITS}, got {trailing_identity}"
            )));
        }
        for (k, (m, p)) in factors.iter().enumerate() {
            if !p.matches(m) {
                return Err(BmmError::Program(format!("factor {k}: program does not compute its matrix")));
            }
        }
        Ok(KroneckerChain { factors, trailing_identity })
    }

    /// `depth` copies of one factor.
    pub fn repeated(m: &BitMatrix, p: &StraightLineProgram, depth: usize, trailing_identity: usize) -> Result<Self> {
        Self::new(vec![(m.clone(), p.clone()); depth], trailing_identity)
    }

    /// `depth` copies of one factor of a decomposition.
    pub fn of_factor(d: &Decomposition, f: Factor, depth: usize, trailing_identity: usize) -> Result<Self> {
        Self::repeated(d.matrix(f), d.slp(f), depth, trailing_identity)
    }

    pub fn depth(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[(BitMatrix, StraightLineProgram)] {
        &self.factors
    }

    pub fn trailing_identity(&self) -> usize {
        self.trailing_identity
    }

    fn a(&self, l: usize) -> usize {
        self.factors[l].0.cols()
    }

    fn b(&self, l: usize) -> usize {
        self.factors[l].0.rows()
    }

    fn trailing_words(&self) -> usize {
        self.trailing_identity / WORD_BITS
    }

    pub fn input_bits(&self) -> usize {
        (0..self.depth()).map(|l| self.a(l)).product::<usize>() * self.trailing_identity
    }

    pub fn output_bits(&self) -> usize {
        (0..self.depth()).map(|l| self.b(l)).product::<usize>() * self.trailing_identity
    }

    pub fn is_square(&self) -> bool {
        (0..self.depth()).all(|l| self.a(l) == self.b(l))
    }
}

/// The level order `pi`, stored 0-based: `perm[k] = pi(k + 1) - 1`. Level
/// `pi(d)` is applied first and `pi(1)` last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelOrder(Vec<usize>);

impl LevelOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(BmmError::Order(format!("{perm:?} is not a permutation of 0..{}", perm.len())));
            }
        }
        Ok(LevelOrder(perm))
    }

    /// From the 1-based notation `pi(1), ..., pi(d)`.
    pub fn from_one_based(perm: &[usize]) -> Result<Self> {
        if perm.contains(&0) {
            return Err(BmmError::Order("1-based permutation contains 0".into()));
        }
        Self::new(perm.iter().map(|p| p - 1).collect())
    }

    /// Applies the innermost level first.
    pub fn identity(d: usize) -> Self {
        LevelOrder((0..d).collect())
    }

    /// Applies the outermost level first.
    pub fn reversal(d: usize) -> Self {
        LevelOrder((0..d).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Levels in the order they are applied.
    pub fn sequence(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().rev().copied()
    }
}

/// Predicted word XORs: `sum_l P_l prod_{k != l} m_{k,l}` times the trailing
/// words, where `m_{k,l}` is `b_k` for levels applied before `l` and `a_k`
/// otherwise.
pub fn cost(chain: &KroneckerChain, order: &LevelOrder) -> Result<u64> {
    check_order(chain, order)?;
    let mut applied = vec![false; chain.depth()];
    let mut total = 0u64;
    for l in order.sequence() {
        let others: u64 = (0..chain.depth())
            .filter(|&k| k != l)
            .map(|k| if applied[k] { chain.b(k) } else { chain.a(k) } as u64)
            .product();
        total += chain.factors[l].1.addition_count() as u64 * others;
        applied[l] = true;
    }
    Ok(total * chain.trailing_words() as u64)
}

fn check_order(chain: &KroneckerChain, order: &LevelOrder) -> Result<()> {
    if order.len() != chain.depth() {
        return Err(BmmError::Order(format!("order has {} levels, chain has {}", order.len(), chain.depth())));
    }
    Ok(())
}

/// `(⊗ factors ⊗ I) v`, single-threaded.
pub fn apply(chain: &KroneckerChain, v: &BitVectorTensor, order: &LevelOrder) -> Result<BitVectorTensor> {
    apply_with(chain, v, order, 1, None)
}

/// [`apply`] with a worker count and an optional counter; XORs are added to
/// the counter's linear-combination total.
pub fn apply_with(
    chain: &KroneckerChain,
    v: &BitVectorTensor,
    order: &LevelOrder,
    workers: usize,
    counter: Option<&OpCounter>,
) -> Result<BitVectorTensor> {
    check_order(chain, order)?;
    if v.bits() != chain.input_bits() {
        return Err(BmmError::Shape(format!("vector has {} bits, chain expects {}", v.bits(), chain.input_bits())));
    }
    let out = run(chain, v.words(), order, workers, true, counter.map(OpCounter::xor_sink));
    let mut modes: Vec<usize> = (0..chain.depth()).map(|l| chain.b(l)).collect();
    modes.push(chain.trailing_identity);
    let layout = if chain.is_square() && v.mode_lengths() == modes { v.layout() } else { TensorLayout::Plain };
    BitVectorTensor::from_words(modes, out, layout)
}

/// Level groups in application order; neighbours fuse when both are small.
fn groups(chain: &KroneckerChain, order: &LevelOrder, fuse: bool) -> Vec<Vec<usize>> {
    let seq: Vec<usize> = order.sequence().collect();
    let small = |l: usize| chain.a(l) <= FUSE_LIMIT && chain.b(l) <= FUSE_LIMIT;
    let mut out = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        if fuse && i + 1 < seq.len() && small(seq[i]) && small(seq[i + 1]) {
            out.push(vec![seq[i], seq[i + 1]]);
            i += 2;
        } else {
            out.push(vec![seq[i]]);
            i += 1;
        }
    }
    out
}

/// Out-of-place evaluation over word slices with a double buffer.
pub(crate) fn run(
    chain: &KroneckerChain,
    input: &[u64],
    order: &LevelOrder,
    workers: usize,
    fuse: bool,
    xors: Option<&AtomicU64>,
) -> Vec<u64> {
    let tw = chain.trailing_words();
    let mut modes: Vec<usize> = (0..chain.depth()).map(|l| chain.a(l)).collect();
    let plan = groups(chain, order, fuse);
    let mut max_len = input.len();
    {
        let mut m = modes.clone();
        for g in &plan {
            for &l in g {
                m[l] = chain.b(l);
            }
            max_len = max_len.max(m.iter().product::<usize>() * tw);
        }
    }
    let mut cur = Vec::with_capacity(max_len);
    cur.extend_from_slice(input);
    cur.resize(max_len, 0);
    let mut next = vec![0u64; max_len];
    let mut len = input.len();
    for g in &plan {
        let mut out_modes = modes.clone();
        for &l in g {
            out_modes[l] = chain.b(l);
        }
        let out_len = out_modes.iter().product::<usize>() * tw;
        let src = SharedWords::new(&mut cur[..len]);
        let dst = SharedWords::new(&mut next[..out_len]);
        run_group(chain, g, &modes, tw, src, dst, workers, xors);
        std::mem::swap(&mut cur, &mut next);
        modes = out_modes;
        len = out_len;
    }
    cur.truncate(len);
    cur
}

/// In-place evaluation for chains of square factors.
pub(crate) fn run_in_place(
    chain: &KroneckerChain,
    data: &mut [u64],
    order: &LevelOrder,
    workers: usize,
    fuse: bool,
    xors: Option<&AtomicU64>,
) {
    assert!(chain.is_square(), "in-place application needs square factors");
    assert_eq!(data.len() * WORD_BITS, chain.input_bits());
    let modes: Vec<usize> = (0..chain.depth()).map(|l| chain.a(l)).collect();
    let buf = SharedWords::new(data);
    for g in groups(chain, order, fuse) {
        run_group(chain, &g, &modes, chain.trailing_words(), buf, buf, workers, xors);
    }
}

/// Geometry of one level group: `[pre][x][mid][y][post]`, with `y` absent
/// for a single level.
struct Geometry {
    pre: usize,
    mid: usize,
    post: usize,
    chunks: usize,
    y: Option<usize>,
    ax: usize,
    bx: usize,
    ay: usize,
    by: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_group(
    chain: &KroneckerChain,
    group: &[usize],
    modes: &[usize],
    tw: usize,
    src: SharedWords,
    dst: SharedWords,
    workers: usize,
    xors: Option<&AtomicU64>,
) {
    let (x, y) = match *group {
        [l] => (l, None),
        [l1, l2] => (l1.min(l2), Some(l1.max(l2))),
        _ => unreachable!("groups hold one or two levels"),
    };
    let last = y.unwrap_or(x);
    let post = modes[last + 1..].iter().product::<usize>() * tw;
    let g = Geometry {
        pre: modes[..x].iter().product(),
        mid: y.map_or(1, |y| modes[x + 1..y].iter().product()),
        post,
        chunks: post.div_ceil(LANE_WORDS),
        y,
        ax: chain.a(x),
        bx: chain.b(x),
        ay: y.map_or(1, |y| chain.a(y)),
        by: y.map_or(1, |y| chain.b(y)),
    };
    let first_is_x = group[0] == x;
    let instances = g.pre * g.mid * g.chunks;
    let total_words = instances * LANE_WORDS;
    let workers = if total_words < PARALLEL_MIN_WORDS { 1 } else { workers };
    par::for_each_range(instances, workers, |range| {
        let lane = LANE_WORDS.min(g.post);
        let mut scratch_in = vec![0u64; g.ax * g.ay * lane];
        let mut scratch_mid = vec![0u64; g.ax.max(g.bx) * g.ay.max(g.by) * lane];
        let mut scratch_out = vec![0u64; g.bx * g.by * lane];
        let temps_len = |f: usize| chain.factors[f].1.temp_count();
        let mut temps = vec![0u64; temps_len(x).max(g.y.map_or(0, temps_len)) * lane];
        let mut count = 0u64;
        for inst in range {
            let chunk = inst % g.chunks;
            let q = (inst / g.chunks) % g.mid;
            let p = inst / (g.chunks * g.mid);
            let w0 = chunk * LANE_WORDS;
            let len = LANE_WORDS.min(g.post - w0);
            let in_off = |ix: usize, iy: usize| (((p * g.ax + ix) * g.mid + q) * g.ay + iy) * g.post + w0;
            let out_off = |jx: usize, jy: usize| (((p * g.bx + jx) * g.mid + q) * g.by + jy) * g.post + w0;
            for ix in 0..g.ax {
                for iy in 0..g.ay {
                    let r = ix * g.ay + iy;
                    // SAFETY: instances read and write disjoint index sets;
                    // within an instance all reads precede all writes.
                    let s = unsafe { src.slice(in_off(ix, iy), len) };
                    scratch_in[r * len..(r + 1) * len].copy_from_slice(s);
                }
            }
            let sx = &chain.factors[x].1;
            match g.y {
                None => count += sx.eval_flat(&scratch_in, &mut scratch_out, len, &mut temps),
                Some(y) => {
                    let sy = &chain.factors[y].1;
                    let (ay, by) = (g.ay, g.by);
                    if first_is_x {
                        for iy in 0..ay {
                            count += sx.eval_strided(&scratch_in, (iy, ay), &mut scratch_mid, (iy, ay), len, &mut temps);
                        }
                        for jx in 0..g.bx {
                            count += sy.eval_strided(&scratch_mid, (jx * ay, 1), &mut scratch_out, (jx * by, 1), len, &mut temps);
                        }
                    } else {
                        for ix in 0..g.ax {
                            count += sy.eval_strided(&scratch_in, (ix * ay, 1), &mut scratch_mid, (ix * by, 1), len, &mut temps);
                        }
                        for jy in 0..by {
                            count += sx.eval_strided(&scratch_mid, (jy, by), &mut scratch_out, (jy, by), len, &mut temps);
                        }
                    }
                }
            }
            for jx in 0..g.bx {
                for jy in 0..g.by {
                    let r = jx * g.by + jy;
                    // SAFETY: as above.
                    let d = unsafe { dst.slice_mut(out_off(jx, jy), len) };
                    d.copy_from_slice(&scratch_out[r * len..(r + 1) * len]);
                }
            }
        }
        if let Some(c) = xors {
            c.fetch_add(count, Ordering::Relaxed);
        }
    });
}
