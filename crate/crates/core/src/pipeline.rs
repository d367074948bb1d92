//! Host-side coordination of sub-instances.
//!
//! With `d_host` host levels, the product splits into `r^d_host`
//! independent sub-instances. Sub-instance `h = (h_1, ..., h_dh)` takes the
//! XOR of the left subvectors selected by the row-`h_i` entries of alpha at
//! every level (likewise beta for the right), is solved by
//! [`multiply_alt`](crate::engine::multiply_alt), and its product is XORed
//! into every output subvector selected by column `h_i` of gamma.
//!
//! [`coordinate`] runs `N` workers, each a four-stage pipeline of threads
//! (prepare left, prepare right, solve, aggregate) that hand buffers to one
//! another through Free/Occupied slots. Worker `l` owns the sub-instances
//! whose linear index is congruent to `l` modulo `N`.

use crate::bitmatrix::{BitVectorTensor, Operand, TensorLayout};
use crate::decomposition::Decomposition;
use crate::engine::{multiply_alt, LayerPlan, OpCounter};
use crate::error::{BmmError, Result};
use crate::bitmatrix::BitMatrix;
use crate::word::xor_into;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};

/// Index of one host sub-instance; `h_1` is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubInstanceIndex {
    digits: Vec<usize>,
    linear: usize,
}

impl SubInstanceIndex {
    pub fn new(digits: Vec<usize>, r: usize) -> Result<Self> {
        if let Some(&bad) = digits.iter().find(|&&h| h >= r) {
            return Err(BmmError::Shape(format!("digit {bad} is not below r = {r}")));
        }
        let linear = digits.iter().fold(0, |acc, &h| acc * r + h);
        Ok(SubInstanceIndex { digits, linear })
    }

    pub fn from_linear(linear: usize, d_host: usize, r: usize) -> Self {
        let mut digits = vec![0; d_host];
        let mut x = linear;
        for slot in digits.iter_mut().rev() {
            *slot = x % r;
            x /= r;
        }
        SubInstanceIndex { digits, linear }
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn linear(&self) -> usize {
        self.linear
    }

    /// Worker that owns this sub-instance among `n_workers`.
    pub fn owner(&self, n_workers: usize) -> usize {
        self.linear % n_workers
    }
}

/// Number of sub-instances each of `n_workers` owns.
pub fn owner_counts(d_host: usize, r: usize, n_workers: usize) -> Vec<usize> {
    let total = r.pow(d_host as u32);
    (0..n_workers).map(|l| (l..total).step_by(n_workers).count()).collect()
}

/// All `(x, selected)` host subvector positions for which the product of
/// `m[sel(level)]` entries along the levels is one. `rows` picks whether the
/// digits index rows (alpha, beta) or columns (gamma) of `m`.
fn support(m: &BitMatrix, digits: &[usize], rows: bool) -> Vec<usize> {
    let mut out = vec![0usize];
    for &h in digits {
        let picks: Vec<usize> = if rows {
            (0..m.cols()).filter(|&c| m.bit(h, c)).collect()
        } else {
            (0..m.rows()).filter(|&i| m.bit(i, h)).collect()
        };
        out = out.iter().flat_map(|&x| picks.iter().map(move |&p| x * 4 + p)).collect();
    }
    out
}

fn generate_into(src: &[u64], digits: &[usize], m: &BitMatrix, out: &mut [u64]) -> u64 {
    let len = out.len();
    let picks = support(m, digits, true);
    let (first, rest) = picks.split_first().expect("basis rows are nonzero");
    out.copy_from_slice(&src[first * len..(first + 1) * len]);
    for &x in rest {
        xor_into(out, &src[x * len..(x + 1) * len]);
    }
    (rest.len() * len) as u64
}

fn host_levels(v: &BitVectorTensor, want: Operand, d_host: usize) -> Result<usize> {
    match v.layout() {
        TensorLayout::Interleaved { levels, operand } if operand == want && levels >= d_host => Ok(levels),
        other => Err(BmmError::Layout(format!(
            "expected an interleaved {want:?} operand with at least {d_host} levels, got {other:?}"
        ))),
    }
}

fn generate(v: &BitVectorTensor, h: &SubInstanceIndex, m: &BitMatrix, operand: Operand) -> Result<BitVectorTensor> {
    let d_host = h.digits.len();
    let levels = host_levels(v, operand, d_host)?;
    if let Some(&bad) = h.digits.iter().find(|&&x| x >= m.rows()) {
        return Err(BmmError::Shape(format!("digit {bad} is out of range for {} products", m.rows())));
    }
    let mut out = BitVectorTensor::interleaved_zeros(levels - d_host, operand);
    generate_into(v.words(), &h.digits, m, out.words_mut());
    Ok(out)
}

/// Left operand of sub-instance `h`.
pub fn generate_left(a_hat: &BitVectorTensor, h: &SubInstanceIndex, d: &Decomposition) -> Result<BitVectorTensor> {
    generate(a_hat, h, d.alpha(), Operand::Left)
}

/// Right operand of sub-instance `h`.
pub fn generate_right(b_hat: &BitVectorTensor, h: &SubInstanceIndex, d: &Decomposition) -> Result<BitVectorTensor> {
    generate(b_hat, h, d.beta(), Operand::Right)
}

/// Output accumulator with one lock per host subvector.
pub struct HostOutput {
    levels: usize,
    d_host: usize,
    blocks: Vec<Mutex<Vec<u64>>>,
    held: Vec<AtomicBool>,
    violations: AtomicUsize,
}

impl HostOutput {
    /// All-zero output with `levels` outer levels, `d_host` of them on the host.
    pub fn new(levels: usize, d_host: usize) -> Result<Self> {
        if d_host > levels {
            return Err(BmmError::Plan(format!("{d_host} host levels exceed {levels} levels")));
        }
        let count = 1usize << (2 * d_host);
        let len = crate::BLOCK_WORDS << (2 * (levels - d_host));
        Ok(HostOutput {
            levels,
            d_host,
            blocks: (0..count).map(|_| Mutex::new(vec![0; len])).collect(),
            held: (0..count).map(|_| AtomicBool::new(false)).collect(),
            violations: AtomicUsize::new(0),
        })
    }

    /// Times a subvector was found already marked as being written when its
    /// lock was taken.
    pub fn lock_violations(&self) -> usize {
        self.violations.load(Ordering::SeqCst)
    }

    fn add(&self, x: usize, q: &[u64]) {
        let mut block = self.blocks[x].lock().expect("output lock poisoned");
        if self.held[x].swap(true, Ordering::SeqCst) {
            self.violations.fetch_add(1, Ordering::SeqCst);
        }
        xor_into(&mut block, q);
        self.held[x].store(false, Ordering::SeqCst);
    }

    pub fn into_tensor(self) -> BitVectorTensor {
        let mut words = Vec::with_capacity(self.blocks.len() * self.blocks[0].lock().unwrap().len());
        for b in self.blocks {
            words.extend(b.into_inner().expect("output lock poisoned"));
        }
        BitVectorTensor::from_words(
            BitVectorTensor::interleaved_zeros(self.levels, Operand::Result).mode_lengths().to_vec(),
            words,
            TensorLayout::Interleaved { levels: self.levels, operand: Operand::Result },
        )
        .expect("blocks cover the tensor")
    }
}

/// XORs the product of sub-instance `h` into every output subvector that
/// gamma routes it to. Returns the number of word XORs.
pub fn aggregate(c_hat: &HostOutput, h: &SubInstanceIndex, q: &BitVectorTensor, d: &Decomposition) -> Result<u64> {
    if h.digits.len() != c_hat.d_host {
        return Err(BmmError::Shape(format!("index has {} digits, output has {} host levels", h.digits.len(), c_hat.d_host)));
    }
    let want = c_hat.blocks[0].lock().expect("output lock poisoned").len();
    if q.words().len() != want {
        return Err(BmmError::Shape(format!("product has {} words, subvectors have {want}", q.words().len())));
    }
    Ok(aggregate_words(c_hat, &h.digits, q.words(), d.gamma()))
}

fn aggregate_words(c_hat: &HostOutput, digits: &[usize], q: &[u64], gamma: &BitMatrix) -> u64 {
    let targets = support(gamma, digits, false);
    for &x in &targets {
        c_hat.add(x, q);
    }
    (targets.len() * q.len()) as u64
}

/// Occupancy of a staging buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BufferState {
    Free,
    Occupied,
}

struct SlotInner {
    state: BufferState,
    data: Option<Vec<u64>>,
    h: usize,
}

/// One staging buffer and its state.
struct Slot {
    inner: Mutex<SlotInner>,
    cv: Condvar,
}

impl Slot {
    fn new(len: usize) -> Self {
        Slot {
            inner: Mutex::new(SlotInner { state: BufferState::Free, data: Some(vec![0; len]), h: usize::MAX }),
            cv: Condvar::new(),
        }
    }

    /// Waits until the slot is in `state` and its buffer is present, then
    /// takes the buffer out.
    fn take(&self, state: BufferState) -> (Vec<u64>, usize) {
        let mut g = self.inner.lock().expect("slot lock poisoned");
        while g.state != state || g.data.is_none() {
            g = self.cv.wait(g).expect("slot lock poisoned");
        }
        let data = g.data.take().expect("checked above");
        (data, g.h)
    }

    /// Returns the buffer and moves the slot to `next`, which must differ
    /// from the state it was taken in.
    fn put(&self, data: Vec<u64>, h: usize, next: BufferState, bad: &AtomicUsize) {
        let mut g = self.inner.lock().expect("slot lock poisoned");
        if g.state == next {
            bad.fetch_add(1, Ordering::SeqCst);
        }
        g.state = next;
        g.data = Some(data);
        g.h = h;
        drop(g);
        self.cv.notify_all();
    }
}

/// The per-worker staging buffers `T`, `S` and `Q`.
pub struct WorkBuffers {
    t: Slot,
    s: Slot,
    q: Slot,
}

impl WorkBuffers {
    fn new(len: usize) -> Self {
        WorkBuffers { t: Slot::new(len), s: Slot::new(len), q: Slot::new(len) }
    }
}

/// Result of [`coordinate`] with the bookkeeping needed to audit a run.
#[derive(Debug)]
pub struct Coordinated {
    pub output: BitVectorTensor,
    /// Per sub-instance: times its left and right operands were generated,
    /// its product solved, and its product aggregated.
    pub generated_left: Vec<usize>,
    pub generated_right: Vec<usize>,
    pub solved: Vec<usize>,
    pub aggregated: Vec<usize>,
    /// Sub-instances each worker processed.
    pub per_worker: Vec<usize>,
    pub lock_violations: usize,
    /// Buffer hand-offs that did not flip the slot's state.
    pub state_violations: usize,
}

fn check_inputs(a_hat: &BitVectorTensor, b_hat: &BitVectorTensor, plan: &LayerPlan, d: &Decomposition) -> Result<()> {
    let p = d.params();
    if (p.s, p.t, p.u) != (2, 2, 2) {
        return Err(BmmError::Unsupported("host layer runs <2,2,2> decompositions".into()));
    }
    let la = host_levels(a_hat, Operand::Left, plan.d_host)?;
    let lb = host_levels(b_hat, Operand::Right, plan.d_host)?;
    if la != plan.outer_levels() || lb != la {
        return Err(BmmError::Plan(format!(
            "operands have {la} and {lb} levels, plan has {}",
            plan.outer_levels()
        )));
    }
    Ok(())
}

/// Runs every sub-instance in order on the calling thread.
pub fn coordinate_sequential(
    a_hat: &BitVectorTensor,
    b_hat: &BitVectorTensor,
    plan: &LayerPlan,
    d: &Decomposition,
) -> Result<BitVectorTensor> {
    check_inputs(a_hat, b_hat, plan, d)?;
    let r = d.params().r;
    let out = HostOutput::new(plan.outer_levels(), plan.d_host)?;
    let sub_plan = plan.without_host();
    for linear in 0..r.pow(plan.d_host as u32) {
        let h = SubInstanceIndex::from_linear(linear, plan.d_host, r);
        let t = generate_left(a_hat, &h, d)?;
        let s = generate_right(b_hat, &h, d)?;
        let q = multiply_alt(&t, &s, d, &sub_plan, None)?;
        aggregate(&out, &h, &q, d)?;
    }
    Ok(out.into_tensor())
}

/// Solves the product through `n_workers` four-stage pipelines.
pub fn coordinate(
    a_hat: &BitVectorTensor,
    b_hat: &BitVectorTensor,
    n_workers: usize,
    plan: &LayerPlan,
    d: &Decomposition,
) -> Result<Coordinated> {
    coordinate_with(a_hat, b_hat, n_workers, plan, d, None)
}

pub fn coordinate_with(
    a_hat: &BitVectorTensor,
    b_hat: &BitVectorTensor,
    n_workers: usize,
    plan: &LayerPlan,
    d: &Decomposition,
    counter: Option<&OpCounter>,
) -> Result<Coordinated> {
    if n_workers == 0 {
        return Err(BmmError::Plan("at least one worker is required".into()));
    }
    check_inputs(a_hat, b_hat, plan, d)?;
    let local = OpCounter::new();
    let counter = counter.unwrap_or(&local);
    let r = d.params().r;
    let total = r.pow(plan.d_host as u32);
    let sub_levels = plan.outer_levels() - plan.d_host;
    let sub_len = crate::BLOCK_WORDS << (2 * sub_levels);
    let buffers: Vec<WorkBuffers> = (0..n_workers).map(|_| WorkBuffers::new(sub_len)).collect();
    let counts = || (0..total).map(|_| AtomicUsize::new(0)).collect::<Vec<_>>();
    let run = Run {
        d,
        counter,
        r,
        d_host: plan.d_host,
        total,
        n_workers,
        sub_levels,
        sub_plan: plan.without_host().with_workers(plan.workers / n_workers),
        out: HostOutput::new(plan.outer_levels(), plan.d_host)?,
        gen_l: counts(),
        gen_r: counts(),
        solved: counts(),
        aggregated: counts(),
        state_bad: AtomicUsize::new(0),
    };

    std::thread::scope(|scope| {
        let run = &run;
        for (l, wb) in buffers.iter().enumerate() {
            scope.spawn(move || run.prepare(l, &wb.t, a_hat.words(), d.alpha(), &run.gen_l));
            scope.spawn(move || run.prepare(l, &wb.s, b_hat.words(), d.beta(), &run.gen_r));
            scope.spawn(move || run.solve(l, wb));
            scope.spawn(move || run.aggregate(l, wb));
        }
    });

    let Run { out, gen_l, gen_r, solved, aggregated, state_bad, .. } = run;
    let unwrap = |v: Vec<AtomicUsize>| v.into_iter().map(AtomicUsize::into_inner).collect::<Vec<_>>();
    let lock_violations = out.lock_violations();
    Ok(Coordinated {
        output: out.into_tensor(),
        generated_left: unwrap(gen_l),
        generated_right: unwrap(gen_r),
        solved: unwrap(solved),
        aggregated: unwrap(aggregated),
        per_worker: owner_counts(plan.d_host, r, n_workers),
        lock_violations,
        state_violations: state_bad.into_inner(),
    })
}

/// Shared state of one coordinated run.
struct Run<'a> {
    d: &'a Decomposition,
    counter: &'a OpCounter,
    r: usize,
    d_host: usize,
    total: usize,
    n_workers: usize,
    sub_levels: usize,
    sub_plan: LayerPlan,
    out: HostOutput,
    gen_l: Vec<AtomicUsize>,
    gen_r: Vec<AtomicUsize>,
    solved: Vec<AtomicUsize>,
    aggregated: Vec<AtomicUsize>,
    state_bad: AtomicUsize,
}

impl Run<'_> {
    fn owned(&self, l: usize) -> impl Iterator<Item = usize> {
        (l..self.total).step_by(self.n_workers)
    }

    fn digits(&self, linear: usize) -> Vec<usize> {
        SubInstanceIndex::from_linear(linear, self.d_host, self.r).digits
    }

    fn tensor(&self, words: Vec<u64>, operand: Operand) -> BitVectorTensor {
        let modes = BitVectorTensor::interleaved_zeros(self.sub_levels, operand).mode_lengths().to_vec();
        BitVectorTensor::from_words(modes, words, TensorLayout::Interleaved { levels: self.sub_levels, operand })
            .expect("buffer has the sub-instance shape")
    }

    fn prepare(&self, l: usize, slot: &Slot, src: &[u64], m: &BitMatrix, seen: &[AtomicUsize]) {
        for h in self.owned(l) {
            let (mut buf, _) = slot.take(BufferState::Free);
            let xors = generate_into(src, &self.digits(h), m, &mut buf);
            self.counter.add_host_xors(xors);
            seen[h].fetch_add(1, Ordering::SeqCst);
            slot.put(buf, h, BufferState::Occupied, &self.state_bad);
        }
    }

    fn solve(&self, l: usize, wb: &WorkBuffers) {
        for h in self.owned(l) {
            let (t, ht) = wb.t.take(BufferState::Occupied);
            let (s, hs) = wb.s.take(BufferState::Occupied);
            assert!(ht == h && hs == h, "pipeline stages out of step");
            let tv = self.tensor(t, Operand::Left);
            let sv = self.tensor(s, Operand::Right);
            let (mut q, _) = wb.q.take(BufferState::Free);
            let product = multiply_alt(&tv, &sv, self.d, &self.sub_plan, Some(self.counter)).expect("validated sub-instance");
            q.copy_from_slice(product.words());
            self.solved[h].fetch_add(1, Ordering::SeqCst);
            wb.t.put(tv.into_words(), h, BufferState::Free, &self.state_bad);
            wb.s.put(sv.into_words(), h, BufferState::Free, &self.state_bad);
            wb.q.put(q, h, BufferState::Occupied, &self.state_bad);
        }
    }

    fn aggregate(&self, l: usize, wb: &WorkBuffers) {
        for h in self.owned(l) {
            let (q, hq) = wb.q.take(BufferState::Occupied);
            assert_eq!(hq, h, "pipeline stages out of step");
            let xors = aggregate_words(&self.out, &self.digits(h), &q, self.d.gamma());
            self.counter.add_host_xors(xors);
            self.aggregated[h].fetch_add(1, Ordering::SeqCst);
            wb.q.put(q, h, BufferState::Free, &self.state_bad);
        }
    }
}
