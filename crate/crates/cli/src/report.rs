use bitmm::{Algo, LayerPlan, OpCounts, Semiring};
use serde::Serialize;
use std::time::Duration;

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanReport {
    pub d_host: usize,
    pub d_serial: usize,
    pub d_parallel: usize,
}

impl From<&LayerPlan> for PlanReport {
    fn from(p: &LayerPlan) -> Self {
        PlanReport { d_host: p.d_host, d_serial: p.d_serial, d_parallel: p.d_parallel }
    }
}

/// One line of `multiply` and `bench` output. Counters are `null` for the
/// cubic algorithms, which are not instrumented.
#[derive(Serialize, Debug, Clone)]
pub struct BenchReport {
    pub algo: String,
    pub ring: String,
    pub n: usize,
    pub plan: Option<PlanReport>,
    pub workers: usize,
    pub repeats: u32,
    pub wall_time_seconds: f64,
    pub effective_bops: f64,
    pub kernel_invocations: Option<u64>,
    pub word_xor_count: Option<u64>,
    pub basis_xor_count: Option<u64>,
    pub include_transforms: bool,
    pub check: Option<bool>,
}

impl BenchReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        algo: Algo,
        ring: Semiring,
        shape: (usize, usize, usize),
        plan: Option<&LayerPlan>,
        workers: usize,
        repeats: u32,
        time: Duration,
        counts: Option<OpCounts>,
        include_transforms: bool,
    ) -> Self {
        let secs = time.as_secs_f64();
        BenchReport {
            algo: algo.name().to_string(),
            ring: ring.name().to_string(),
            n: shape.0,
            plan: plan.map(PlanReport::from),
            workers,
            repeats,
            wall_time_seconds: secs,
            effective_bops: if secs > 0.0 { elementary_ops(shape) as f64 / secs } else { f64::INFINITY },
            kernel_invocations: counts.map(|c| c.kernel_invocations),
            word_xor_count: counts.map(|c| c.word_xors),
            basis_xor_count: counts.map(|c| c.basis_xors),
            include_transforms,
            check: None,
        }
    }

    pub fn line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Bit operations of the elementary algorithm for an `m x k` by `k x n`
/// product: `m n (2k - 1)`, which is `2n^3 - n^2` when square.
pub fn elementary_ops((m, k, n): (usize, usize, usize)) -> u128 {
    (m as u128) * (n as u128) * (2 * k as u128).saturating_sub(1)
}

pub fn median(times: &mut [Duration]) -> Duration {
    times.sort_unstable();
    let mid = times.len() / 2;
    if times.len() % 2 == 1 {
        times[mid]
    } else {
        (times[mid - 1] + times[mid]) / 2
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct TransformReport {
    pub transform: String,
    pub direction: Option<String>,
    pub operand: Option<String>,
    pub n: usize,
    pub levels: Option<usize>,
    pub workers: usize,
    pub wall_time_seconds: f64,
}
