use crate::error::{BmmError, Result};
use crate::BLOCK;

/// How the recursion levels of an `n x n` product are split between the
/// host, serial, parallel and inner layers. The inner layer is always one
/// level of side 64, so `n = 2^(d_host + d_serial + d_parallel) * 64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LayerPlan {
    pub d_host: usize,
    pub d_serial: usize,
    pub d_parallel: usize,
    pub workers: usize,
}

/// Levels the default chooser gives the parallel layer, and then the serial one.
const DEFAULT_PARALLEL: usize = 3;
const DEFAULT_SERIAL: usize = 3;

impl LayerPlan {
    pub const D_INNER: usize = 1;
    /// Inner kernel side.
    pub const M: usize = BLOCK;
    /// Word width in bits.
    pub const W: usize = crate::WORD_BITS;

    pub fn new(d_host: usize, d_serial: usize, d_parallel: usize, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(BmmError::Plan("worker count must be at least 1".into()));
        }
        if d_host + d_serial + d_parallel > 24 {
            return Err(BmmError::Plan("more than 24 outer levels".into()));
        }
        Ok(LayerPlan { d_host, d_serial, d_parallel, workers })
    }

    /// Default plan for side `n`: up to three parallel levels, then up to
    /// three serial levels, and whatever remains on the host.
    pub fn for_size(n: usize, workers: usize) -> Result<Self> {
        Self::resolve(n, None, None, None, workers)
    }

    /// Fills in unspecified level counts for side `n`. Missing counts are
    /// assigned in the order parallel, serial, host; each takes at most three
    /// levels unless it is the last one left unspecified, which takes the rest.
    pub fn resolve(
        n: usize,
        d_host: Option<usize>,
        d_serial: Option<usize>,
        d_parallel: Option<usize>,
        workers: usize,
    ) -> Result<Self> {
        let levels = outer_levels_for(n)?;
        let given: usize = [d_host, d_serial, d_parallel].iter().flatten().sum();
        if given > levels {
            return Err(BmmError::Plan(format!("{given} levels requested but n = {n} has only {levels}")));
        }
        let mut left = levels - given;
        let mut fill = |v: Option<usize>, cap: usize, last: bool| {
            v.unwrap_or_else(|| {
                let take = if last { left } else { left.min(cap) };
                left -= take;
                take
            })
        };
        let p = fill(d_parallel, DEFAULT_PARALLEL, d_serial.is_some() && d_host.is_some());
        let s = fill(d_serial, DEFAULT_SERIAL, d_host.is_some());
        let h = fill(d_host, usize::MAX, true);
        let plan = Self::new(h, s, p, workers)?;
        plan.check_size(n)?;
        Ok(plan)
    }

    pub fn outer_levels(&self) -> usize {
        self.d_host + self.d_serial + self.d_parallel
    }

    pub fn total_depth(&self) -> usize {
        self.outer_levels() + Self::D_INNER
    }

    /// Matrix side the plan is built for.
    pub fn n(&self) -> usize {
        Self::M << self.outer_levels()
    }

    pub fn check_size(&self, n: usize) -> Result<()> {
        if outer_levels_for(n)? != self.outer_levels() {
            return Err(BmmError::Plan(format!(
                "plan {}+{}+{} outer levels is for n = {}, input has n = {n}",
                self.d_host,
                self.d_serial,
                self.d_parallel,
                self.n()
            )));
        }
        Ok(())
    }

    /// The plan each host sub-instance is solved with.
    pub fn without_host(&self) -> LayerPlan {
        LayerPlan { d_host: 0, ..*self }
    }

    pub fn with_workers(&self, workers: usize) -> LayerPlan {
        LayerPlan { workers: workers.max(1), ..*self }
    }

    /// Mode lengths of an interleaved operand under this plan.
    pub fn mode_lengths(&self) -> Vec<usize> {
        let mut m = vec![4; self.outer_levels()];
        m.push(Self::M * Self::M);
        m
    }
}

/// `log2(n / 64)` for a power of two `n >= 64`.
pub fn outer_levels_for(n: usize) -> Result<usize> {
    if n < BLOCK || !n.is_power_of_two() {
        return Err(BmmError::Shape(format!("n = {n} is not a power of two of at least {BLOCK}")));
    }
    Ok((n / BLOCK).trailing_zeros() as usize)
}
