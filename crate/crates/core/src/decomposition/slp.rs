//! Straight-line programs over GF(2): branch-free sequences of copies and
//! XORs with a counted number of additions.

use crate::bitmatrix::BitMatrix;
use crate::error::{BmmError, Result};
use crate::word::Word;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reg {
    Input(usize),
    Output(usize),
    Temp(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    /// `dst <- src`
    Copy { dst: Reg, src: Reg },
    /// `dst <- dst + src`
    Add { dst: Reg, src: Reg },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StraightLineProgram {
    input_arity: usize,
    output_arity: usize,
    temps: usize,
    steps: Vec<Step>,
    addition_count: usize,
}

impl StraightLineProgram {
    pub fn new(input_arity: usize, output_arity: usize, steps: Vec<Step>) -> Result<Self> {
        let temps = steps
            .iter()
            .flat_map(|s| match *s {
                Step::Copy { dst, src } | Step::Add { dst, src } => [dst, src],
            })
            .filter_map(|r| match r {
                Reg::Temp(t) => Some(t + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut init_out = vec![false; output_arity];
        let mut init_tmp = vec![false; temps];
        let bad = |msg: String| Err(BmmError::Program(msg));
        let readable = |r: Reg, out: &[bool], tmp: &[bool]| match r {
            Reg::Input(i) => i < input_arity,
            Reg::Output(o) => o < output_arity && out[o],
            Reg::Temp(t) => tmp[t],
        };
        for (n, step) in steps.iter().enumerate() {
            let (dst, src, add) = match *step {
                Step::Copy { dst, src } => (dst, src, false),
                Step::Add { dst, src } => (dst, src, true),
            };
            if !readable(src, &init_out, &init_tmp) {
                return bad(format!("step {n} reads {src:?} before it is written or out of range"));
            }
            if add && (dst == src || !readable(dst, &init_out, &init_tmp)) {
                return bad(format!("step {n} accumulates into {dst:?}, which is unset or its own source"));
            }
            match dst {
                Reg::Input(_) => return bad(format!("step {n} writes an input register")),
                Reg::Output(o) if o >= output_arity => return bad(format!("step {n} writes missing output {o}")),
                Reg::Output(o) => init_out[o] = true,
                Reg::Temp(t) => init_tmp[t] = true,
            }
        }
        if let Some(o) = init_out.iter().position(|&x| !x) {
            return bad(format!("output {o} is never written"));
        }
        let addition_count = steps.iter().filter(|s| matches!(s, Step::Add { .. })).count();
        Ok(StraightLineProgram { input_arity, output_arity, temps, steps, addition_count })
    }

    /// Parses statements such as `o3 = i1 + i2; t0 = o3 + i0`, separated by
    /// newlines or semicolons. Registers are `iN`, `oN` and `tN`. A
    /// statement whose first term is its own target only accumulates.
    pub fn parse(input_arity: usize, output_arity: usize, text: &str) -> Result<Self> {
        let reg = |tok: &str| -> Result<Reg> {
            let tok = tok.trim();
            let (kind, num) = tok.split_at(tok.len().min(1));
            let idx: usize = num.parse().map_err(|_| BmmError::Program(format!("bad register {tok:?}")))?;
            match kind {
                "i" => Ok(Reg::Input(idx)),
                "o" => Ok(Reg::Output(idx)),
                "t" => Ok(Reg::Temp(idx)),
                _ => Err(BmmError::Program(format!("bad register {tok:?}"))),
            }
        };
        let mut steps = Vec::new();
        for stmt in text.split(['\n', ';']).map(str::trim).filter(|s| !s.is_empty()) {
            let (lhs, rhs) =
                stmt.split_once('=').ok_or_else(|| BmmError::Program(format!("missing '=' in {stmt:?}")))?;
            let dst = reg(lhs)?;
            let terms = rhs.split('+').map(reg).collect::<Result<Vec<_>>>()?;
            let mut rest = terms.iter();
            match rest.next() {
                Some(&first) if first == dst => {}
                Some(&first) => steps.push(Step::Copy { dst, src: first }),
                None => return Err(BmmError::Program(format!("empty right-hand side in {stmt:?}"))),
            }
            steps.extend(rest.map(|&src| Step::Add { dst, src }));
        }
        Self::new(input_arity, output_arity, steps)
    }

    pub fn input_arity(&self) -> usize {
        self.input_arity
    }

    pub fn output_arity(&self) -> usize {
        self.output_arity
    }

    pub fn temp_count(&self) -> usize {
        self.temps
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Number of XOR steps.
    pub fn addition_count(&self) -> usize {
        self.addition_count
    }

    /// Evaluates the program with one word per register.
    pub fn eval<W: Word>(&self, input: &[W]) -> Result<Vec<W>> {
        if input.len() != self.input_arity {
            return Err(BmmError::Shape(format!(
                "program takes {} inputs, got {}",
                self.input_arity,
                input.len()
            )));
        }
        let mut out = vec![W::zero(); self.output_arity];
        let mut temps = vec![W::zero(); self.temps];
        self.eval_flat(input, &mut out, 1, &mut temps);
        Ok(out)
    }

    /// Evaluates on registers of `len` words stored back to back: input `i`
    /// is `input[i*len..(i+1)*len]`, likewise for outputs. `temps` must hold
    /// `temp_count() * len` words. Returns the number of word XORs.
    pub fn eval_flat<W: Word>(&self, input: &[W], output: &mut [W], len: usize, temps: &mut [W]) -> u64 {
        self.eval_strided(input, (0, 1), output, (0, 1), len, temps)
    }

    /// Like [`eval_flat`](Self::eval_flat), but input register `i` starts at
    /// word `(base + i * step) * len` for `(base, step) = inp`, and the same
    /// for outputs with `out`.
    pub fn eval_strided<W: Word>(
        &self,
        input: &[W],
        inp: (usize, usize),
        output: &mut [W],
        out: (usize, usize),
        len: usize,
        temps: &mut [W],
    ) -> u64 {
        debug_assert!(temps.len() >= self.temps * len);
        let ia = |i: usize| (inp.0 + i * inp.1) * len;
        let oa = |o: usize| (out.0 + o * out.1) * len;
        for step in &self.steps {
            let (dst, src, add) = match *step {
                Step::Copy { dst, src } => (dst, src, false),
                Step::Add { dst, src } => (dst, src, true),
            };
            let apply = |d: &mut [W], s: &[W]| {
                if add {
                    crate::word::xor_into(d, s);
                } else {
                    d.copy_from_slice(s);
                }
            };
            match (dst, src) {
                (Reg::Output(o), Reg::Input(i)) => apply(&mut output[oa(o)..oa(o) + len], &input[ia(i)..ia(i) + len]),
                (Reg::Output(o), Reg::Temp(t)) => apply(&mut output[oa(o)..oa(o) + len], &temps[t * len..(t + 1) * len]),
                (Reg::Output(o), Reg::Output(p)) => {
                    let (d, s) = two_mut(output, oa(o), oa(p), len);
                    apply(d, s);
                }
                (Reg::Temp(t), Reg::Input(i)) => apply(&mut temps[t * len..(t + 1) * len], &input[ia(i)..ia(i) + len]),
                (Reg::Temp(t), Reg::Output(o)) => apply(&mut temps[t * len..(t + 1) * len], &output[oa(o)..oa(o) + len]),
                (Reg::Temp(t), Reg::Temp(u)) => {
                    let (d, s) = two_mut(temps, t * len, u * len, len);
                    apply(d, s);
                }
                (Reg::Input(_), _) => unreachable!("validated at construction"),
            }
        }
        (self.addition_count * len) as u64
    }

    /// Dense matrix of the map computed by the program, `output x input`.
    pub fn to_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.output_arity.max(1), self.input_arity.max(1)).expect("nonzero dims");
        for base in (0..self.input_arity).step_by(64) {
            let input: Vec<u64> =
                (0..self.input_arity).map(|i| if (base..base + 64).contains(&i) { 1 << (i - base) } else { 0 }).collect();
            let out = self.eval(&input).expect("arity matches");
            for (row, word) in out.iter().enumerate() {
                for bit in 0..64.min(self.input_arity - base) {
                    if (word >> bit) & 1 == 1 {
                        m.put(row, base + bit, true);
                    }
                }
            }
        }
        m
    }

    /// True when the program computes `m * x` for every input `x`. Programs
    /// with at most eight inputs are checked on all `2^inputs` vectors; wider
    /// ones on the unit vectors, which suffices by linearity.
    pub fn matches(&self, m: &BitMatrix) -> bool {
        if m.rows() != self.output_arity || m.cols() != self.input_arity {
            return false;
        }
        if self.input_arity > 8 {
            return self.to_matrix() == *m;
        }
        let vectors = 1usize << self.input_arity;
        for base in (0..vectors).step_by(128) {
            let lanes = (vectors - base).min(128);
            let input: Vec<u128> = (0..self.input_arity)
                .map(|i| (0..lanes).filter(|&v| ((base + v) >> i) & 1 == 1).fold(0u128, |acc, v| acc | 1 << v))
                .collect();
            let got = self.eval(&input).expect("arity matches");
            for (row, &word) in got.iter().enumerate() {
                let expect = (0..lanes).fold(0u128, |acc, v| {
                    let x = base + v;
                    let dot = (0..self.input_arity).filter(|&j| m.bit(row, j) && (x >> j) & 1 == 1).count();
                    acc | ((dot as u128 & 1) << v)
                });
                if word != expect {
                    return false;
                }
            }
        }
        true
    }

    /// Program that copies each input to the matching output.
    pub fn identity(n: usize) -> Self {
        let steps = (0..n).map(|k| Step::Copy { dst: Reg::Output(k), src: Reg::Input(k) }).collect();
        Self::new(n, n, steps).expect("identity program is valid")
    }

    /// Naive program evaluating each row of `m` on its own.
    pub fn from_matrix(m: &BitMatrix) -> Result<Self> {
        let mut steps = Vec::new();
        for row in 0..m.rows() {
            let mut cols = (0..m.cols()).filter(|&c| m.bit(row, c));
            let first = cols
                .next()
                .ok_or_else(|| BmmError::Program(format!("row {row} is zero; programs have no constant step")))?;
            steps.push(Step::Copy { dst: Reg::Output(row), src: Reg::Input(first) });
            steps.extend(cols.map(|c| Step::Add { dst: Reg::Output(row), src: Reg::Input(c) }));
        }
        Self::new(m.cols(), m.rows(), steps)
    }
}

/// Disjoint `(&mut buf[d..d+len], &buf[s..s+len])`.
fn two_mut<W>(buf: &mut [W], d: usize, s: usize, len: usize) -> (&mut [W], &[W]) {
    debug_assert!(d + len <= s || s + len <= d);
    if d < s {
        let (lo, hi) = buf.split_at_mut(s);
        (&mut lo[d..d + len], &hi[..len])
    } else {
        let (lo, hi) = buf.split_at_mut(d);
        (&mut hi[..len], &lo[s..s + len])
    }
}

impl fmt::Debug for StraightLineProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Slp({} -> {}, {} additions)", self.input_arity, self.output_arity, self.addition_count)
    }
}

impl fmt::Display for StraightLineProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |r: Reg| match r {
            Reg::Input(i) => format!("i{i}"),
            Reg::Output(o) => format!("o{o}"),
            Reg::Temp(t) => format!("t{t}"),
        };
        for step in &self.steps {
            match *step {
                Step::Copy { dst, src } => writeln!(f, "{} = {}", name(dst), name(src))?,
                Step::Add { dst, src } => writeln!(f, "{0} = {0} + {1}", name(dst), name(src))?,
            }
        }
        Ok(())
    }
}
