//! The published ⟨2,2,2⟩ decompositions with their straight-line programs.
//!
//! Operand entries are indexed `2i + j` (`X00, X01, X10, X11`) and products
//! `0..r`.

use super::{Decomposition, Params, StraightLineProgram};
use crate::bitmatrix::BitMatrix;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Strassen-Winograd in the standard basis.
    StrassenWinograd,
    /// Alternative basis with self-inverse basis changes.
    AltSelfInverse,
    /// Alternative basis with `chi = phi^-1 = psi^-1`, closed under chaining.
    AltChaining,
    /// The eight-product schoolbook algorithm.
    Elementary,
}

impl Builtin {
    pub const ALL: [Builtin; 4] =
        [Builtin::StrassenWinograd, Builtin::AltSelfInverse, Builtin::AltChaining, Builtin::Elementary];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::StrassenWinograd => "sw",
            Builtin::AltSelfInverse => "alt-si",
            Builtin::AltChaining => "alt-chain",
            Builtin::Elementary => "elementary",
        }
    }

    pub fn decomposition(self) -> Decomposition {
        match self {
            Builtin::StrassenWinograd => strassen_winograd(),
            Builtin::AltSelfInverse => alt_self_inverse(),
            Builtin::AltChaining => alt_chaining(),
            Builtin::Elementary => elementary(),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown decomposition {s:?}; expected one of sw, alt-si, alt-chain, elementary"))
    }
}

fn mat(rows: &[&str]) -> BitMatrix {
    BitMatrix::from_rows(rows).expect("literal matrix")
}

fn slp(inputs: usize, outputs: usize, text: &str) -> StraightLineProgram {
    StraightLineProgram::parse(inputs, outputs, text).expect("literal program")
}

const SQUARE: Params = Params { s: 2, t: 2, u: 2, r: 7 };

struct Parts {
    alpha: (&'static [&'static str], &'static str),
    beta: (&'static [&'static str], &'static str),
    gamma: (&'static [&'static str], &'static str),
    phi: (&'static [&'static str], &'static str),
    psi: (&'static [&'static str], &'static str),
    chi: (&'static [&'static str], &'static str),
}

const I4: &[&str] = &["1000", "0100", "0010", "0001"];
const COPY4: &str = "o0 = i0; o1 = i1; o2 = i2; o3 = i3";

fn build(name: &'static str, params: Params, p: Parts) -> Decomposition {
    let (st, tu, su, r) = (params.s * params.t, params.t * params.u, params.s * params.u, params.r);
    Decomposition::new(
        name,
        params,
        [mat(p.alpha.0), mat(p.beta.0), mat(p.gamma.0), mat(p.phi.0), mat(p.psi.0), mat(p.chi.0)],
        [
            slp(st, r, p.alpha.1),
            slp(tu, r, p.beta.1),
            slp(r, su, p.gamma.1),
            slp(st, st, p.phi.1),
            slp(tu, tu, p.psi.1),
            slp(su, su, p.chi.1),
        ],
    )
    .expect("builtin decomposition is consistent")
}

fn strassen_winograd() -> Decomposition {
    build(
        "sw",
        SQUARE,
        Parts {
            alpha: (
                &["0011", "0100", "0101", "0111", "1111", "0010", "1000"],
                "o0 = i2 + i3; o1 = i1; o2 = i1 + i3; o3 = i2 + o2; o4 = i0 + o3; o5 = i2; o6 = i0",
            ),
            beta: (
                &["0011", "0010", "0101", "0111", "0100", "1111", "1000"],
                "o0 = i2 + i3; o1 = i2; o2 = i1 + i3; o3 = i2 + o2; o4 = i1; o5 = i0 + o3; o6 = i0",
            ),
            gamma: (
                &["0100001", "1101100", "0111010", "1111000"],
                "t0 = i1 + i3; t1 = i2 + t0; t2 = i4 + t0
                 o0 = i1 + i6; o1 = i0 + t2; o2 = i5 + t1; o3 = i0 + t1",
            ),
            phi: (I4, COPY4),
            psi: (I4, COPY4),
            chi: (I4, COPY4),
        },
    )
}

fn alt_self_inverse() -> Decomposition {
    const PHI: &[&str] = &["1000", "0100", "0010", "0111"];
    const PHI_SLP: &str = "o0 = i0; o1 = i1; o2 = i2; o3 = i1 + i2 + i3";
    build(
        "alt-si",
        SQUARE,
        Parts {
            alpha: (
                &["1000", "0100", "0010", "0001", "1001", "0101", "0011"],
                "o0 = i0; o1 = i1; o2 = i2; o3 = i3; o4 = i0 + i3; o5 = i1 + i3; o6 = i2 + i3",
            ),
            beta: (
                &["1000", "0010", "1001", "0001", "0100", "0101", "0011"],
                "o0 = i0; o1 = i2; o2 = i0 + i3; o3 = i3; o4 = i1; o5 = i1 + i3; o6 = i2 + i3",
            ),
            gamma: (
                &["1100000", "0000101", "0010010", "0101011"],
                "o0 = i0 + i1; o1 = i4 + i6; o2 = i2 + i5; o3 = i1 + i3 + i5 + i6",
            ),
            phi: (PHI, PHI_SLP),
            psi: (PHI, PHI_SLP),
            chi: (&["1000", "0101", "0011", "0001"], "o0 = i0; o1 = i1 + i3; o2 = i2 + i3; o3 = i3"),
        },
    )
}

fn alt_chaining() -> Decomposition {
    const PHI: &[&str] = &["1000", "0100", "0111", "0101"];
    const PHI_SLP: &str = "o0 = i0; o1 = i1; o3 = i1 + i3; o2 = o3 + i2";
    build(
        "alt-chain",
        SQUARE,
        Parts {
            alpha: (
                &["1000", "0100", "0010", "0001", "1010", "0110", "0011"],
                "o0 = i0; o1 = i1; o2 = i2; o3 = i3; o4 = i0 + i2; o5 = i1 + i2; o6 = i2 + i3",
            ),
            beta: (
                &["1000", "0011", "0010", "0001", "0100", "0110", "1010"],
                "o0 = i0; o1 = i2 + i3; o2 = i2; o3 = i3; o4 = i1; o5 = i1 + i2; o6 = i0 + i2",
            ),
            gamma: (
                &["1100000", "0110110", "0110101", "0001100"],
                "t0 = i1 + i2 + i4; o0 = i0 + i1; o1 = t0 + i5; o2 = t0 + i6; o3 = i3 + i4",
            ),
            phi: (PHI, PHI_SLP),
            psi: (PHI, PHI_SLP),
            chi: (&["1000", "0100", "0011", "0101"], "o0 = i0; o1 = i1; o2 = i2 + i3; o3 = i1 + i3"),
        },
    )
}

/// Product `h = 4i + 2j + k` multiplies `A_ij` by `B_jk`.
fn elementary() -> Decomposition {
    build(
        "elementary",
        Params { s: 2, t: 2, u: 2, r: 8 },
        Parts {
            alpha: (
                &["1000", "1000", "0100", "0100", "0010", "0010", "0001", "0001"],
                "o0 = i0; o1 = i0; o2 = i1; o3 = i1; o4 = i2; o5 = i2; o6 = i3; o7 = i3",
            ),
            beta: (
                &["1000", "0100", "0010", "0001", "1000", "0100", "0010", "0001"],
                "o0 = i0; o1 = i1; o2 = i2; o3 = i3; o4 = i0; o5 = i1; o6 = i2; o7 = i3",
            ),
            gamma: (
                &["10100000", "01010000", "00001010", "00000101"],
                "o0 = i0 + i2; o1 = i1 + i3; o2 = i4 + i6; o3 = i5 + i7",
            ),
            phi: (I4, COPY4),
            psi: (I4, COPY4),
            chi: (I4, COPY4),
        },
    )
}
