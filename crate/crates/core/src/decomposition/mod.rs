//! Bilinear decompositions `(zeta | xi, eta)`, their alternative-basis
//! factorisations `zeta = chi gamma`, `xi = alpha phi`, `eta = beta psi`, and
//! the straight-line programs that apply each factor.

mod builtin;
mod slp;

pub use builtin::Builtin;
pub use slp::{Reg, Step, StraightLineProgram};

use crate::bitmatrix::BitMatrix;
use crate::error::{BmmError, Result};

/// Block dimensions `<s, t, u>` and rank `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    pub s: usize,
    pub t: usize,
    pub u: usize,
    pub r: usize,
}

/// `C = zeta (xi A ⊙ eta B)` for an `s x t` by `t x u` product with `r` multiplications.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearTriple {
    /// `su x r`
    pub zeta: BitMatrix,
    /// `r x st`
    pub xi: BitMatrix,
    /// `r x tu`
    pub eta: BitMatrix,
    pub params: Params,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Traits {
    /// `phi`, `psi` and `chi` are their own inverses.
    pub self_inverse_bases: bool,
    /// `phi = psi` and `chi = phi^-1`, so products can stay in the alternative basis.
    pub supports_chaining: bool,
}

/// The six factor matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    Alpha,
    Beta,
    Gamma,
    Phi,
    Psi,
    Chi,
}

impl Factor {
    pub const ALL: [Factor; 6] = [Factor::Alpha, Factor::Beta, Factor::Gamma, Factor::Phi, Factor::Psi, Factor::Chi];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Alpha => "alpha",
            Factor::Beta => "beta",
            Factor::Gamma => "gamma",
            Factor::Phi => "phi",
            Factor::Psi => "psi",
            Factor::Chi => "chi",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    name: String,
    params: Params,
    matrices: [BitMatrix; 6],
    slps: [StraightLineProgram; 6],
    traits: Traits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostPart {
    BasisChanges,
    LinearCombinations,
}

impl Decomposition {
    /// Matrices and programs are given in [`Factor::ALL`] order. Shapes,
    /// program/matrix agreement and invertibility of the basis changes are
    /// checked; the traits are derived from the matrices.
    pub fn new(
        name: impl Into<String>,
        params: Params,
        matrices: [BitMatrix; 6],
        slps: [StraightLineProgram; 6],
    ) -> Result<Self> {
        let Params { s, t, u, r } = params;
        let shapes = [(r, s * t), (r, t * u), (s * u, r), (s * t, s * t), (t * u, t * u), (s * u, s * u)];
        for ((f, m), (rows, cols)) in Factor::ALL.iter().zip(&matrices).zip(shapes) {
            if (m.rows(), m.cols()) != (rows, cols) {
                return Err(BmmError::Shape(format!(
                    "{} is {}x{}, expected {rows}x{cols}",
                    f.name(),
                    m.rows(),
                    m.cols()
                )));
            }
        }
        for ((f, m), p) in Factor::ALL.iter().zip(&matrices).zip(&slps) {
            if !p.matches(m) {
                return Err(BmmError::Program(format!("program for {} does not compute its matrix", f.name())));
            }
        }
        let mut inverses = Vec::new();
        for m in &matrices[3..] {
            let inv = m
                .inverse_gf2()?
                .ok_or_else(|| BmmError::Unsupported("basis change matrix is singular".into()))?;
            inverses.push(inv);
        }
        let [_, _, _, phi, psi, chi] = &matrices;
        let traits = Traits {
            self_inverse_bases: inverses[0] == *phi && inverses[1] == *psi && inverses[2] == *chi,
            supports_chaining: phi == psi && inverses[0] == *chi,
        };
        Ok(Decomposition { name: name.into(), params, matrices, slps, traits })
    }

    pub fn builtin(b: Builtin) -> Self {
        b.decomposition()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn traits(&self) -> Traits {
        self.traits
    }

    pub fn matrix(&self, f: Factor) -> &BitMatrix {
        &self.matrices[f as usize]
    }

    pub fn slp(&self, f: Factor) -> &StraightLineProgram {
        &self.slps[f as usize]
    }

    pub fn additions(&self, f: Factor) -> usize {
        self.slp(f).addition_count()
    }

    pub fn alpha(&self) -> &BitMatrix {
        self.matrix(Factor::Alpha)
    }

    pub fn beta(&self) -> &BitMatrix {
        self.matrix(Factor::Beta)
    }

    pub fn gamma(&self) -> &BitMatrix {
        self.matrix(Factor::Gamma)
    }

    pub fn phi(&self) -> &BitMatrix {
        self.matrix(Factor::Phi)
    }

    pub fn psi(&self) -> &BitMatrix {
        self.matrix(Factor::Psi)
    }

    pub fn chi(&self) -> &BitMatrix {
        self.matrix(Factor::Chi)
    }

    /// True when all three basis changes are identities.
    pub fn has_standard_bases(&self) -> bool {
        self.matrices[3..].iter().all(BitMatrix::is_identity)
    }
}

/// Checks `sum_h zeta[i'k', h] xi[h, ij] eta[h, j'k] = [i=i'][j=j'][k=k']`
/// over GF(2) for every index combination.
pub fn verify_triple_product(t: &BilinearTriple) -> bool {
    let Params { s, t: tt, u, r } = t.params;
    if (t.zeta.rows(), t.zeta.cols()) != (s * u, r)
        || (t.xi.rows(), t.xi.cols()) != (r, s * tt)
        || (t.eta.rows(), t.eta.cols()) != (r, tt * u)
    {
        return false;
    }
    for i in 0..s {
        for j in 0..tt {
            for j2 in 0..tt {
                for k in 0..u {
                    for i2 in 0..s {
                        for k2 in 0..u {
                            let sum = (0..r)
                                .filter(|&h| {
                                    t.zeta.bit(i2 * u + k2, h) && t.xi.bit(h, i * tt + j) && t.eta.bit(h, j2 * u + k)
                                })
                                .count();
                            let want = i == i2 && j == j2 && k == k2;
                            if (sum % 2 == 1) != want {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// `(chi gamma | alpha phi, beta psi)`.
pub fn compose(d: &Decomposition) -> Result<BilinearTriple> {
    Ok(BilinearTriple {
        zeta: d.chi().mul_gf2(d.gamma())?,
        xi: d.alpha().mul_gf2(d.phi())?,
        eta: d.beta().mul_gf2(d.psi())?,
        params: d.params(),
    })
}

/// `(a ⊗ b)[i*p + k, j*q + l] = a[i, j] b[k, l]` for `b` of shape `p x q`.
pub fn kronecker(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    let (p, q) = (b.rows(), b.cols());
    let mut out = BitMatrix::zeros(a.rows() * p, a.cols() * q).expect("nonzero dims");
    for i in 0..a.rows() {
        for j in (0..a.cols()).filter(|&j| a.bit(i, j)) {
            for k in 0..p {
                for l in (0..q).filter(|&l| b.bit(k, l)) {
                    out.put(i * p + k, j * q + l, true);
                }
            }
        }
    }
    out
}

/// Reorders the columns (or rows) of a Kronecker product of pair-indexed
/// factors from `(x1 y1)(x2 y2)` order to the `(x1 x2)(y1 y2)` order of the
/// combined block matrix.
fn regroup(m: &BitMatrix, axis: Axis, (_, ny1): (usize, usize), (nx2, ny2): (usize, usize)) -> BitMatrix {
    let map = |kron: usize| {
        let (c1, c2) = (kron / (nx2 * ny2), kron % (nx2 * ny2));
        let (x1, y1, x2, y2) = (c1 / ny1, c1 % ny1, c2 / ny2, c2 % ny2);
        (x1 * nx2 + x2) * (ny1 * ny2) + (y1 * ny2 + y2)
    };
    let mut out = BitMatrix::zeros(m.rows(), m.cols()).expect("nonzero dims");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m.bit(i, j) {
                match axis {
                    Axis::Cols => out.put(i, map(j), true),
                    Axis::Rows => out.put(map(i), j, true),
                }
            }
        }
    }
    out
}

/// Componentwise Kronecker product of two triples, with the pair indices
/// regrouped so the result is again a triple for the combined block sizes.
pub fn kronecker_triple(a: &BilinearTriple, b: &BilinearTriple) -> BilinearTriple {
    let (p, q) = (a.params, b.params);
    BilinearTriple {
        zeta: regroup(&kronecker(&a.zeta, &b.zeta), Axis::Rows, (p.s, p.u), (q.s, q.u)),
        xi: regroup(&kronecker(&a.xi, &b.xi), Axis::Cols, (p.s, p.t), (q.s, q.t)),
        eta: regroup(&kronecker(&a.eta, &b.eta), Axis::Cols, (p.t, p.u), (q.t, q.u)),
        params: Params { s: p.s * q.s, t: p.t * q.t, u: p.u * q.u, r: p.r * q.r },
    }
}

pub fn check_self_inverse(m: &BitMatrix) -> Result<bool> {
    if !m.is_square() {
        return Err(BmmError::Shape(format!("{}x{} matrix cannot be self-inverse", m.rows(), m.cols())));
    }
    Ok(m.mul_gf2(m)?.is_identity())
}

pub fn check_mutual_inverse(a: &BitMatrix, b: &BitMatrix) -> Result<bool> {
    if !a.is_square() || (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(BmmError::Shape("mutual inverse needs two square matrices of one size".into()));
    }
    Ok(a.mul_gf2(b)?.is_identity() && b.mul_gf2(a)?.is_identity())
}

/// Row or column popcounts, ascending.
pub fn weight_distribution(m: &BitMatrix, axis: Axis) -> Vec<usize> {
    let mut w = match axis {
        Axis::Rows => m.row_weights(),
        Axis::Cols => m.col_weights(),
    };
    w.sort_unstable();
    w
}

/// Closed-form addition counts for a `depth`-level recursion of a square
/// decomposition, in units of one entry at the bottom of the recursion.
///
/// Basis changes: `(P_chi + P_phi + P_psi) s^(2(depth-1)) depth`.
/// Linear combinations: `(P_gamma + P_alpha + P_beta) (r^depth - s^(2 depth)) / (r - s^2)`.
pub fn predicted_additions(d: &Decomposition, depth: u32, part: CostPart) -> Result<u64> {
    let Params { s, t, u, r } = d.params();
    if s != t || t != u || r <= s * s {
        return Err(BmmError::Unsupported(format!(
            "closed form needs s = t = u and r > s^2, got <{s},{t},{u}>_{r}"
        )));
    }
    if depth == 0 {
        return Ok(0);
    }
    let (s, r) = (s as u64, r as u64);
    let p = |fs: [Factor; 3]| fs.iter().map(|&f| d.additions(f) as u64).sum::<u64>();
    Ok(match part {
        CostPart::BasisChanges => {
            p([Factor::Chi, Factor::Phi, Factor::Psi]) * (s * s).pow(depth - 1) * u64::from(depth)
        }
        CostPart::LinearCombinations => {
            p([Factor::Gamma, Factor::Alpha, Factor::Beta]) * (r.pow(depth) - (s * s).pow(depth)) / (r - s * s)
        }
    })
}
