//! Uhlmann holonomy for density operators `P_a / K`.
//!
//! Only the projectors are used; the `1/K` factor cancels in every polar part.
//! The link `P_{a+1} P_a = F_{a+1} (F_{a+1}|F_a) F_a†` has isometry part
//! `F_{a+1} U_{a+1,a} F_a†`, so the ordered product collapses to
//! `F_1 U_I F_1†` and the iterative holonomy is recovered as `F_1† U_uhl F_1`.

use crate::error::{Error, Result};
use crate::grassmann::{self, SubspaceSequence};
use crate::holonomy::{self, Closure};
use crate::matops::{self, CMatrix, Tolerance};

/// Tolerance for `P² = P` and `P† = P`.
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Tolerance for `Tr P = K`.
pub const TRACE_TOL: f64 = 1e-8;

/// Rank-`K` orthogonal projectors `P_1, …, P_m` in `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSequence {
    projectors: Vec<CMatrix>,
    rank: usize,
}

impl ProjectorSequence {
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::InvalidSequence("projector sequence is empty".into()))?;
        let n = first.nrows();
        let trace = first.trace().re;
        let rank = trace.round() as usize;
        for (a, p) in projectors.iter().enumerate() {
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "projector {a} is {}x{}, expected {n}x{n}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            let idem = (p * p - p).norm();
            let herm = matops::hermitian_residual(p);
            if idem > PROJECTOR_TOL || herm > PROJECTOR_TOL {
                return Err(Error::InvalidSequence(format!(
                    "matrix {a} is not an orthogonal projector (idempotency {idem:.2e}, hermiticity {herm:.2e})"
                )));
            }
            let tr = p.trace().re;
            if (tr - rank as f64).abs() > TRACE_TOL || rank == 0 {
                return Err(Error::InvalidSequence(format!(
                    "projector {a} has trace {tr}, expected common rank {rank} >= 1"
                )));
            }
        }
        Ok(Self { projectors, rank })
    }

    pub fn from_sequence(seq: &SubspaceSequence) -> Self {
        Self {
            projectors: seq.frames().iter().map(grassmann::projector).collect(),
            rank: seq.rank(),
        }
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.projectors[0].nrows()
    }
}

/// `Ũ_{1,m} Ũ_{m,m−1} ⋯ Ũ_{2,1}`, with `Ũ_{a+1,a}` the isometry part of `P_{a+1} P_a`.
///
/// Every link, the closing one included, must have rank `K`.
pub fn uhlmann_holonomy(seq: &ProjectorSequence, tol: Tolerance) -> Result<CMatrix> {
    let n = seq.ambient_dim();
    let mut acc: Option<CMatrix> = None;
    for (link, (from, to)) in holonomy::link_pairs(seq.len(), Closure::Closed).into_iter().enumerate() {
        let parts = matops::polar_left(&(&seq.projectors[to] * &seq.projectors[from]), tol)?;
        if parts.rank != seq.rank {
            return Err(Error::Inadmissible {
                link,
                rank: parts.rank,
                dim: seq.rank,
            });
        }
        acc = Some(match acc {
            None => parts.isometry,
            Some(prev) => parts.isometry * prev,
        });
    }
    // Closed link lists are never empty; a single projector links to itself.
    Ok(acc.unwrap_or_else(|| CMatrix::zeros(n, n)))
}

/// `max_{k,l} |[U_I]_{kl} − ⟨1_k|U_uhl|1_l⟩|`.
pub fn compare_iterative(seq: &SubspaceSequence, tol: Tolerance) -> Result<f64> {
    let uhl = uhlmann_holonomy(&ProjectorSequence::from_sequence(seq), tol)?;
    let iterative = holonomy::iterative_holonomy(seq, tol)?;
    let u_i = iterative.matrix_or_err()?;
    let f1 = seq.frame(0).matrix();
    let restricted = f1.adjoint() * uhl * f1;
    Ok((u_i - restricted).iter().map(|z| z.norm()).fold(0.0, f64::max))
}
