//! Direct and iterative holonomies of a discrete subspace sequence.
//!
//! For frames `F_1, …, F_m` the direct holonomy is the isometry part of the
//! cyclic overlap product
//!
//! ```text
//! D = (F_1|F_m)(F_m|F_{m-1}) ⋯ (F_2|F_1)
//! ```
//!
//! and the iterative holonomy is the isometry part of the product of the
//! per-link relative phases
//!
//! ```text
//! I = U_{1,m} U_{m,m-1} ⋯ U_{2,1},   U_{a+1,a} = |(F_{a+1}|F_a)|^⊖ (F_{a+1}|F_a).
//! ```
//!
//! When every link overlaps with full rank both are unitary. When some link is
//! only partially overlapping the Moore–Penrose inverse makes both well
//! defined partial isometries, and when a link or the whole product vanishes
//! the result is [`HolonomyKind::Undefined`].
//!
//! If an intermediate link is partial, the interferometric maximization that
//! defines the iterative holonomy step by step has a degenerate set of
//! maximizers. [`iterative_holonomy`] returns the pseudoinverse product above
//! and does not try to resolve that degeneracy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{self, Frame, OverlapClass, OverlapTag, SubspaceSequence};
use crate::matops::{self, c, identity, CMatrix, Tolerance};

/// Whether the product runs back from `p_m` to `p_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    /// Extended sequence `p_1, …, p_m, p_1`.
    #[default]
    Closed,
    /// `p_1, …, p_m` only; the continuum limit then lacks the endpoint factor `U_{0,1}`.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HolonomyKind {
    FullUnitary,
    PartialIsometry { rank: usize },
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UndefinedReason {
    /// The overlap matrix of this link vanishes.
    OrthogonalLink { link: usize },
    /// Every link overlaps but the ordered product has rank 0.
    VanishingProduct,
}

/// Overlap class of the link `from → to` (indices are 0-based frame positions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDiagnostic {
    pub from: usize,
    pub to: usize,
    pub class: OverlapClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyResult {
    /// `K×K`; `None` when undefined.
    #[serde(with = "crate::io::opt_matrix_rows")]
    pub matrix: Option<CMatrix>,
    pub kind: HolonomyKind,
    pub links: Vec<LinkDiagnostic>,
    /// Singular values of the final product (`D` or `I`), nonincreasing.
    pub product_singular_values: Vec<f64>,
    pub undefined_reason: Option<UndefinedReason>,
}

impl HolonomyResult {
    pub fn is_defined(&self) -> bool {
        self.matrix.is_some()
    }

    pub fn rank(&self) -> usize {
        match self.kind {
            HolonomyKind::FullUnitary => self.matrix.as_ref().map_or(0, |m| m.ncols()),
            HolonomyKind::PartialIsometry { rank } => rank,
            HolonomyKind::Undefined => 0,
        }
    }

    /// Indices (into `links`) of the partially overlapping links.
    pub fn partial_links(&self) -> Vec<usize> {
        self.links
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l.class.tag, OverlapTag::Partial { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn matrix_or_err(&self) -> Result<&CMatrix> {
        self.matrix
            .as_ref()
            .ok_or_else(|| Error::Numerical(format!("holonomy is undefined ({:?})", self.undefined_reason)))
    }

    fn undefined(links: Vec<LinkDiagnostic>, sv: Vec<f64>, reason: UndefinedReason) -> Self {
        Self {
            matrix: None,
            kind: HolonomyKind::Undefined,
            links,
            product_singular_values: sv,
            undefined_reason: Some(reason),
        }
    }

    fn from_product(product: &CMatrix, links: Vec<LinkDiagnostic>, tol: Tolerance) -> Result<Self> {
        let polar = matops::polar_left(product, tol)?;
        let k = product.ncols();
        let kind = match polar.rank {
            0 => {
                return Ok(Self::undefined(
                    links,
                    polar.singular_values,
                    UndefinedReason::VanishingProduct,
                ))
            }
            r if r == k => HolonomyKind::FullUnitary,
            r => HolonomyKind::PartialIsometry { rank: r },
        };
        Ok(Self {
            matrix: Some(polar.isometry),
            kind,
            links,
            product_singular_values: polar.singular_values,
            undefined_reason: None,
        })
    }
}

/// Consecutive index pairs `(from, to)` visited by a product over `len` frames.
pub fn link_pairs(len: usize, closure: Closure) -> Vec<(usize, usize)> {
    let mut pairs: Vec<_> = (0..len.saturating_sub(1)).map(|a| (a, a + 1)).collect();
    if closure == Closure::Closed && len > 0 {
        pairs.push((len - 1, 0));
    }
    pairs
}

/// `U_{a,b}`: isometry part of the left polar decomposition of `(F_a|F_b)`.
///
/// Unitary when the subspaces fully overlap, a partial isometry when they
/// partially overlap, and zero when they are orthogonal.
pub fn relative_phase(fa: &Frame, fb: &Frame, tol: Tolerance) -> Result<CMatrix> {
    Ok(matops::polar_left(&grassmann::overlap_matrix(fa, fb)?, tol)?.isometry)
}

/// `Γ = P_m ⋯ P_1`, left-multiplied by `P_1` when closed.
pub fn gamma_operator(seq: &SubspaceSequence, closure: Closure) -> CMatrix {
    let mut gamma = grassmann::projector(seq.frame(0));
    for f in &seq.frames()[1..] {
        gamma = grassmann::projector(f) * gamma;
    }
    if closure == Closure::Closed && seq.len() > 1 {
        gamma = grassmann::projector(seq.frame(0)) * gamma;
    }
    gamma
}

fn require_two(seq: &SubspaceSequence) -> Result<()> {
    if seq.len() < 2 {
        return Err(Error::InvalidSequence(format!(
            "holonomy needs at least two frames, got {}",
            seq.len()
        )));
    }
    Ok(())
}

fn link_overlaps(seq: &SubspaceSequence, closure: Closure) -> Result<Vec<CMatrix>> {
    link_pairs(seq.len(), closure)
        .into_iter()
        .map(|(from, to)| grassmann::overlap_matrix(seq.frame(to), seq.frame(from)))
        .collect()
}

fn ordered_product(k: usize, factors: &[CMatrix]) -> CMatrix {
    factors.iter().fold(identity(k), |acc, f| f * acc)
}

/// `D = (F_1|F_m)(F_m|F_{m-1}) ⋯ (F_2|F_1)`, without the first factor when open.
pub fn d_matrix(seq: &SubspaceSequence, closure: Closure) -> Result<CMatrix> {
    require_two(seq)?;
    Ok(ordered_product(seq.rank(), &link_overlaps(seq, closure)?))
}

/// `I = U_{1,m} U_{m,m-1} ⋯ U_{2,1}` (partial isometries allowed).
pub fn i_matrix(seq: &SubspaceSequence, closure: Closure, tol: Tolerance) -> Result<CMatrix> {
    require_two(seq)?;
    let phases = link_overlaps(seq, closure)?
        .iter()
        .map(|o| matops::polar_left(o, tol).map(|p| p.isometry))
        .collect::<Result<Vec<_>>>()?;
    Ok(ordered_product(seq.rank(), &phases))
}

fn diagnose(seq: &SubspaceSequence, closure: Closure, tol: Tolerance) -> Result<Vec<LinkDiagnostic>> {
    link_pairs(seq.len(), closure)
        .into_iter()
        .map(|(from, to)| {
            Ok(LinkDiagnostic {
                from,
                to,
                class: grassmann::classify_overlap(seq.frame(to), seq.frame(from), tol)?,
            })
        })
        .collect()
}

fn orthogonal_link(links: &[LinkDiagnostic]) -> Option<usize> {
    links.iter().position(|l| l.class.tag == OverlapTag::Orthogonal)
}

/// Direct holonomy of the closed sequence.
pub fn direct_holonomy(seq: &SubspaceSequence, tol: Tolerance) -> Result<HolonomyResult> {
    direct_holonomy_with(seq, Closure::Closed, tol)
}

/// `U_D = |D|^⊖ D`, computed as the isometry part of the polar decomposition of `D`.
pub fn direct_holonomy_with(
    seq: &SubspaceSequence,
    closure: Closure,
    tol: Tolerance,
) -> Result<HolonomyResult> {
    require_two(seq)?;
    let links = diagnose(seq, closure, tol)?;
    if let Some(link) = orthogonal_link(&links) {
        return Ok(HolonomyResult::undefined(links, Vec::new(), UndefinedReason::OrthogonalLink { link }));
    }
    let d = d_matrix(seq, closure)?;
    HolonomyResult::from_product(&d, links, tol)
}

/// Iterative holonomy of the closed sequence.
pub fn iterative_holonomy(seq: &SubspaceSequence, tol: Tolerance) -> Result<HolonomyResult> {
    iterative_holonomy_with(seq, Closure::Closed, tol)
}

/// `U_I = |I|^⊖ I`. When every link fully overlaps `I` is already unitary.
pub fn iterative_holonomy_with(
    seq: &SubspaceSequence,
    closure: Closure,
    tol: Tolerance,
) -> Result<HolonomyResult> {
    require_two(seq)?;
    let links = diagnose(seq, closure, tol)?;
    if let Some(link) = orthogonal_link(&links) {
        return Ok(HolonomyResult::undefined(links, Vec::new(), UndefinedReason::OrthogonalLink { link }));
    }
    let i = i_matrix(seq, closure, tol)?;
    HolonomyResult::from_product(&i, links, tol)
}

fn require_pure(seq: &SubspaceSequence) -> Result<()> {
    if seq.rank() != 1 {
        return Err(Error::InvalidArgument(format!(
            "Abelian holonomy needs rank-1 frames, got K = {}",
            seq.rank()
        )));
    }
    Ok(())
}

fn state(f: &Frame) -> matops::CVector {
    f.matrix().column(0).into_owned()
}

/// `γ_D = Φ[⟨ψ_1|Γ[c]|ψ_1⟩]` with `Γ[c] = |ψ_m⟩⟨ψ_m| ⋯ |ψ_1⟩⟨ψ_1|`.
pub fn pancharatnam_direct(seq: &SubspaceSequence, tol: Tolerance) -> Result<Complex64> {
    require_pure(seq)?;
    let psi1 = state(seq.frame(0));
    let gamma = gamma_operator(seq, Closure::Open);
    let amplitude = psi1.dotc(&(gamma * &psi1));
    matops::phase_factor(amplitude, tol.absolute)
}

/// Phase factors accumulated by the chain of two-beam experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PancharatnamChain {
    /// `e^{iκ̃_1}`, the iterative holonomy.
    pub phase: Complex64,
    /// `e^{iκ̃_2}, …, e^{iκ̃_m}, e^{iκ̃_1}` in the order they are fixed.
    pub accumulated: Vec<Complex64>,
}

/// `γ_I`: each step fixes `e^{iκ̃_{a+1}} = Φ[⟨ψ_{a+1}|e^{iκ̃_a}ψ_a⟩]`, ending back at `ψ_1`.
pub fn pancharatnam_iterative(seq: &SubspaceSequence, tol: Tolerance) -> Result<PancharatnamChain> {
    require_pure(seq)?;
    let mut current = c(1.0, 0.0);
    let mut accumulated = Vec::with_capacity(seq.len());
    for (from, to) in link_pairs(seq.len(), Closure::Closed) {
        let overlap = state(seq.frame(to)).dotc(&state(seq.frame(from)));
        current = matops::phase_factor(overlap * current, tol.absolute)?;
        accumulated.push(current);
    }
    Ok(PancharatnamChain {
        phase: current,
        accumulated,
    })
}
