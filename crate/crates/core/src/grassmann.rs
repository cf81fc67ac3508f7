//! Frames over points of the Grassmannian and sequences of them.
//!
//! A [`Frame`] is an `N×K` matrix with orthonormal columns; it picks a point
//! of the Stiefel manifold above the subspace it spans. Two frames of the
//! same subspace differ by a `K×K` unitary (a gauge transformation).

use nalgebra::Complex;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{self, c, identity, CMatrix, Tolerance};

/// Frames with `‖F†F − 1‖_F` up to this value are accepted as-is.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Frames between `ORTHONORMAL_TOL` and this value are re-orthonormalized.
pub const REPAIR_TOL: f64 = 1e-8;

/// An orthonormal `N×K` frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    columns: CMatrix,
}

impl Frame {
    /// Validates (and if slightly off, repairs) an `N×K` matrix of column vectors.
    pub fn new(columns: CMatrix) -> Result<Self> {
        let (n, k) = columns.shape();
        if k == 0 || n == 0 {
            return Err(Error::InvalidFrame("frame must have at least one column and one row".into()));
        }
        if k > n {
            return Err(Error::InvalidFrame(format!("rank {k} exceeds ambient dimension {n}")));
        }
        if !matops::is_finite(&columns) {
            return Err(Error::InvalidFrame("non-finite amplitude".into()));
        }
        let err = orthonormality_error(&columns);
        if err <= ORTHONORMAL_TOL {
            Ok(Self { columns })
        } else if err <= REPAIR_TOL {
            let polar = matops::polar_left(&columns, Tolerance::default())?;
            if polar.rank < k {
                return Err(Error::InvalidFrame("columns are linearly dependent".into()));
            }
            Ok(Self { columns: polar.isometry })
        } else {
            Err(Error::InvalidFrame(format!(
                "columns are not orthonormal (‖F†F − 1‖ = {err:.3e})"
            )))
        }
    }

    pub fn from_columns(cols: &[Vec<Complex64>]) -> Result<Self> {
        let k = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|col| col.len() != n) {
            return Err(Error::InvalidFrame("columns have different lengths".into()));
        }
        Self::new(CMatrix::from_fn(n, k, |i, j| cols[j][i]))
    }

    /// A single normalized state as a rank-1 frame. The input is normalized.
    pub fn from_state(state: &[Complex64]) -> Result<Self> {
        let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidFrame("state has zero or non-finite norm".into()));
        }
        Self::new(CMatrix::from_iterator(state.len(), 1, state.iter().map(|z| z / norm)))
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.columns
    }

    pub fn into_matrix(self) -> CMatrix {
        self.columns
    }
}

pub fn orthonormality_error(m: &CMatrix) -> f64 {
    (m.adjoint() * m - identity(m.ncols())).norm()
}

/// An ordered, nonempty list of frames sharing `N` and `K`.
///
/// Whether the path closes back on its first element is a property of the
/// computation, so it is not stored here.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSequence {
    frames: Vec<Frame>,
}

impl SubspaceSequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidSequence("sequence needs at least one frame".into()))?;
        let (n, k) = (first.ambient_dim(), first.rank());
        for (i, f) in frames.iter().enumerate() {
            if f.ambient_dim() != n || f.rank() != k {
                return Err(Error::InvalidSequence(format!(
                    "frame {i} is {}x{}, expected {n}x{k}",
                    f.ambient_dim(),
                    f.rank()
                )));
            }
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frames[0].ambient_dim()
    }

    pub fn rank(&self) -> usize {
        self.frames[0].rank()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> &Frame {
        &self.frames[i]
    }

    /// Applies `W_a` to frame `a` for every `a`.
    pub fn gauge_transform(&self, ws: &[CMatrix]) -> Result<Self> {
        if ws.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} gauge matrices for {} frames",
                ws.len(),
                self.len()
            )));
        }
        let frames = self
            .frames
            .iter()
            .zip(ws)
            .map(|(f, w)| gauge_transform(f, w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames)
    }
}

/// Rank classification of the overlap between two subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OverlapTag {
    Full,
    Partial { rank: usize },
    Orthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapClass {
    pub tag: OverlapTag,
    pub singular_values: Vec<f64>,
}

impl OverlapClass {
    pub fn rank(&self) -> usize {
        match self.tag {
            OverlapTag::Full => self.singular_values.len(),
            OverlapTag::Partial { rank } => rank,
            OverlapTag::Orthogonal => 0,
        }
    }

    pub(crate) fn from_spectrum(singular_values: Vec<f64>, tol: Tolerance) -> Self {
        let rank = tol.rank_of(&singular_values);
        let tag = if rank == 0 {
            OverlapTag::Orthogonal
        } else if rank == singular_values.len() {
            OverlapTag::Full
        } else {
            OverlapTag::Partial { rank }
        };
        Self { tag, singular_values }
    }
}

fn check_compatible(fa: &Frame, fb: &Frame) -> Result<()> {
    if fa.ambient_dim() != fb.ambient_dim() || fa.rank() != fb.rank() {
        return Err(Error::DimensionMismatch(format!(
            "frames are {}x{} and {}x{}",
            fa.ambient_dim(),
            fa.rank(),
            fb.ambient_dim(),
            fb.rank()
        )));
    }
    Ok(())
}

/// `(F_a|F_b)_{kl} = ⟨a_k|b_l⟩`.
pub fn overlap_matrix(fa: &Frame, fb: &Frame) -> Result<CMatrix> {
    check_compatible(fa, fb)?;
    Ok(fa.matrix().adjoint() * fb.matrix())
}

/// `P = F F†`.
pub fn projector(f: &Frame) -> CMatrix {
    f.matrix() * f.matrix().adjoint()
}

/// Moves a frame along its fiber: column `l` becomes `Σ_k a_k W_{kl}`.
pub fn gauge_transform(f: &Frame, w: &CMatrix) -> Result<Frame> {
    if w.shape() != (f.rank(), f.rank()) {
        return Err(Error::DimensionMismatch(format!(
            "gauge matrix is {}x{}, frame rank is {}",
            w.nrows(),
            w.ncols(),
            f.rank()
        )));
    }
    let residual = matops::unitarity_residual(w);
    if residual > 1e-10 {
        return Err(Error::NotUnitary { residual });
    }
    Ok(Frame {
        columns: f.matrix() * w,
    })
}

pub fn classify_overlap(fa: &Frame, fb: &Frame, tol: Tolerance) -> Result<OverlapClass> {
    let sv = matops::singular_values(&overlap_matrix(fa, fb)?)?;
    Ok(OverlapClass::from_spectrum(sv, tol))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    // Fill column by column so the draw order is fixed.
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(i, j)] = Complex::new(re, im);
        }
    }
    m
}

/// Modified Gram–Schmidt with one reorthogonalization pass.
pub fn orthonormalize_columns(m: &CMatrix) -> Result<CMatrix> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for _ in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dotc(&q.column(j));
                let qi = q.column(i).clone_owned();
                q.column_mut(j).axpy(-proj, &qi, c(1.0, 0.0));
            }
        }
        let norm = q.column(j).norm();
        if norm.is_nan() || norm <= 1e-12 {
            return Err(Error::Numerical("Gram–Schmidt hit a dependent column".into()));
        }
        q.column_mut(j).unscale_mut(norm);
    }
    Ok(q)
}

fn fix_column_phases(m: &mut CMatrix) {
    for j in 0..m.ncols() {
        if let Some(z) = m.column(j).iter().copied().find(|z| z.norm() > 1e-12) {
            let phase = z.conj() / z.norm();
            for v in m.column_mut(j).iter_mut() {
                *v *= phase;
            }
        }
    }
}

/// Haar-random `N×K` frame drawn from `rng`, with the first nonzero entry of
/// each column made real positive.
pub fn random_frame_with<R: rand::Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Frame> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= K <= N, got N={n}, K={k}")));
    }
    let mut q = orthonormalize_columns(&gaussian_matrix(n, k, rng))?;
    fix_column_phases(&mut q);
    Frame::new(q)
}

pub fn random_frame(n: usize, k: usize, seed: u64) -> Result<Frame> {
    random_frame_with(n, k, &mut seeded_rng(seed))
}

/// Haar-random `K×K` unitary (Gram–Schmidt of a complex Ginibre matrix).
pub fn random_unitary_with<R: rand::Rng + ?Sized>(k: usize, rng: &mut R) -> CMatrix {
    loop {
        if let Ok(q) = orthonormalize_columns(&gaussian_matrix(k, k, rng)) {
            return q;
        }
    }
}

pub fn random_unitary(k: usize, seed: u64) -> CMatrix {
    random_unitary_with(k, &mut seeded_rng(seed))
}

/// `m` independent Haar-random frames.
pub fn random_sequence(n: usize, k: usize, m: usize, seed: u64) -> Result<SubspaceSequence> {
    let mut rng = seeded_rng(seed);
    let frames = (0..m)
        .map(|_| random_frame_with(n, k, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    SubspaceSequence::new(frames)
}

/// Random sequence whose first link `F_1 → F_2` overlaps with rank exactly
/// `partial_rank` (generically); every other link is generic.
///
/// Requires `N − K ≥ K − partial_rank` so the missing directions of `F_2` fit
/// in the orthogonal complement of `F_1`.
pub fn random_partial_sequence(
    n: usize,
    k: usize,
    m: usize,
    partial_rank: usize,
    seed: u64,
) -> Result<SubspaceSequence> {
    if m < 2 || partial_rank >= k || n - k < k - partial_rank {
        return Err(Error::InvalidArgument(format!(
            "cannot build a rank-{partial_rank} link with N={n}, K={k}, m={m}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let f1 = random_frame_with(n, k, &mut rng)?;
    let complement = identity(n) - projector(&f1);
    let generic = gaussian_matrix(n, partial_rank, &mut rng);
    let hidden = &complement * gaussian_matrix(n, k - partial_rank, &mut rng);
    // Hidden block first so Gram–Schmidt keeps it inside the complement.
    let mut block = CMatrix::zeros(n, k);
    block.columns_mut(0, k - partial_rank).copy_from(&hidden);
    block.columns_mut(k - partial_rank, partial_rank).copy_from(&generic);
    let mut q = orthonormalize_columns(&block)?;
    fix_column_phases(&mut q);
    let mut frames = vec![f1, Frame::new(q)?];
    for _ in 2..m {
        frames.push(random_frame_with(n, k, &mut rng)?);
    }
    SubspaceSequence::new(frames)
}

/// Standard basis vector `e_i` of length `n`.
pub fn basis_vector(n: usize, i: usize) -> Vec<Complex64> {
    (0..n).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()
}

/// Frame spanned by the listed standard basis vectors.
pub fn coordinate_frame(n: usize, indices: &[usize]) -> Result<Frame> {
    let cols: Vec<_> = indices.iter().map(|&i| basis_vector(n, i)).collect();
    Frame::from_columns(&cols)
}
