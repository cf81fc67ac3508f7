//! Dense complex linear-algebra kernels.
//!
//! Everything downstream is expressed through a handful of primitives: the
//! left polar decomposition `M = |M|·U` with `|M| = sqrt(M M†)`, the
//! Moore–Penrose pseudoinverse of a Hermitian positive semidefinite matrix,
//! the unit phase factor `z/|z|`, and exponentials of (anti-)Hermitian
//! generators. Rank decisions use a relative threshold `τ·σ_max` guarded by an
//! absolute floor, so they do not depend on the overall scale of the input.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
#[cfg(test)]
use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default relative rank threshold `τ`.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-10;
/// Default absolute floor below which a spectrum counts as identically zero.
pub const DEFAULT_ABSOLUTE_FLOOR: f64 = 1e-14;


/// Tolerances for rank decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Singular values at or below `relative * σ_max` are treated as zero.
    pub relative: f64,
    /// If `σ_max` is at or below this value the matrix has rank 0.
    pub absolute: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: DEFAULT_RELATIVE_TOL,
            absolute: DEFAULT_ABSOLUTE_FLOOR,
        }
    }
}

impl Tolerance {
    pub fn with_relative(relative: f64) -> Self {
        Self {
            relative,
            ..Self::default()
        }
    }

    /// Numerical rank of a nonincreasing list of singular values.
    pub fn rank_of(&self, singular_values: &[f64]) -> usize {
        let smax = singular_values.first().copied().unwrap_or(0.0);
        if smax <= self.absolute {
            return 0;
        }
        let cut = self.relative * smax;
        singular_values.iter().filter(|&&s| s > cut).count()
    }
}

/// The two factors of a left polar decomposition plus the spectrum they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarParts {
    /// `|M| = sqrt(M M†)`, Hermitian positive semidefinite.
    pub positive: CMatrix,
    /// Partial isometry `W Ĩ V†` restricted to the numerical support.
    pub isometry: CMatrix,
    pub rank: usize,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
}

impl PolarParts {
    /// `true` when the isometry part is a full unitary (square input of full rank).
    pub fn is_full_rank(&self) -> bool {
        self.positive.nrows() == self.isometry.ncols() && self.rank == self.isometry.ncols()
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn ensure_finite(m: &CMatrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `‖M − M†‖_F`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

// nalgebra's complex SVD can return factors that do not reconstruct
// rank-deficient inputs, so the factorizations go through faer.
fn to_faer(m: &CMatrix) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `M = U Σ V†` with singular values sorted in nonincreasing order;
/// returns `(U, σ, V†)`.
pub fn svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok((CMatrix::zeros(m.nrows(), 0), Vec::new(), CMatrix::zeros(0, m.ncols())));
    }
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let sv = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((from_faer(svd.U()), sv, from_faer(svd.V()).adjoint()))
}

/// Singular values only, nonincreasing.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(m)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))
}

/// Left polar decomposition `M = |M|·U`.
///
/// With the SVD `M = W Σ V†` this returns `|M| = W Σ W†` and
/// `U = W Ĩ V†`, where `Ĩ` keeps only singular directions above the rank
/// threshold. The isometry part is unique on the support even when singular
/// values are degenerate. The zero matrix yields rank 0 and a zero isometry.
pub fn polar_left(m: &CMatrix, tol: Tolerance) -> Result<PolarParts> {
    let (u, sv, v_t) = svd(m)?;
    let rank = tol.rank_of(&sv);
    let sigma = CMatrix::from_diagonal(&CVector::from_iterator(
        sv.len(),
        sv.iter().map(|&s| c(s, 0.0)),
    ));
    let positive = &u * sigma * u.adjoint();
    let isometry = if rank == 0 {
        CMatrix::zeros(m.nrows(), m.ncols())
    } else {
        u.columns(0, rank) * v_t.rows(0, rank)
    };
    Ok(PolarParts {
        positive,
        isometry,
        rank,
        singular_values: sv,
    })
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues returned as reals.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    ensure_finite(h)?;
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = h.norm().max(1.0);
    let residual = hermitian_residual(h);
    if residual > 1e-8 * scale {
        return Err(Error::NotHermitian { residual });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = to_faer(&sym)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver did not converge: {e:?}")))?;
    let vals = eig.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, from_faer(eig.U())))
}

/// Moore–Penrose pseudoinverse of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues above `τ·λ_max` are inverted, the rest (including small
/// negative rounding noise) are set to zero.
pub fn mp_pseudoinverse(h: &CMatrix, tol: Tolerance) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let lmax = vals.iter().copied().fold(0.0_f64, f64::max);
    let n = h.nrows();
    if lmax <= tol.absolute {
        return Ok(CMatrix::zeros(n, n));
    }
    let cut = tol.relative * lmax;
    let inv = CVector::from_iterator(
        n,
        vals.iter()
            .map(|&l| if l > cut { c(1.0 / l, 0.0) } else { c(0.0, 0.0) }),
    );
    Ok(&vecs * CMatrix::from_diagonal(&inv) * vecs.adjoint())
}

/// Moore–Penrose pseudoinverse of a general matrix through its SVD.
pub fn pseudoinverse(m: &CMatrix, tol: Tolerance) -> Result<CMatrix> {
    let (u, sv, v_t) = svd(m)?;
    let rank = tol.rank_of(&sv);
    let mut out = CMatrix::zeros(m.ncols(), m.nrows());
    for (i, s) in sv.iter().take(rank).enumerate() {
        out += (v_t.row(i).adjoint() * u.column(i).adjoint()).scale(1.0 / s);
    }
    Ok(out)
}

/// `z/|z|`, the unit phase of a nonzero complex number.
pub fn phase_factor(z: Complex64, floor: f64) -> Result<Complex64> {
    let modulus = z.norm();
    if modulus.is_nan() || modulus <= floor {
        return Err(Error::UndefinedPhase { modulus, floor });
    }
    Ok(z / modulus)
}

/// `‖M M† M − M‖_F ≤ tol·‖M‖_F`.
pub fn is_partial_isometry(m: &CMatrix, tol: f64) -> bool {
    let r = m * m.adjoint() * m - m;
    r.norm() <= tol * m.norm()
}

/// `‖M† M − 1‖_F ≤ tol`.
pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.nrows() == m.ncols() && unitarity_residual(m) <= tol
}

pub fn unitarity_residual(m: &CMatrix) -> f64 {
    (m.adjoint() * m - identity(m.ncols())).norm()
}

/// `exp(-i t H)` for Hermitian `H`; closed form up to 2×2, otherwise
/// through the eigendecomposition.
pub fn exp_i_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    if h.nrows() == h.ncols() && h.nrows() <= 2 {
        ensure_finite(h)?;
        let residual = hermitian_residual(h);
        if residual > 1e-8 * h.norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        return Ok(exp_small_hermitian(h, t));
    }
    let (vals, vecs) = hermitian_eigen(h)?;
    let phases = CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| Complex64::from_polar(1.0, -t * l)),
    );
    Ok(&vecs * CMatrix::from_diagonal(&phases) * vecs.adjoint())
}

// H = a·1 + b·σ  ⇒  exp(-itH) = e^{-ita} (cos(t|b|) − i sin(t|b|) b̂·σ).
fn exp_small_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    if h.nrows() == 1 {
        return CMatrix::from_element(1, 1, Complex64::from_polar(1.0, -t * h[(0, 0)].re));
    }
    let (h00, h11) = (h[(0, 0)].re, h[(1, 1)].re);
    let off = 0.5 * (h[(0, 1)] + h[(1, 0)].conj());
    let a = 0.5 * (h00 + h11);
    let (bx, by, bz) = (off.re, -off.im, 0.5 * (h00 - h11));
    let norm = (bx * bx + by * by + bz * bz).sqrt();
    let (sn, cs) = (t * norm).sin_cos();
    // sin(t|b|)/|b|, finite as |b| → 0.
    let sinc = if norm > 1e-300 { sn / norm } else { t };
    let mi = c(0.0, -1.0);
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            c(cs, 0.0) + mi * sinc * bz,
            mi * sinc * c(bx, -by),
            mi * sinc * c(bx, by),
            c(cs, 0.0) - mi * sinc * bz,
        ],
    );
    m * Complex64::from_polar(1.0, -t * a)
}

/// `exp(A)` for anti-Hermitian `A`. Writing `A = -iH` with `H = iA` Hermitian.
pub fn expm_anti_hermitian(a: &CMatrix) -> Result<CMatrix> {
    let h = a.map(|z| Complex64::i() * z);
    exp_i_hermitian(&h, 1.0)
}

/// Pauli matrices, used by the coherent-state closed forms and in tests.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_exponential_matches_eigen_route() {
        let mut rng = crate::grassmann::seeded_rng(11);
        for k in [1, 2] {
            for _ in 0..20 {
                let g = crate::grassmann::random_unitary_with(k, &mut rng);
                let h = (&g + g.adjoint()).scale(0.7);
                let (vals, vecs) = hermitian_eigen(&h).unwrap();
                let d = CVector::from_iterator(k, vals.iter().map(|&l| Complex64::from_polar(1.0, -1.3 * l)));
                let expected = &vecs * CMatrix::from_diagonal(&d) * vecs.adjoint();
                assert!(close(&exp_i_hermitian(&h, 1.3).unwrap(), &expected, 1e-13));
            }
        }
        assert!(close(&exp_i_hermitian(&CMatrix::zeros(2, 2), 2.0).unwrap(), &identity(2), 0.0));
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    // Independent route to the isometry part: Hermitian eigendecomposition of
    // M M†, without any SVD.
    fn gram_polar_isometry(m: &CMatrix) -> CMatrix {
        let g = m * m.adjoint();
        let eig = SymmetricEigen::new((&g + g.adjoint()).scale(0.5));
        let lmax = eig.eigenvalues.max();
        let inv_sqrt = CVector::from_iterator(
            g.nrows(),
            eig.eigenvalues.iter().map(|&l| {
                if l > 1e-16 * lmax {
                    c(1.0 / l.sqrt(), 0.0)
                } else {
                    c(0.0, 0.0)
                }
            }),
        );
        &eig.eigenvectors * CMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.adjoint() * m
    }

    #[test]
    fn polar_of_unitary_is_itself() {
        let m = real_matrix(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        let p = polar_left(&m, Tolerance::default()).unwrap();
        assert!(close(&p.positive, &identity(2), 1e-14));
        assert!(close(&p.isometry, &m, 1e-14));
        assert_eq!(p.rank, 2);
    }

    #[test]
    fn polar_of_rank_deficient_diagonal() {
        let m = real_matrix(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = polar_left(&m, Tolerance::default()).unwrap();
        assert!(close(&p.positive, &m, 1e-14));
        assert!(close(&p.isometry, &real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]), 1e-14));
        assert_eq!(p.rank, 1);
    }

    #[test]
    fn polar_of_symmetric_matrix_with_mixed_signs() {
        let m = real_matrix(2, 2, &[0.25, -0.75, -0.75, 0.25]);
        let p = polar_left(&m, Tolerance::default()).unwrap();
        assert!((p.singular_values[0] - 1.0).abs() < 1e-14);
        assert!((p.singular_values[1] - 0.5).abs() < 1e-14);
        let expected = real_matrix(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(close(&p.isometry, &expected, 1e-14));
        assert!(close(&gram_polar_isometry(&m), &expected, 1e-13));
    }

    #[test]
    fn polar_of_zero_is_rank_zero() {
        let p = polar_left(&CMatrix::zeros(3, 3), Tolerance::default()).unwrap();
        assert_eq!(p.rank, 0);
        assert_eq!(p.isometry, CMatrix::zeros(3, 3));
    }

    #[test]
    fn polar_rejects_nan() {
        let mut m = identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(polar_left(&m, Tolerance::default()), Err(Error::NonFinite));
    }

    #[test]
    fn pseudoinverse_examples() {
        let h = real_matrix(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let inv = mp_pseudoinverse(&h, Tolerance::default()).unwrap();
        assert!(close(&inv, &real_matrix(2, 2, &[0.5, 0.0, 0.0, 0.0]), 1e-15));
        let inv = mp_pseudoinverse(&identity(3), Tolerance::default()).unwrap();
        assert!(close(&inv, &identity(3), 1e-15));
    }

    #[test]
    fn pseudoinverse_rejects_non_hermitian() {
        let m = real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            mp_pseudoinverse(&m, Tolerance::default()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn phase_factor_examples() {
        assert_eq!(phase_factor(c(1.0, 0.0), 1e-14).unwrap(), c(1.0, 0.0));
        let z = phase_factor(c(0.0, -2.0), 1e-14).unwrap();
        assert!((z - c(0.0, -1.0)).norm() < 1e-16);
        assert!(matches!(
            phase_factor(c(0.0, 0.0), 1e-14),
            Err(Error::UndefinedPhase { .. })
        ));
    }

    #[test]
    fn isometry_predicates() {
        assert!(is_partial_isometry(&identity(2), 1e-12));
        assert!(is_unitary(&identity(2), 1e-12));
        let d = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(is_partial_isometry(&d, 1e-12));
        assert!(!is_unitary(&d, 1e-12));
        let half = (identity(2) + pauli_x()).scale(0.5);
        assert!(is_partial_isometry(&half, 1e-12));
        assert!(!is_unitary(&half, 1e-12));
    }

    #[test]
    fn rank_respects_absolute_floor() {
        let tol = Tolerance::default();
        assert_eq!(tol.rank_of(&[1e-15, 1e-16]), 0);
        assert_eq!(tol.rank_of(&[1e-3, 1e-14]), 1);
        assert_eq!(tol.rank_of(&[]), 0);
    }

    #[test]
    fn exponential_of_pauli_z() {
        let u = exp_i_hermitian(&pauli_z(), 0.3).unwrap();
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -0.3)).norm() < 1e-15);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15);
        let a = pauli_y().map(|z| z * c(0.0, 0.7));
        assert!(is_unitary(&expm_anti_hermitian(&a).unwrap(), 1e-14));
    }
}
