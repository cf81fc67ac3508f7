//! Amplitude-level model of the two-arm interferometers that realize the
//! direct and iterative holonomies.
//!
//! The closed-form routines work in the reduced `K×K` picture. The
//! [`simulate_full`] oracle instead builds the `2N`-dimensional state of
//! internal degree of freedom ⊗ path, applies the filtering projectors
//! `Π_a = P_a ⊗ |0⟩⟨0| + 1 ⊗ |1⟩⟨1|`, the arm unitaries and a Hadamard-type
//! 50-50 beam-splitter explicitly, and reads off the 0-arm intensities.
//!
//! Beam-splitter convention: `|0⟩ → (|0⟩+|1⟩)/√2`, `|1⟩ → (|0⟩−|1⟩)/√2`.
//! Intensities are squared norms of the unnormalized 0-arm output.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{self, seeded_rng, Frame, SubspaceSequence};
use crate::holonomy::{self, Closure};
use crate::matops::{self, c, identity, CMatrix, CVector, Tolerance};

/// Largest ambient dimension accepted by [`simulate_full`].
pub const FULL_SIMULATION_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceRecord {
    /// `I_k` for each basis vector of the input subspace.
    pub intensities: Vec<f64>,
    pub total: f64,
    /// The `K×K` unitary applied in the reference arm.
    #[serde(with = "crate::io::matrix_rows")]
    pub applied: CMatrix,
}

impl InterferenceRecord {
    fn new(intensities: Vec<f64>, applied: CMatrix) -> Self {
        let total = intensities.iter().sum();
        Self {
            intensities,
            total,
            applied,
        }
    }
}

fn require_pure(seq: &SubspaceSequence) -> Result<()> {
    if seq.rank() != 1 {
        return Err(Error::InvalidArgument(format!(
            "Abelian interferometer needs rank-1 frames, got K = {}",
            seq.rank()
        )));
    }
    Ok(())
}

fn require_square(v: &CMatrix, k: usize) -> Result<()> {
    if v.shape() != (k, k) {
        return Err(Error::DimensionMismatch(format!(
            "arm unitary is {}x{}, expected {k}x{k}",
            v.nrows(),
            v.ncols()
        )));
    }
    Ok(())
}

/// 0-arm intensity `(1/4)‖(Γ[c] + e^{iκ})|ψ_1⟩‖²` of the Abelian direct setup.
pub fn abelian_direct_intensity(seq: &SubspaceSequence, kappa: f64) -> Result<f64> {
    require_pure(seq)?;
    let psi1 = seq.frame(0).matrix().column(0).into_owned();
    let gamma = holonomy::gamma_operator(seq, Closure::Open);
    let out = gamma * &psi1 + psi1 * Complex64::from_polar(1.0, kappa);
    Ok(0.25 * out.norm_squared())
}

/// Intensities on a uniform grid of `points` phases in `[0, 2π)`.
pub fn kappa_scan(seq: &SubspaceSequence, points: usize) -> Result<Vec<(f64, f64)>> {
    (0..points)
        .map(|i| {
            let kappa = std::f64::consts::TAU * i as f64 / points as f64;
            abelian_direct_intensity(seq, kappa).map(|v| (kappa, v))
        })
        .collect()
}

/// Grid point with the largest intensity (first one on ties).
pub fn scan_argmax(scan: &[(f64, f64)]) -> Option<(f64, f64)> {
    scan.iter()
        .copied()
        .fold(None, |best, p| match best {
            Some(b) if b.1 >= p.1 => Some(b),
            _ => Some(p),
        })
}

/// One two-beam step of the Abelian iterative protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelianStep {
    /// `(1/4)‖e^{iκ}|ψ_{a+1}⟩ + e^{iκ̃_a}|ψ_a⟩‖²` at the requested `κ`.
    pub intensity: f64,
    /// `e^{iκ̃_{a+1}} = Φ[⟨ψ_{a+1}|e^{iκ̃_a}ψ_a⟩]`; an error when the states are orthogonal.
    pub maximizer: Result<Complex64>,
}

/// `prev` is the already phase-corrected state `e^{iκ̃_a}|ψ_a⟩`.
pub fn abelian_iterative_step(prev: &CVector, next: &CVector, kappa: f64, floor: f64) -> AbelianStep {
    let out = next * Complex64::from_polar(1.0, kappa) + prev;
    AbelianStep {
        intensity: 0.25 * out.norm_squared(),
        maximizer: matops::phase_factor(next.dotc(prev), floor),
    }
}

/// `I_k = (1/4)(1 + ⟨1_k|Γ†Γ|1_k⟩) + (1/2) Re[V†D]_{kk}`.
pub fn direct_intensity(seq: &SubspaceSequence, v: &CMatrix, k: usize) -> Result<f64> {
    Ok(direct_intensities(seq, v)?.intensities[k])
}

/// `I_tot = (1/4)(K + Tr Γ†Γ) + (1/2) Re Tr(V†D)`.
pub fn direct_total_intensity(seq: &SubspaceSequence, v: &CMatrix) -> Result<f64> {
    Ok(direct_intensities(seq, v)?.total)
}

/// All `I_k` of the direct protocol from the reduced formula.
pub fn direct_intensities(seq: &SubspaceSequence, v: &CMatrix) -> Result<InterferenceRecord> {
    require_square(v, seq.rank())?;
    let f1 = seq.frame(0).matrix();
    let gamma = holonomy::gamma_operator(seq, Closure::Open);
    let gram = f1.adjoint() * gamma.adjoint() * &gamma * f1;
    let d = holonomy::d_matrix(seq, Closure::Closed)?;
    let vd = v.adjoint() * d;
    let intensities = (0..seq.rank())
        .map(|k| 0.25 * (1.0 + gram[(k, k)].re) + 0.5 * vd[(k, k)].re)
        .collect();
    Ok(InterferenceRecord::new(intensities, v.clone()))
}

/// `I_tot^{a+1,a} = (1/2)(K + Re Tr[Ṽ_a† (F_a|F_{a+1}) V])`.
///
/// `accumulated` is `Ṽ_a` (the identity on the first step) and `v` the trial
/// unitary `V_{a+1}`, both in the respective frame bases.
pub fn iterative_step_total_intensity(
    accumulated: &CMatrix,
    fa: &Frame,
    fb: &Frame,
    v: &CMatrix,
) -> Result<f64> {
    let k = fa.rank();
    require_square(accumulated, k)?;
    require_square(v, k)?;
    let o = grassmann::overlap_matrix(fa, fb)?;
    Ok(0.5 * (k as f64 + (accumulated.adjoint() * o * v).trace().re))
}

/// `Ṽ_{a+1} = U_{a+1,a} Ṽ_a`, the maximizer of [`iterative_step_total_intensity`].
pub fn iterative_step_maximizer(
    accumulated: &CMatrix,
    fa: &Frame,
    fb: &Frame,
    tol: Tolerance,
) -> Result<CMatrix> {
    Ok(holonomy::relative_phase(fb, fa, tol)? * accumulated)
}

/// `Ṽ_2, Ṽ_3, …, Ṽ_m, Ṽ_1` of the closed iterative protocol; the last is `U_I`.
pub fn iterative_chain(seq: &SubspaceSequence, tol: Tolerance) -> Result<Vec<CMatrix>> {
    let mut acc = identity(seq.rank());
    let mut out = Vec::with_capacity(seq.len());
    for (from, to) in holonomy::link_pairs(seq.len(), Closure::Closed) {
        acc = iterative_step_maximizer(&acc, seq.frame(from), seq.frame(to), tol)?;
        out.push(acc.clone());
    }
    Ok(out)
}

/// Outcome of [`verify_maximality`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalityReport {
    pub trials: usize,
    /// Random unitaries whose direct total intensity exceeds the one at `U_D`.
    pub direct_violations: usize,
    /// `I_tot(U_D)`.
    pub direct_optimum: f64,
    /// Best `I_tot` among the random trials.
    pub direct_best_random: f64,
    /// `|Re Tr(U_D† D) − Tr|D||`.
    pub direct_saturation_residual: f64,
    /// Random trials (summed over steps) beating the step maximizer.
    pub step_violations: usize,
    /// Per step, `‖M X − (M X)†‖_F` where `M = Ṽ_a†(F_a|F_{a+1})` and `X` the maximizer.
    pub step_stationarity_residuals: Vec<f64>,
    /// Per step, smallest eigenvalue of the Hermitian part of `M X` (≥ 0 at a maximum).
    pub step_min_eigenvalues: Vec<f64>,
}

impl MaximalityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.direct_violations == 0
            && self.step_violations == 0
            && self.direct_saturation_residual <= tol
            && self.step_stationarity_residuals.iter().all(|&r| r <= tol)
            && self.step_min_eigenvalues.iter().all(|&l| l >= -tol)
    }
}

/// Checks that no random unitary beats `U_D` in the direct setup and that each
/// iterative step is maximized by `U_{a+1,a} Ṽ_a`.
///
/// The trace inequality `Re Tr(V†D) ≤ Tr|D|` is what makes `U_D` optimal; the
/// per-step optimum is confirmed through the first- and second-order
/// conditions (`M X` Hermitian and positive semidefinite).
pub fn verify_maximality(
    seq: &SubspaceSequence,
    trials: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<MaximalityReport> {
    let k = seq.rank();
    let ud = holonomy::direct_holonomy(seq, tol)?;
    let ud = ud.matrix_or_err()?.clone();
    let d = holonomy::d_matrix(seq, Closure::Closed)?;
    let abs_d = matops::polar_left(&d, tol)?.positive;
    let direct_optimum = direct_total_intensity(seq, &ud)?;
    let slack = 1e-12 * (1.0 + direct_optimum);
    let mut rng = seeded_rng(seed);

    let mut direct_violations = 0;
    let mut direct_best_random = f64::NEG_INFINITY;
    for _ in 0..trials {
        let v = grassmann::random_unitary_with(k, &mut rng);
        let value = direct_total_intensity(seq, &v)?;
        direct_best_random = direct_best_random.max(value);
        if value > direct_optimum + slack {
            direct_violations += 1;
        }
    }
    let direct_saturation_residual = ((ud.adjoint() * &d).trace().re - abs_d.trace().re).abs();

    let mut step_violations = 0;
    let mut residuals = Vec::new();
    let mut min_eigs = Vec::new();
    let mut acc = identity(k);
    for (from, to) in holonomy::link_pairs(seq.len(), Closure::Closed) {
        let (fa, fb) = (seq.frame(from), seq.frame(to));
        let best = iterative_step_maximizer(&acc, fa, fb, tol)?;
        let optimum = iterative_step_total_intensity(&acc, fa, fb, &best)?;
        for _ in 0..trials {
            let v = grassmann::random_unitary_with(k, &mut rng);
            if iterative_step_total_intensity(&acc, fa, fb, &v)? > optimum + slack {
                step_violations += 1;
            }
        }
        let mx = acc.adjoint() * grassmann::overlap_matrix(fa, fb)? * &best;
        residuals.push(matops::hermitian_residual(&mx));
        let herm = (&mx + mx.adjoint()).scale(0.5);
        let eig = matops::hermitian_eigen(&herm)?.0;
        min_eigs.push(eig.into_iter().fold(f64::INFINITY, f64::min));
        acc = best;
    }

    Ok(MaximalityReport {
        trials,
        direct_violations,
        direct_optimum,
        direct_best_random,
        direct_saturation_residual,
        step_violations,
        step_stationarity_residuals: residuals,
        step_min_eigenvalues: min_eigs,
    })
}

/// Loss of total intensity when `U_D` is replaced by `U_D e^{-iεH}`.
pub fn direct_deficit(seq: &SubspaceSequence, generator: &CMatrix, eps: f64, tol: Tolerance) -> Result<f64> {
    let ud = holonomy::direct_holonomy(seq, tol)?.matrix_or_err()?.clone();
    let v = &ud * matops::exp_i_hermitian(generator, eps)?;
    Ok(direct_total_intensity(seq, &ud)? - direct_total_intensity(seq, &v)?)
}

/// Which interferometer [`simulate_full`] should build.
#[derive(Debug, Clone, Copy)]
pub enum Protocol<'a> {
    /// Filtering sequence in the 0-arm, `V` (in the `F_1` basis) in the 1-arm.
    Direct { arm_unitary: &'a CMatrix },
    /// `V_{to}|to_k⟩` in the 0-arm against `Ṽ_{from}|from_k⟩` in the 1-arm.
    IterativeStep {
        from: usize,
        to: usize,
        accumulated: &'a CMatrix,
        trial: &'a CMatrix,
    },
}

/// Lift a `K×K` matrix in the basis of `f` to an `N×N` unitary acting as the
/// identity on the orthogonal complement.
fn lift(f: &Frame, v: &CMatrix) -> CMatrix {
    let fm = f.matrix();
    fm * v * fm.adjoint() + identity(f.ambient_dim()) - grassmann::projector(f)
}

fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (n, n)).copy_from(b);
    out
}

fn beam_splitter(n: usize) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        out[(i, i)] = c(h, 0.0);
        out[(i, n + i)] = c(h, 0.0);
        out[(n + i, i)] = c(h, 0.0);
        out[(n + i, n + i)] = c(-h, 0.0);
    }
    out
}

fn path_state(arm0: &CVector, arm1: &CVector) -> CVector {
    let n = arm0.len();
    let mut psi = CVector::zeros(2 * n);
    psi.rows_mut(0, n).copy_from(arm0);
    psi.rows_mut(n, n).copy_from(arm1);
    psi
}

/// Brute-force simulation in the full `2N`-dimensional composite space.
pub fn simulate_full(seq: &SubspaceSequence, protocol: Protocol<'_>) -> Result<InterferenceRecord> {
    let n = seq.ambient_dim();
    let k = seq.rank();
    if n > FULL_SIMULATION_CAP {
        return Err(Error::DimensionCap {
            dim: n,
            cap: FULL_SIMULATION_CAP,
        });
    }
    let bs = beam_splitter(n);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    match protocol {
        Protocol::Direct { arm_unitary } => {
            require_square(arm_unitary, k)?;
            let f1 = seq.frame(0);
            let mut circuit = identity(2 * n);
            for f in seq.frames() {
                circuit = block_diag(&grassmann::projector(f), &identity(n)) * circuit;
            }
            circuit = block_diag(&identity(n), &lift(f1, arm_unitary)) * circuit;
            circuit = &bs * circuit;
            let intensities = (0..k)
                .map(|j| {
                    let v = f1.matrix().column(j).into_owned();
                    let input = path_state(&v, &v) * c(inv_sqrt2, 0.0);
                    let out = &circuit * input;
                    out.rows(0, n).norm_squared()
                })
                .collect();
            Ok(InterferenceRecord::new(intensities, arm_unitary.clone()))
        }
        Protocol::IterativeStep {
            from,
            to,
            accumulated,
            trial,
        } => {
            require_square(accumulated, k)?;
            require_square(trial, k)?;
            if from >= seq.len() || to >= seq.len() {
                return Err(Error::InvalidArgument(format!(
                    "step {from} -> {to} outside a sequence of {}",
                    seq.len()
                )));
            }
            let (fa, fb) = (seq.frame(from), seq.frame(to));
            let circuit = &bs * block_diag(&lift(fb, trial), &lift(fa, accumulated));
            let intensities = (0..k)
                .map(|j| {
                    let a = fa.matrix().column(j).into_owned();
                    let b = fb.matrix().column(j).into_owned();
                    let input = path_state(&b, &a) * c(inv_sqrt2, 0.0);
                    let out = &circuit * input;
                    out.rows(0, n).norm_squared()
                })
                .collect();
            Ok(InterferenceRecord::new(intensities, trial.clone()))
        }
    }
}

/// Abelian direct setup with a `U(1)` shift `e^{iκ}` in the reference arm.
pub fn simulate_full_abelian(seq: &SubspaceSequence, kappa: f64) -> Result<f64> {
    require_pure(seq)?;
    let v = CMatrix::from_element(1, 1, Complex64::from_polar(1.0, kappa));
    Ok(simulate_full(seq, Protocol::Direct { arm_unitary: &v })?.total)
}

/// Random unitary near the identity, `exp(-iεH)` with a random Hermitian `H` of unit norm.
pub fn random_hermitian<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CMatrix {
    let g = grassmann::random_unitary_with(k, rng) * CMatrix::from_diagonal(&CVector::from_iterator(
        k,
        (0..k).map(|i| c(i as f64 + 1.0, 0.0)),
    ));
    let h = (&g + g.adjoint()).scale(0.5);
    let norm = h.norm();
    h.unscale(norm)
}
