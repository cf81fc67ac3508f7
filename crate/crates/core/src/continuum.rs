//! Smooth frame paths and the continuum limit of the discrete holonomies.
//!
//! A path `s ↦ F(s)`, `s ∈ [0, 1]`, carries the connection `A(s) = Ḟ(s)† F(s)`
//! (anti-Hermitian because `F†F = 1`). Sampling the path at `m` points and
//! taking either discrete holonomy with its closing link gives an
//! approximation of `U_{0,1} · P exp ∫ A ds`, where `U_{0,1}` is the relative
//! phase between the endpoint frames. When the endpoint overlap is rank
//! deficient `U_{0,1}` is a partial isometry and so is the limit.
//!
//! The path-ordered exponential is a midpoint product of step exponentials,
//! later `s` to the left. References are Richardson-extrapolated from `n` and
//! `2n` steps and re-polarized.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::{self, Direction, SpinSystem};
use crate::error::{Error, Result};
use crate::grassmann::{Frame, SubspaceSequence};
use crate::holonomy::{self, Closure};
use crate::matops::{self, c, CMatrix, Tolerance};

/// Central-difference step used when a path has no analytic derivative.
pub const FD_STEP: f64 = 1e-6;
/// Steps of the coarser half of the Richardson reference.
pub const REFERENCE_STEPS: usize = 1 << 14;
/// Resolutions of the standard convergence table.
pub const STANDARD_M: [usize; 10] = [8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096];

pub type MatrixField = Arc<dyn Fn(f64) -> Result<CMatrix> + Send + Sync>;

/// A smooth `N × K` frame field on `[0, 1]`.
#[derive(Clone)]
pub struct SmoothFramePath {
    name: String,
    ambient_dim: usize,
    rank: usize,
    frame: MatrixField,
    derivative: Option<MatrixField>,
}

impl fmt::Debug for SmoothFramePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFramePath")
            .field("name", &self.name)
            .field("ambient_dim", &self.ambient_dim)
            .field("rank", &self.rank)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl SmoothFramePath {
    pub fn new(name: impl Into<String>, frame: MatrixField) -> Result<Self> {
        let f0 = Frame::new(frame(0.0)?)?;
        Ok(Self {
            name: name.into(),
            ambient_dim: f0.ambient_dim(),
            rank: f0.rank(),
            frame,
            derivative: None,
        })
    }

    pub fn with_derivative(mut self, derivative: MatrixField) -> Self {
        self.derivative = Some(derivative);
        self
    }

    /// The path `F(s) W(s)` for a unitary field `W`; keeps an analytic
    /// derivative only if `dw` is given.
    pub fn gauge_transformed(&self, w: MatrixField, dw: Option<MatrixField>) -> Self {
        let frame = self.frame.clone();
        let w_f = w.clone();
        let gauged: MatrixField = Arc::new(move |s| Ok(frame(s)? * w_f(s)?));
        let derivative = match (&self.derivative, dw) {
            (Some(df), Some(dw)) => {
                let (frame, df) = (self.frame.clone(), df.clone());
                let d: MatrixField = Arc::new(move |s| Ok(df(s)? * w(s)? + frame(s)? * dw(s)?));
                Some(d)
            }
            _ => None,
        };
        Self {
            name: format!("{}+gauge", self.name),
            ambient_dim: self.ambient_dim,
            rank: self.rank,
            frame: gauged,
            derivative,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn frame_matrix(&self, s: f64) -> Result<CMatrix> {
        let f = (self.frame)(s)?;
        if f.nrows() != self.ambient_dim || f.ncols() != self.rank {
            return Err(Error::DimensionMismatch(format!(
                "path frame at s = {s} is {}x{}, expected {}x{}",
                f.nrows(),
                f.ncols(),
                self.ambient_dim,
                self.rank
            )));
        }
        Ok(f)
    }

    pub fn frame(&self, s: f64) -> Result<Frame> {
        Frame::new(self.frame_matrix(s)?)
    }

    /// `Ḟ(s)`, analytic if available, else `(F(s+h) − F(s−h)) / 2h`.
    pub fn velocity(&self, s: f64) -> Result<CMatrix> {
        match &self.derivative {
            Some(d) => d(s),
            None => {
                let fwd = self.frame_matrix(s + FD_STEP)?;
                let bwd = self.frame_matrix(s - FD_STEP)?;
                Ok((fwd - bwd).unscale(2.0 * FD_STEP))
            }
        }
    }
}

fn check_parameter(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("path parameter {s} outside [0, 1]")));
    }
    Ok(())
}

/// `A(s)_{kl} = ⟨ȧ_k(s)|a_l(s)⟩`.
pub fn wz_connection(path: &SmoothFramePath, s: f64) -> Result<CMatrix> {
    check_parameter(s)?;
    Ok(path.velocity(s)?.adjoint() * path.frame_matrix(s)?)
}

/// `‖A + A†‖_F` at `s`.
pub fn anti_hermiticity_residual(path: &SmoothFramePath, s: f64) -> Result<f64> {
    let a = wz_connection(path, s)?;
    Ok((&a + a.adjoint()).norm())
}

/// Path-ordered transport together with the endpoint relative phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumHolonomy {
    pub steps: usize,
    /// `P exp ∫ A ds`.
    #[serde(with = "crate::io::matrix_rows")]
    pub transport: CMatrix,
    /// `U_{0,1}`, isometry part of `(F(0)|F(1))`.
    #[serde(with = "crate::io::matrix_rows")]
    pub closing: CMatrix,
    pub closing_rank: usize,
    /// `U_{0,1} · P exp ∫ A ds`.
    #[serde(with = "crate::io::matrix_rows")]
    pub holonomy: CMatrix,
}

/// Midpoint product `∏ exp(A(s_i) δs)`, `s_i = (i + ½)/steps`, later `s` on the left.
pub fn path_ordered_exp(path: &SmoothFramePath, steps: usize, tol: Tolerance) -> Result<ContinuumHolonomy> {
    let transport = midpoint_transport(path, steps)?;
    finish(path, steps, transport, tol)
}

fn midpoint_transport(path: &SmoothFramePath, steps: usize) -> Result<CMatrix> {
    if steps < 2 {
        return Err(Error::InvalidArgument("path-ordered exponential needs at least 2 steps".into()));
    }
    let ds = 1.0 / steps as f64;
    let mut acc = matops::identity(path.rank());
    for i in 0..steps {
        let a = wz_connection(path, (i as f64 + 0.5) * ds)?;
        let a = (&a - a.adjoint()).scale(0.5 * ds);
        acc = matops::expm_anti_hermitian(&a)? * acc;
    }
    Ok(acc)
}

fn finish(path: &SmoothFramePath, steps: usize, transport: CMatrix, tol: Tolerance) -> Result<ContinuumHolonomy> {
    let closing_parts = matops::polar_left(
        &crate::grassmann::overlap_matrix(&path.frame(0.0)?, &path.frame(1.0)?)?,
        tol,
    )?;
    let holonomy = &closing_parts.isometry * &transport;
    Ok(ContinuumHolonomy {
        steps,
        transport,
        closing: closing_parts.isometry,
        closing_rank: closing_parts.rank,
        holonomy,
    })
}

/// `(4 P(2n) − P(n)) / 3`, projected back onto the unitary group.
pub fn reference_holonomy(path: &SmoothFramePath, steps: usize, tol: Tolerance) -> Result<ContinuumHolonomy> {
    let coarse = midpoint_transport(path, steps)?;
    let fine = midpoint_transport(path, 2 * steps)?;
    let extrapolated = (fine.scale(4.0) - coarse).unscale(3.0);
    let transport = matops::polar_left(&extrapolated, tol)?.isometry;
    finish(path, 2 * steps, transport, tol)
}

/// Frames at `s = 0, 1/(m−1), …, 1`.
pub fn discretize(path: &SmoothFramePath, m: usize) -> Result<SubspaceSequence> {
    if m < 2 {
        return Err(Error::InvalidArgument("discretization needs m >= 2".into()));
    }
    let frames = (0..m)
        .map(|k| path.frame(k as f64 / (m - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    SubspaceSequence::new(frames)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub dev_direct: Option<f64>,
    pub dev_iterative: Option<f64>,
    /// Set when either discrete holonomy is undefined at this resolution.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub path: String,
    pub reference: ContinuumHolonomy,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// `dev(m_{i+1}) / dev(m_i)` for consecutive rows.
    pub fn ratios(&self, pick: impl Fn(&ConvergenceRow) -> Option<f64>) -> Vec<Option<f64>> {
        self.rows
            .windows(2)
            .map(|w| match (pick(&w[0]), pick(&w[1])) {
                (Some(a), Some(b)) if a > 0.0 => Some(b / a),
                _ => None,
            })
            .collect()
    }

    pub fn direct_ratios(&self) -> Vec<Option<f64>> {
        self.ratios(|r| r.dev_direct)
    }

    pub fn iterative_ratios(&self) -> Vec<Option<f64>> {
        self.ratios(|r| r.dev_iterative)
    }
}

/// Deviations of both discrete holonomies from the Richardson reference.
pub fn convergence_study(path: &SmoothFramePath, m_list: &[usize], tol: Tolerance) -> Result<ConvergenceStudy> {
    let reference = reference_holonomy(path, REFERENCE_STEPS, tol)?;
    convergence_study_against(path, m_list, reference, tol)
}

pub fn convergence_study_against(
    path: &SmoothFramePath,
    m_list: &[usize],
    reference: ContinuumHolonomy,
    tol: Tolerance,
) -> Result<ConvergenceStudy> {
    let rows = m_list
        .iter()
        .map(|&m| convergence_row(path, m, &reference.holonomy, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy {
        path: path.name().to_string(),
        reference,
        rows,
    })
}

fn convergence_row(path: &SmoothFramePath, m: usize, target: &CMatrix, tol: Tolerance) -> Result<ConvergenceRow> {
    let seq = discretize(path, m)?;
    let dev = |r: holonomy::HolonomyResult| r.matrix.map(|u| (u - target).norm());
    let dev_direct = dev(holonomy::direct_holonomy_with(&seq, Closure::Closed, tol)?);
    let dev_iterative = dev(holonomy::iterative_holonomy_with(&seq, Closure::Closed, tol)?);
    Ok(ConvergenceRow {
        m,
        flagged: dev_direct.is_none() || dev_iterative.is_none(),
        dev_direct,
        dev_iterative,
    })
}

/// Built-in paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinPath {
    /// Equator of the Bloch sphere, closed. Equally spaced samples reproduce
    /// the holonomy `−1` exactly at every `m`.
    GreatCircle,
    /// Latitude circle at polar angle `2π/3`, closed.
    SmallCircle,
    /// Two thirds of a latitude circle, open.
    OpenArc,
    /// Spin-1 coherent frames (`N = 3`, `K = 2`) along an open path.
    CoherentOpen,
    /// Spin-1 coherent frames around a wobbling loop.
    CoherentClosed,
    /// `N = 4`, `K = 2` path whose endpoint overlap has rank 1.
    PartialEndpoint,
}

impl BuiltinPath {
    pub const ALL: [BuiltinPath; 6] = [
        BuiltinPath::GreatCircle,
        BuiltinPath::SmallCircle,
        BuiltinPath::OpenArc,
        BuiltinPath::CoherentOpen,
        BuiltinPath::CoherentClosed,
        BuiltinPath::PartialEndpoint,
    ];

    /// Paths used for convergence-rate studies; excludes the great circle,
    /// whose discretizations carry no error to study.
    pub const CONVERGENCE: [BuiltinPath; 5] = [
        BuiltinPath::SmallCircle,
        BuiltinPath::OpenArc,
        BuiltinPath::CoherentOpen,
        BuiltinPath::CoherentClosed,
        BuiltinPath::PartialEndpoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinPath::GreatCircle => "great-circle",
            BuiltinPath::SmallCircle => "small-circle",
            BuiltinPath::OpenArc => "open-arc",
            BuiltinPath::CoherentOpen => "coherent-open",
            BuiltinPath::CoherentClosed => "coherent-closed",
            BuiltinPath::PartialEndpoint => "partial-endpoint",
        }
    }

    pub fn is_closed(self) -> bool {
        matches!(
            self,
            BuiltinPath::GreatCircle | BuiltinPath::SmallCircle | BuiltinPath::CoherentClosed
        )
    }

    pub fn build(self) -> Result<SmoothFramePath> {
        match self {
            BuiltinPath::GreatCircle => qubit_circle(self.name(), FRAC_PI_4, 2.0 * PI),
            BuiltinPath::SmallCircle => qubit_circle(self.name(), FRAC_PI_3, 2.0 * PI),
            BuiltinPath::OpenArc => qubit_circle(self.name(), FRAC_PI_3, 4.0 * PI / 3.0),
            BuiltinPath::CoherentOpen => coherent_path(self.name(), 1, |s| (0.3 + 1.1 * s, 1.1), |s| (2.4 * s, 2.4)),
            BuiltinPath::CoherentClosed => coherent_path(
                self.name(),
                1,
                |s| (1.0 + 0.4 * (2.0 * PI * s).sin(), 0.8 * PI * (2.0 * PI * s).cos()),
                |s| (2.0 * PI * s, 2.0 * PI),
            ),
            BuiltinPath::PartialEndpoint => partial_endpoint_path(self.name(), 0.8, 1.1),
        }
    }

    /// Closed-form `U_{0,1} · P exp` for the single-state paths.
    pub fn analytic_holonomy(self) -> Option<Complex64> {
        let (alpha, chi): (f64, f64) = match self {
            BuiltinPath::GreatCircle => (FRAC_PI_4, 2.0 * PI),
            BuiltinPath::SmallCircle => (FRAC_PI_3, 2.0 * PI),
            BuiltinPath::OpenArc => (FRAC_PI_3, 4.0 * PI / 3.0),
            _ => return None,
        };
        let s2 = alpha.sin().powi(2);
        let endpoint = c(1.0 - s2, 0.0) + Complex64::from_polar(s2, chi);
        Some(endpoint / endpoint.norm() * Complex64::from_polar(1.0, -chi * s2))
    }
}

impl fmt::Display for BuiltinPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuiltinPath::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = BuiltinPath::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidArgument(format!("unknown path '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

/// `cos α |0⟩ + e^{iχs} sin α |1⟩`, with `A(s) = −iχ sin²α`.
pub fn qubit_circle(name: &str, alpha: f64, chi: f64) -> Result<SmoothFramePath> {
    let (sa, ca) = alpha.sin_cos();
    let frame: MatrixField = Arc::new(move |s| {
        Ok(CMatrix::from_column_slice(2, 1, &[c(ca, 0.0), Complex64::from_polar(sa, chi * s)]))
    });
    let derivative: MatrixField = Arc::new(move |s| {
        Ok(CMatrix::from_column_slice(
            2,
            1,
            &[c(0.0, 0.0), Complex64::from_polar(sa, chi * s) * c(0.0, chi)],
        ))
    });
    Ok(SmoothFramePath::new(name, frame)?.with_derivative(derivative))
}

/// Coherent frames along `(θ(s), φ(s))`; each closure returns the angle and its rate.
pub fn coherent_path(
    name: &str,
    j: u32,
    theta: impl Fn(f64) -> (f64, f64) + Send + Sync + Clone + 'static,
    phi: impl Fn(f64) -> (f64, f64) + Send + Sync + Clone + 'static,
) -> Result<SmoothFramePath> {
    let spin = Arc::new(SpinSystem::new(2 * j)?);
    let (spin_f, theta_f, phi_f) = (spin.clone(), theta.clone(), phi.clone());
    let frame: MatrixField = Arc::new(move |s| {
        let dir = Direction::new(theta_f(s).0, phi_f(s).0)?;
        Ok(coherent::rotation_frame(&spin_f, dir)?.into_matrix())
    });
    let derivative: MatrixField = Arc::new(move |s| {
        let ((th, dth), (ph, dph)) = (theta(s), phi(s));
        coherent::rotation_frame_derivative(&spin, Direction::new(th, ph)?, dth, dph)
    });
    Ok(SmoothFramePath::new(name, frame)?.with_derivative(derivative))
}

/// Columns `cos(ts) e1 + sin(ts) e^{iωs} e4` and `cos(πs/2) e2 + sin(πs/2) e3`,
/// right-multiplied by `exp(−isH)` for a fixed Hermitian `H`. The second column
/// ends orthogonal to the initial plane, so `(F(0)|F(1))` has rank 1.
/// No analytic derivative: exercises the finite-difference route.
pub fn partial_endpoint_path(name: &str, t: f64, omega: f64) -> Result<SmoothFramePath> {
    let h = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.2, -0.1), c(0.2, 0.1), c(-0.4, 0.0)]);
    let frame: MatrixField = Arc::new(move |s| {
        let mut f = CMatrix::zeros(4, 2);
        f[(0, 0)] = c((t * s).cos(), 0.0);
        f[(3, 0)] = Complex64::from_polar((t * s).sin(), omega * s);
        f[(1, 1)] = c((0.5 * PI * s).cos(), 0.0);
        f[(2, 1)] = c((0.5 * PI * s).sin(), 0.0);
        Ok(f * matops::exp_i_hermitian(&h, s)?)
    });
    SmoothFramePath::new(name, frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_path() -> SmoothFramePath {
        let f = crate::grassmann::random_frame(4, 2, 3).unwrap().into_matrix();
        SmoothFramePath::new("constant", Arc::new(move |_| Ok(f.clone()))).unwrap()
    }

    #[test]
    fn constant_path_is_trivial() {
        let p = constant_path();
        assert!(wz_connection(&p, 0.4).unwrap().norm() < 1e-12);
        let h = path_ordered_exp(&p, 16, Tolerance::default()).unwrap();
        assert!((h.holonomy - matops::identity(2)).norm() < 1e-12);
    }

    #[test]
    fn qubit_connection_matches_closed_form() {
        let (alpha, chi) = (0.7, 1.9);
        let p = qubit_circle("q", alpha, chi).unwrap();
        let a = wz_connection(&p, 0.3).unwrap();
        assert!((a[(0, 0)] - c(0.0, -chi * alpha.sin().powi(2))).norm() < 1e-14);
        let t = path_ordered_exp(&p, 8, Tolerance::default()).unwrap().transport;
        assert!((t[(0, 0)] - Complex64::from_polar(1.0, -chi * alpha.sin().powi(2))).norm() < 1e-13);
    }

    #[test]
    fn finite_differences_track_the_analytic_derivative() {
        let p = BuiltinPath::CoherentOpen.build().unwrap();
        let fd = SmoothFramePath::new("fd", p.frame.clone()).unwrap();
        for s in [0.0, 0.37, 1.0] {
            let d = (wz_connection(&p, s).unwrap() - wz_connection(&fd, s).unwrap()).norm();
            assert!(d < 1e-8, "s = {s}: {d}");
            assert!(anti_hermiticity_residual(&p, s).unwrap() < 1e-12);
            assert!(anti_hermiticity_residual(&fd, s).unwrap() < 1e-8);
        }
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let p = BuiltinPath::CoherentOpen.build().unwrap();
        let tol = Tolerance::default();
        let reference = path_ordered_exp(&p, 1024, tol).unwrap().transport;
        let e1 = (path_ordered_exp(&p, 32, tol).unwrap().transport - &reference).norm();
        let e2 = (path_ordered_exp(&p, 64, tol).unwrap().transport - &reference).norm();
        let ratio = e2 / e1;
        assert!((ratio - 0.25).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn discretize_samples_endpoints() {
        let p = BuiltinPath::OpenArc.build().unwrap();
        let seq = discretize(&p, 2).unwrap();
        assert!((seq.frame(1).matrix() - p.frame_matrix(1.0).unwrap()).norm() < 1e-15);
        assert!(discretize(&p, 1).is_err());
    }

    #[test]
    fn closed_builtins_return_to_their_start() {
        for b in BuiltinPath::ALL.into_iter().filter(|b| b.is_closed()) {
            let p = b.build().unwrap();
            let d = (p.frame_matrix(0.0).unwrap() - p.frame_matrix(1.0).unwrap()).norm();
            assert!(d < 1e-12, "{b}");
        }
    }

    #[test]
    fn partial_endpoint_has_rank_one_closing() {
        let p = BuiltinPath::PartialEndpoint.build().unwrap();
        let h = path_ordered_exp(&p, 64, Tolerance::default()).unwrap();
        assert_eq!(h.closing_rank, 1);
        assert!(matops::is_partial_isometry(&h.holonomy, 1e-10));
    }

    #[test]
    fn great_circle_is_exact() {
        let p = BuiltinPath::GreatCircle.build().unwrap();
        let tol = Tolerance::default();
        for m in [4, 5, 17] {
            let seq = discretize(&p, m).unwrap();
            let u = holonomy::iterative_holonomy(&seq, tol).unwrap().matrix.unwrap();
            assert!((u[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn analytic_single_state_holonomies() {
        let tol = Tolerance::default();
        for b in [BuiltinPath::SmallCircle, BuiltinPath::OpenArc, BuiltinPath::GreatCircle] {
            let h = path_ordered_exp(&b.build().unwrap(), 4, tol).unwrap();
            assert!((h.holonomy[(0, 0)] - b.analytic_holonomy().unwrap()).norm() < 1e-12, "{b}");
        }
    }

    #[test]
    fn names_round_trip() {
        for b in BuiltinPath::ALL {
            assert_eq!(b.name().parse::<BuiltinPath>().unwrap(), b);
        }
        assert!("spiral".parse::<BuiltinPath>().is_err());
    }
}
