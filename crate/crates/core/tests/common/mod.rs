//! Reference computations that avoid the library's factorization pipeline:
//! explicit sums, Newton iterations for polar factors, and the Wigner
//! factorial formula for spin rotations.

#![allow(dead_code)]

use discrete_holonomy::grassmann::{Frame, SubspaceSequence};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;

pub fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(A|B)_{kl} = Σ_i conj(A_{ik}) B_{il}`.
pub fn overlap(a: &M, b: &M) -> M {
    M::from_fn(a.ncols(), b.ncols(), |k, l| {
        (0..a.nrows()).map(|i| a[(i, k)].conj() * b[(i, l)]).sum()
    })
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Unitary factor of an invertible matrix, `X ← (X + X^{−†}) / 2`.
pub fn newton_polar(m: &M) -> M {
    let mut x = m.clone();
    for _ in 0..200 {
        let inv = x.clone().try_inverse().expect("oracle polar needs an invertible matrix");
        let next = (&x + inv.adjoint()).scale(0.5);
        let step = (&next - &x).norm();
        x = next;
        if step < 1e-15 {
            break;
        }
    }
    x
}

/// Isometry factor of a possibly singular matrix by Newton–Schulz,
/// `X ← X (3 − X†X) / 2` after scaling into the basin.
pub fn newton_schulz_polar(m: &M) -> M {
    let scale = m.norm();
    if scale == 0.0 {
        return m.clone();
    }
    let mut x = m.unscale(scale);
    let eye = M::identity(m.ncols(), m.ncols());
    let mut last = f64::INFINITY;
    for _ in 0..500 {
        let next = (&x * (eye.scale(3.0) - x.adjoint() * &x)).scale(0.5);
        let step = (&next - &x).norm();
        // Roundoff-level kernel components grow by 3/2 per sweep; stop once the
        // step stops shrinking instead of letting them converge to 1.
        if last < 1e-10 && step >= last {
            break;
        }
        x = next;
        last = step;
        if step < 1e-15 {
            break;
        }
    }
    x
}

pub fn frames_of(seq: &SubspaceSequence) -> Vec<M> {
    seq.frames().iter().map(|f| f.matrix().clone()).collect()
}

/// `(F_1|F_m)…(F_2|F_1)` from explicit sums, closed.
pub fn d_product(frames: &[M]) -> M {
    let k = frames[0].ncols();
    let m = frames.len();
    (0..m).fold(M::identity(k, k), |acc, a| overlap(&frames[(a + 1) % m], &frames[a]) * acc)
}

/// `U_D` for invertible `D`.
pub fn direct_oracle(frames: &[M]) -> M {
    newton_polar(&d_product(frames))
}

/// `U_{1,m}…U_{2,1}` with Newton–Schulz link phases, closed and polar-projected.
pub fn iterative_oracle(frames: &[M]) -> M {
    let k = frames[0].ncols();
    let m = frames.len();
    let i = (0..m).fold(M::identity(k, k), |acc, a| {
        newton_schulz_polar(&overlap(&frames[(a + 1) % m], &frames[a])) * acc
    });
    newton_schulz_polar(&i)
}

/// `∏ ⟨ψ_{a+1}|ψ_a⟩` around the closed loop of states.
pub fn loop_amplitude(states: &[Vec<Complex64>]) -> Complex64 {
    let m = states.len();
    (0..m)
        .map(|a| {
            let (to, from) = (&states[(a + 1) % m], &states[a]);
            to.iter().zip(from).map(|(x, y)| x.conj() * y).sum::<Complex64>()
        })
        .product()
}

pub fn state_seq(states: &[Vec<Complex64>]) -> SubspaceSequence {
    SubspaceSequence::new(states.iter().map(|s| Frame::from_state(s).unwrap()).collect()).unwrap()
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Wigner small-d element `d^j_{m'm}(β)` from the factorial sum; arguments
/// are doubled (`2j`, `2m'`, `2m`) so half-odd spins stay integral.
pub fn wigner_d(two_j: i64, two_mp: i64, two_m: i64, beta: f64) -> f64 {
    let (jpmp, jmmp) = ((two_j + two_mp) / 2, (two_j - two_mp) / 2);
    let (jpm, jmm) = ((two_j + two_m) / 2, (two_j - two_m) / 2);
    let dm = (two_mp - two_m) / 2;
    let pre = (factorial(jpmp) * factorial(jmmp) * factorial(jpm) * factorial(jmm)).sqrt();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let mut total = 0.0;
    for k in 0..=two_j {
        let d = [jpm - k, k, dm + k, jmmp - k];
        if d.iter().any(|&x| x < 0) {
            continue;
        }
        let sign = if (dm + k) % 2 == 0 { 1.0 } else { -1.0 };
        let den: f64 = d.iter().map(|&x| factorial(x)).product();
        total += sign * pre / den * c.powi((jpm + jmmp - 2 * k) as i32) * s.powi((dm + 2 * k) as i32);
    }
    total
}

/// Frame `[R|j⟩, R|−j⟩]` with `R = e^{−iφJz} e^{−iθJy}`, basis `m = j, …, −j`.
pub fn coherent_frame(two_j: i64, theta: f64, phi: f64) -> M {
    let dim = (two_j + 1) as usize;
    M::from_fn(dim, 2, |row, col| {
        let two_mp = two_j - 2 * row as i64;
        let two_m = if col == 0 { two_j } else { -two_j };
        Complex64::from_polar(1.0, -0.5 * two_mp as f64 * phi) * wigner_d(two_j, two_mp, two_m, theta)
    })
}

/// `Δφ` where `q_I = cos(χ_1) = 0` for `j = 1`, `θ_0 = π/4`, `θ_1 = 3π/4`.
pub fn q_i_zero_dphi() -> f64 {
    -2.0 * 2f64.sqrt().atan()
}

/// `Δφ ∈ (0, π)` where `q_D = (1 − x_1) cos χ_1 − x_1 = 0` for `j = 1` and
/// `θ_1 = θ_0 + π/2`, found by bisection.
pub fn q_d_zero_dphi(theta0: f64) -> f64 {
    let theta1 = theta0 + std::f64::consts::FRAC_PI_2;
    let q_d = |dphi: f64| {
        let half = 0.5 * dphi;
        let chi1 = 2.0 * (theta1.cos() * half.tan()).atan();
        let x1 = theta1.sin().powi(2) * half.sin().powi(2);
        (1.0 - x1) * chi1.cos() - x1
    };
    let (mut lo, mut hi) = (1e-6, std::f64::consts::PI - 1e-6);
    assert!(q_d(lo) > 0.0 && q_d(hi) < 0.0, "no sign change of q_D");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
