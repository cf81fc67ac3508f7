mod common;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use discrete_holonomy::coherent::{self, Direction, SpinSystem};
use discrete_holonomy::continuum::{self, BuiltinPath, MatrixField};
use discrete_holonomy::grassmann::{self, SubspaceSequence};
use discrete_holonomy::holonomy::{self, HolonomyKind, HolonomyResult};
use discrete_holonomy::interferometer::{self, Protocol};
use discrete_holonomy::matops::{self, CMatrix, Tolerance};
use discrete_holonomy::uhlmann::{self, ProjectorSequence};
use discrete_holonomy::Result;
use num_complex::Complex64;
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = grassmann::seeded_rng(seed);
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    })
}

/// Random `rows×cols` matrix of rank at most `rank`.
fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> CMatrix {
    gaussian(rows, rank, seed) * gaussian(rank, cols, seed ^ 0x9e37_79b9)
}

fn gauges(seq: &SubspaceSequence, seed: u64) -> Vec<CMatrix> {
    (0..seq.len()).map(|a| grassmann::random_unitary(seq.rank(), seed.wrapping_add(a as u64))).collect()
}

fn check_kind(r: &HolonomyResult) {
    let u = r.matrix.as_ref().unwrap();
    match r.kind {
        HolonomyKind::FullUnitary => assert!(matops::is_unitary(u, 1e-9)),
        HolonomyKind::PartialIsometry { rank } => {
            assert!(matops::is_partial_isometry(u, 1e-9));
            assert!(rank > 0 && rank < u.ncols());
            assert_eq!(tol().rank_of(&matops::singular_values(u).unwrap()), rank);
        }
        HolonomyKind::Undefined => panic!("defined result tagged undefined"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polar_parts_reconstruct_and_obey_their_laws(
        rows in 1usize..6, cols in 1usize..6, rank in 1usize..6, seed in any::<u64>()
    ) {
        let m = low_rank(rows, cols, rank, seed);
        let p = matops::polar_left(&m, tol()).unwrap();
        prop_assert!((&m - &p.positive * &p.isometry).norm() <= 1e-10 * m.norm());
        prop_assert!(matops::hermitian_residual(&p.positive) <= 1e-10 * m.norm());
        let eig = matops::hermitian_eigen(&(&p.positive + p.positive.adjoint()).scale(0.5)).unwrap().0;
        prop_assert!(eig.iter().all(|&l| l >= -1e-10 * m.norm()));
        prop_assert!(matops::is_partial_isometry(&p.isometry, 1e-10));
        prop_assert_eq!(p.rank, rank.min(rows).min(cols));
        prop_assert!(p.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn isometry_part_agrees_with_newton_iteration(n in 1usize..6, seed in any::<u64>()) {
        // Well-separated spectrum: U diag(1, 2, …) V.
        let (u, v) = (grassmann::random_unitary(n, seed), grassmann::random_unitary(n, seed ^ 1));
        let sigma = CMatrix::from_fn(n, n, |r, c| if r == c { Complex64::new(1.0 + r as f64, 0.0) } else { Complex64::ZERO });
        let m = &u * sigma * &v;
        let lib = matops::polar_left(&m, tol()).unwrap().isometry;
        prop_assert!((lib - common::newton_polar(&m)).norm() <= 1e-10);
    }

    #[test]
    fn hermitian_pseudoinverse_satisfies_penrose(n in 1usize..6, rank in 1usize..6, seed in any::<u64>()) {
        let g = gaussian(n, rank.min(n), seed);
        let h = &g * g.adjoint();
        let x = matops::mp_pseudoinverse(&h, tol()).unwrap();
        let scale = h.norm() * x.norm() + 1.0;
        prop_assert!((&h * &x * &h - &h).norm() <= 1e-10 * scale * h.norm());
        prop_assert!((&x * &h * &x - &x).norm() <= 1e-10 * scale * x.norm());
        prop_assert!(matops::hermitian_residual(&(&h * &x)) <= 1e-10 * scale);
        prop_assert!(matops::hermitian_residual(&(&x * &h)) <= 1e-10 * scale);
    }

    #[test]
    fn pseudoinverse_of_a_rotated_psd_matrix(n in 1usize..6, rank in 1usize..6, seed in any::<u64>()) {
        let g = gaussian(n, rank.min(n), seed);
        let x = &g * g.adjoint();
        let (u, v) = (grassmann::random_unitary(n, seed ^ 2), grassmann::random_unitary(n, seed ^ 3));
        let lhs = matops::pseudoinverse(&(&u * &x * &v), tol()).unwrap();
        let rhs = v.adjoint() * matops::mp_pseudoinverse(&x, tol()).unwrap() * u.adjoint();
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn phase_factor_has_unit_modulus(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        prop_assume!(Complex64::new(re, im).norm() > 1e-12);
        let p = matops::phase_factor(Complex64::new(re, im), 1e-14).unwrap();
        prop_assert!(((p * p.conj()).re - 1.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn overlap_matrices_are_adjoint_symmetric(n in 2usize..8, k in 1usize..4, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let fa = grassmann::random_frame(n, k, seed).unwrap();
        let fb = grassmann::random_frame(n, k, seed ^ 5).unwrap();
        let ab = grassmann::overlap_matrix(&fa, &fb).unwrap();
        let ba = grassmann::overlap_matrix(&fb, &fa).unwrap();
        prop_assert!((ab.adjoint() - &ba).norm() <= 1e-14);
        prop_assert!((&ab - common::overlap(fa.matrix(), fb.matrix())).norm() <= 1e-14);
        prop_assert!(matops::singular_values(&ab).unwrap().iter().all(|&s| (0.0..=1.0 + 1e-12).contains(&s)));
        let cab = grassmann::classify_overlap(&fa, &fb, tol()).unwrap();
        let cba = grassmann::classify_overlap(&fb, &fa, tol()).unwrap();
        prop_assert_eq!(cab.tag, cba.tag);
        prop_assert!(grassmann::orthonormality_error(fa.matrix()) <= 1e-10);
    }

    #[test]
    fn projectors_are_gauge_invariant(n in 2usize..8, k in 1usize..4, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let f = grassmann::random_frame(n, k, seed).unwrap();
        let w = grassmann::random_unitary(k, seed ^ 7);
        let g = grassmann::gauge_transform(&f, &w).unwrap();
        prop_assert!((grassmann::projector(&f) - grassmann::projector(&g)).norm() <= 1e-12);
    }

    #[test]
    fn abelian_holonomies_coincide(n in 2usize..9, m in 3usize..11, seed in any::<u64>()) {
        let seq = grassmann::random_sequence(n, 1, m, seed).unwrap();
        let smallest = holonomy::link_pairs(m, holonomy::Closure::Closed)
            .into_iter()
            .map(|(a, b)| grassmann::overlap_matrix(seq.frame(b), seq.frame(a)).unwrap()[(0, 0)].norm())
            .fold(f64::INFINITY, f64::min);
        prop_assume!(smallest >= 1e-3);
        let gd = holonomy::pancharatnam_direct(&seq, tol()).unwrap();
        let gi = holonomy::pancharatnam_iterative(&seq, tol()).unwrap().phase;
        prop_assert!((gd - gi).norm() <= 1e-12);
    }

    #[test]
    fn holonomies_are_gauge_covariant(
        n in 4usize..8, k in 1usize..4, m in 2usize..7, partial in any::<bool>(), seed in any::<u64>()
    ) {
        let seq = if partial && k >= 2 && n - k >= 1 {
            grassmann::random_partial_sequence(n, k, m, k - 1, seed).unwrap()
        } else {
            grassmann::random_sequence(n, k, m, seed).unwrap()
        };
        let ws = gauges(&seq, seed ^ 11);
        let moved = seq.gauge_transform(&ws).unwrap();
        let w1 = &ws[0];
        for f in [holonomy::direct_holonomy, holonomy::iterative_holonomy] {
            let before = f(&seq, tol()).unwrap();
            let after = f(&moved, tol()).unwrap();
            check_kind(&before);
            let expected = w1.adjoint() * before.matrix.as_ref().unwrap() * w1;
            prop_assert!((after.matrix.as_ref().unwrap() - expected).norm() <= 1e-10);
        }
    }

    #[test]
    fn two_point_direct_holonomy_is_the_support_projector(n in 3usize..7, k in 1usize..3, seed in any::<u64>()) {
        let seq = grassmann::random_sequence(n, k, 2, seed).unwrap();
        let ud = holonomy::direct_holonomy(&seq, tol()).unwrap();
        prop_assert!((ud.matrix.unwrap() - matops::identity(k)).norm() <= 1e-10);
    }

    #[test]
    fn interferometer_intensities_are_bounded(n in 2usize..6, k in 1usize..3, m in 2usize..5, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let seq = grassmann::random_sequence(n, k, m, seed).unwrap();
        let v = grassmann::random_unitary(k, seed ^ 13);
        let closed = interferometer::direct_intensities(&seq, &v).unwrap();
        let sim = interferometer::simulate_full(&seq, Protocol::Direct { arm_unitary: &v }).unwrap();
        prop_assert!(closed.intensities.iter().all(|&i| (-1e-12..=1.0 + 1e-12).contains(&i)));
        prop_assert!((closed.total - closed.intensities.iter().sum::<f64>()).abs() <= 1e-14);
        for (a, b) in sim.intensities.iter().zip(&closed.intensities) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn abelian_intensity_is_periodic(kappa in 0.0f64..TAU, seed in any::<u64>()) {
        let seq = grassmann::random_sequence(3, 1, 4, seed).unwrap();
        let a = interferometer::abelian_direct_intensity(&seq, kappa).unwrap();
        let b = interferometer::abelian_direct_intensity(&seq, kappa + TAU).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn uhlmann_restriction_is_the_iterative_holonomy(
        n in 2usize..9, k in 1usize..4, m in 2usize..9, seed in any::<u64>()
    ) {
        prop_assume!(k < n);
        let seq = grassmann::random_sequence(n, k, m, seed).unwrap();
        prop_assert!(uhlmann::compare_iterative(&seq, tol()).unwrap() <= 1e-10);

        // Frame changes touch U_uhl not at all; its F_1 matrix elements move like U_I.
        let ws = gauges(&seq, seed ^ 17);
        let moved = seq.gauge_transform(&ws).unwrap();
        let u = uhlmann::uhlmann_holonomy(&ProjectorSequence::from_sequence(&seq), tol()).unwrap();
        let u_moved = uhlmann::uhlmann_holonomy(&ProjectorSequence::from_sequence(&moved), tol()).unwrap();
        prop_assert!((&u - &u_moved).norm() <= 1e-10);
        let (f1, g1) = (seq.frame(0).matrix(), moved.frame(0).matrix());
        let expected = ws[0].adjoint() * (f1.adjoint() * &u * f1) * &ws[0];
        prop_assert!((g1.adjoint() * &u * g1 - expected).norm() <= 1e-10);
    }

    #[test]
    fn coherent_overlaps_have_the_closed_form(
        two_j in 1u32..7, ta in 0.0f64..PI, pa in -6.0f64..6.0, tb in 0.0f64..PI, pb in -6.0f64..6.0
    ) {
        let spin = SpinSystem::new(two_j).unwrap();
        let (a, b) = (Direction::new(ta, pa).unwrap(), Direction::new(tb, pb).unwrap());
        let generic = grassmann::overlap_matrix(
            &coherent::rotation_frame(&spin, a).unwrap(),
            &coherent::rotation_frame(&spin, b).unwrap(),
        ).unwrap();
        let closed = coherent::overlap_closed_form(&spin, a, b);
        prop_assert!(common::max_abs(&(&generic - &closed)) <= 1e-12);
        prop_assert!(coherent::normalization_identity(&spin, a, b) <= 1e-12);
        if !spin.is_integer() {
            let (r, s) = coherent::rs_closed_form(&spin, a, b);
            let scalar = matops::identity(2).scale(r.norm_sqr() + s.norm_sqr());
            prop_assert!((closed.adjoint() * &closed - scalar).norm() <= 1e-12);
        }
    }

    #[test]
    fn half_odd_spins_give_equal_holonomies(
        two_j in prop::sample::select(vec![3u32, 5]), angles in prop::collection::vec((0.1f64..3.0, -3.0f64..3.0), 3..6)
    ) {
        let spin = SpinSystem::new(two_j).unwrap();
        let dirs: Vec<Direction> = angles.iter().map(|&(t, p)| Direction::new(t, p).unwrap()).collect();
        if let Ok(gap) = coherent::half_odd_equivalence(&spin, &dirs, tol()) {
            prop_assert!(gap <= 1e-10);
        }
    }
}

#[test]
fn angular_momentum_algebra() {
    for two_j in 1..=6 {
        let spin = SpinSystem::new(two_j).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let comm = |a: &CMatrix, b: &CMatrix| a * b - b * a;
        assert!((comm(spin.jz(), spin.jy()) + spin.jx() * i).norm() <= 1e-12);
        assert!((comm(spin.jx(), spin.jy()) - spin.jz() * i).norm() <= 1e-12);
        let diag: Vec<f64> = (0..spin.dim()).map(|r| spin.jz()[(r, r)].re).collect();
        let expected: Vec<f64> = (0..spin.dim()).map(|r| spin.j() - r as f64).collect();
        assert_eq!(diag, expected);
    }
}

/// `W(s) = exp(−isH)` with its analytic derivative.
fn unitary_field(h: CMatrix) -> (MatrixField, MatrixField) {
    let h2 = h.clone();
    let w: MatrixField = Arc::new(move |s| matops::exp_i_hermitian(&h, s));
    let dw: MatrixField = Arc::new(move |s| -> Result<CMatrix> {
        Ok((&h2 * matops::exp_i_hermitian(&h2, s)?) * Complex64::new(0.0, -1.0))
    });
    (w, dw)
}

#[test]
fn continuum_holonomy_is_gauge_covariant() {
    for (which, seed) in [(BuiltinPath::CoherentOpen, 1), (BuiltinPath::OpenArc, 2), (BuiltinPath::CoherentClosed, 3)] {
        let path = which.build().unwrap();
        let h = interferometer::random_hermitian(path.rank(), &mut grassmann::seeded_rng(seed));
        let (w, dw) = unitary_field(h);
        let gauged = path.gauge_transformed(w.clone(), Some(dw));
        let before = continuum::reference_holonomy(&path, 512, tol()).unwrap().holonomy;
        let after = continuum::reference_holonomy(&gauged, 512, tol()).unwrap().holonomy;
        let w0 = w(0.0).unwrap();
        assert!((after - w0.adjoint() * before * &w0).norm() <= 1e-9, "{which}");
    }
}
