//! Geometric phase of the z → x → y qubit triangle, computed from overlaps
//! and read off an interferometer phase scan.

use std::f64::consts::FRAC_1_SQRT_2;

use discrete_holonomy::grassmann::{Frame, SubspaceSequence};
use discrete_holonomy::holonomy;
use discrete_holonomy::interferometer;
use discrete_holonomy::matops::{c, Tolerance};

fn main() -> discrete_holonomy::Result<()> {
    let r = FRAC_1_SQRT_2;
    let seq = SubspaceSequence::new(vec![
        Frame::from_state(&[c(1.0, 0.0), c(0.0, 0.0)])?,
        Frame::from_state(&[c(r, 0.0), c(r, 0.0)])?,
        Frame::from_state(&[c(r, 0.0), c(0.0, r)])?,
    ])?;
    let tol = Tolerance::default();

    let direct = holonomy::pancharatnam_direct(&seq, tol)?;
    let chain = holonomy::pancharatnam_iterative(&seq, tol)?;
    println!("gamma_D = {:.15} (arg {:+.12})", direct, direct.arg());
    println!("gamma_I = {:.15} (arg {:+.12})", chain.phase, chain.phase.arg());
    println!("expected arg -pi/4 = {:+.12}", -std::f64::consts::FRAC_PI_4);

    let scan = interferometer::kappa_scan(&seq, 10_000)?;
    let (kappa, peak) = interferometer::scan_argmax(&scan).expect("non-empty scan");
    // The 0-arm is brightest when the reference phase equals arg gamma_D.
    let wrapped = (kappa + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    println!("scan peak at kappa = {kappa:.6} (wrapped {wrapped:+.6}), intensity {peak:.6}");
    Ok(())
}
