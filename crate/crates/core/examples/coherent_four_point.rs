//! Spin-j coherent states: the closed-form overlap, the half-odd-j
//! equivalence of the two holonomies, and the four-direction loop where the
//! printed closed forms are checked against the generic pipeline.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use discrete_holonomy::coherent::{self, Direction, SpinSystem};
use discrete_holonomy::matops::Tolerance;

fn main() -> discrete_holonomy::Result<()> {
    let tol = Tolerance::default();
    let dirs = [
        Direction::new(0.4, 0.0)?,
        Direction::new(1.3, 0.9)?,
        Direction::new(2.1, 2.5)?,
        Direction::new(0.9, 4.0)?,
    ];
    for two_j in 1..=6 {
        let spin = SpinSystem::new(two_j)?;
        let (r, s) = coherent::rs_closed_form(&spin, dirs[0], dirs[1]);
        println!(
            "j = {:3}: R = {r:.6}, S = {s:.6}, |R|²+|S|² residual {:.1e}, ||U_D - U_I||_F = {:.3e}",
            spin.j(),
            coherent::normalization_identity(&spin, dirs[0], dirs[1]),
            coherent::holonomy_gap(&spin, &dirs, tol)?
        );
    }

    let fp = coherent::four_point_example(1, FRAC_PI_4, FRAC_PI_4 + FRAC_PI_2, 0.3, 1.5, tol)?;
    println!("\nfour-point loop, j = 1: q_D = {:.6}, q_I = {:.6}, eta0 = {:.6}", fp.q_d, fp.q_i, fp.eta0);
    println!("deviations from the oracle: {:#?}", fp.deviations);

    let report = coherent::regime_grid(&[1, 2], 9, 16, 0.3, tol)?;
    println!("\n{}", report.summary.statement);
    Ok(())
}
