//! The Uhlmann holonomy of the projectors `P_a / K`, restricted to the first
//! subspace, is the iterative holonomy.

use discrete_holonomy::grassmann;
use discrete_holonomy::holonomy;
use discrete_holonomy::matops::{self, Tolerance};
use discrete_holonomy::uhlmann::{self, ProjectorSequence};

fn main() -> discrete_holonomy::Result<()> {
    let tol = Tolerance::default();
    let seq = grassmann::random_sequence(5, 2, 6, 13)?;
    let projectors = ProjectorSequence::from_sequence(&seq);
    let u = uhlmann::uhlmann_holonomy(&projectors, tol)?;
    println!("U_uhl is {}x{}, partial isometry: {}", u.nrows(), u.ncols(), matops::is_partial_isometry(&u, 1e-10));

    let f1 = seq.frame(0).matrix();
    println!("F1' U_uhl F1 = {:.8}", f1.adjoint() * &u * f1);
    println!("U_I          = {:.8}", holonomy::iterative_holonomy(&seq, tol)?.matrix_or_err()?);
    println!("max |difference| = {:.2e}", uhlmann::compare_iterative(&seq, tol)?);
    Ok(())
}
