//! Direct and iterative holonomies of a random non-Abelian loop, and the
//! classification of each link.

use discrete_holonomy::grassmann;
use discrete_holonomy::holonomy;
use discrete_holonomy::matops::{self, Tolerance};

fn main() -> discrete_holonomy::Result<()> {
    let (n, k, m, seed) = (6, 2, 5, 7);
    let seq = grassmann::random_sequence(n, k, m, seed)?;
    let tol = Tolerance::default();

    let direct = holonomy::direct_holonomy(&seq, tol)?;
    let iterative = holonomy::iterative_holonomy(&seq, tol)?;
    for link in &direct.links {
        println!("link {} -> {}: {:?}, singular values {:.4?}", link.from, link.to, link.class.tag, link.class.singular_values);
    }

    let ud = direct.matrix_or_err()?;
    let ui = iterative.matrix_or_err()?;
    println!("U_D = {ud:.6}");
    println!("U_I = {ui:.6}");
    println!("unitarity residuals: U_D {:.2e}, U_I {:.2e}", matops::unitarity_residual(ud), matops::unitarity_residual(ui));
    println!("||U_D - U_I||_F = {:.6}", (ud - ui).norm());
    println!("singular values of D: {:.6?}", direct.product_singular_values);
    Ok(())
}
