//! A loop with one partially overlapping link: both holonomies become
//! partial isometries, built from pseudoinverses instead of inverses.

use discrete_holonomy::grassmann;
use discrete_holonomy::holonomy;
use discrete_holonomy::matops::{self, Tolerance};

fn main() -> discrete_holonomy::Result<()> {
    let tol = Tolerance::default();
    let seq = grassmann::random_partial_sequence(6, 3, 4, 1, 29)?;

    let link = grassmann::classify_overlap(seq.frame(0), seq.frame(1), tol)?;
    println!("first link: {:?}, singular values {:.3?}", link.tag, link.singular_values);

    for (name, result) in [
        ("U_D", holonomy::direct_holonomy(&seq, tol)?),
        ("U_I", holonomy::iterative_holonomy(&seq, tol)?),
    ] {
        let u = result.matrix_or_err()?;
        println!(
            "{name}: {:?}, partial links {:?}, X X' X = X: {}, singular values {:.3?}",
            result.kind,
            result.partial_links(),
            matops::is_partial_isometry(u, 1e-10),
            matops::singular_values(u)?
        );
    }

    let o = grassmann::overlap_matrix(seq.frame(1), seq.frame(0))?;
    let pinv = matops::pseudoinverse(&o, tol)?;
    println!("||O O+ O - O||_F = {:.2e}", (&o * &pinv * &o - &o).norm());
    Ok(())
}
