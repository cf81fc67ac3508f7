//! Re-choosing every frame by a unitary changes each holonomy only by the
//! conjugation `W_1† U W_1`.

use discrete_holonomy::grassmann;
use discrete_holonomy::holonomy;
use discrete_holonomy::matops::{CMatrix, Tolerance};

fn main() -> discrete_holonomy::Result<()> {
    let tol = Tolerance::default();
    let cases = [
        ("full", grassmann::random_sequence(5, 2, 4, 11)?),
        ("partial", grassmann::random_partial_sequence(5, 2, 4, 1, 11)?),
    ];
    for (label, seq) in cases {
        let gauges: Vec<CMatrix> = (0..seq.len()).map(|a| grassmann::random_unitary(seq.rank(), 100 + a as u64)).collect();
        let moved = seq.gauge_transform(&gauges)?;
        let w1 = &gauges[0];
        for (name, f) in [
            ("direct", holonomy::direct_holonomy as fn(_, _) -> _),
            ("iterative", holonomy::iterative_holonomy),
        ] {
            let before = f(&seq, tol)?;
            let after = f(&moved, tol)?;
            let expected = w1.adjoint() * before.matrix_or_err()? * w1;
            println!(
                "{label:8} {name:9} rank {}  ||hol(FW) - W1' hol(F) W1||_F = {:.2e}",
                before.rank(),
                (after.matrix_or_err()? - expected).norm()
            );
        }
    }
    Ok(())
}
