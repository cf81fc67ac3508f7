//! Propagates amplitudes through the complete two-arm circuit (beam
//! splitters, filters, arm unitary) and compares with the reduced formulas.

use discrete_holonomy::grassmann;
use discrete_holonomy::holonomy;
use discrete_holonomy::interferometer::{self, Protocol};
use discrete_holonomy::matops::{identity, Tolerance};

fn main() -> discrete_holonomy::Result<()> {
    let tol = Tolerance::default();
    let seq = grassmann::random_sequence(5, 2, 4, 19)?;

    let ud = holonomy::direct_holonomy(&seq, tol)?.matrix_or_err()?.clone();
    for (label, v) in [("U_D", ud), ("random", grassmann::random_unitary(2, 4))] {
        let sim = interferometer::simulate_full(&seq, Protocol::Direct { arm_unitary: &v })?;
        let closed = interferometer::direct_intensities(&seq, &v)?;
        let err = sim.intensities.iter().zip(&closed.intensities).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("direct, V = {label:6}: simulated {:.12?}, closed form {:.12?}, max diff {err:.1e}", sim.intensities, closed.intensities);
    }

    let chain = interferometer::iterative_chain(&seq, tol)?;
    let mut accumulated = identity(2);
    for (step, (from, to)) in holonomy::link_pairs(seq.len(), holonomy::Closure::Closed).into_iter().enumerate() {
        let trial = &chain[step];
        let sim = interferometer::simulate_full(
            &seq,
            Protocol::IterativeStep { from, to, accumulated: &accumulated, trial },
        )?;
        let closed = interferometer::iterative_step_total_intensity(&accumulated, seq.frame(from), seq.frame(to), trial)?;
        println!("step {from}->{to}: simulated total {:.12}, closed form {closed:.12}", sim.total);
        accumulated = trial.clone();
    }
    Ok(())
}
