//! No arm unitary beats `U_D` in the direct interferometer, and each step of
//! the iterative chain is maximized by the accumulated relative phase.

use discrete_holonomy::grassmann;
use discrete_holonomy::holonomy;
use discrete_holonomy::interferometer;
use discrete_holonomy::matops::Tolerance;

fn main() -> discrete_holonomy::Result<()> {
    let tol = Tolerance::default();
    let seq = grassmann::random_sequence(6, 3, 4, 3)?;
    let report = interferometer::verify_maximality(&seq, 1000, 5, tol)?;
    println!("I_tot(U_D)            = {:.12}", report.direct_optimum);
    println!("best random trial     = {:.12} ({} trials)", report.direct_best_random, report.trials);
    println!("direct violations     = {}", report.direct_violations);
    println!("saturation residual   = {:.2e}", report.direct_saturation_residual);
    println!("step violations       = {}", report.step_violations);
    let worst = report.step_stationarity_residuals.iter().fold(0.0, |a: f64, &b| a.max(b));
    println!("stationarity residual = {worst:.2e} (worst step)");
    println!("min eigenvalues       = {:.4?}", report.step_min_eigenvalues);

    let ud = holonomy::direct_holonomy(&seq, tol)?.matrix_or_err()?.clone();
    let record = interferometer::direct_intensities(&seq, &ud)?;
    println!("I_k at U_D            = {:.6?}", record.intensities);
    Ok(())
}
