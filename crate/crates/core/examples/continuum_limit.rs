//! Convergence of both discrete holonomies to `U_{0,1} · P exp ∫A` as a
//! smooth path is sampled more finely.
//!
//! Usage: `cargo run --example continuum_limit [path]` with a built-in path
//! name (default `coherent-open`).

use discrete_holonomy::continuum::{self, BuiltinPath, STANDARD_M};
use discrete_holonomy::matops::Tolerance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let which: BuiltinPath = std::env::args().nth(1).as_deref().unwrap_or("coherent-open").parse()?;
    let path = which.build()?;
    let study = continuum::convergence_study(&path, &STANDARD_M, Tolerance::default())?;
    println!(
        "{which}: N = {}, K = {}, endpoint overlap rank {}",
        path.ambient_dim(),
        path.rank(),
        study.reference.closing_rank
    );
    if let Some(exact) = which.analytic_holonomy() {
        println!("analytic holonomy {exact:.12}, reference {:.12}", study.reference.holonomy[(0, 0)]);
    }

    let (rd, ri) = (study.direct_ratios(), study.iterative_ratios());
    let show = |x: Option<f64>| x.map_or("     -".to_string(), |v| format!("{v:6.3}"));
    println!("{:>6} {:>11} {:>11} {:>6} {:>6}", "m", "dev U_D", "dev U_I", "r_D", "r_I");
    for (i, row) in study.rows.iter().enumerate() {
        let (a, b) = if i == 0 { (None, None) } else { (rd[i - 1], ri[i - 1]) };
        println!(
            "{:>6} {:>11.3e} {:>11.3e} {} {}",
            row.m,
            row.dev_direct.unwrap_or(f64::NAN),
            row.dev_iterative.unwrap_or(f64::NAN),
            show(a),
            show(b)
        );
    }
    Ok(())
}
