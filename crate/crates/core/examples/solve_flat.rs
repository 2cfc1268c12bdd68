//! Solve the reduced equation for a smooth datum and print the continuation trace.
//!
//! ```text
//! cargo run --example solve_flat
//! ```

use std::f64::consts::PI;

use ktcy::cli::renormalize;
use ktcy::{solve, GridSpec, ScalarField, SolverConfig};

fn main() -> ktcy::Result<()> {
    let grid = GridSpec::cube(16)?;
    let raw = ScalarField::sample(grid, |x, y, t| {
        0.3 * (2.0 * PI * x).sin() * (2.0 * PI * y).sin() * (2.0 * PI * t).sin()
    })?;
    let f = renormalize(&raw);

    let report = solve(&f, &SolverConfig::new(grid))?;
    println!("{:>10} {:>7} {:>7} {:>12} {:>10}", "tau", "newton", "krylov", "residual", "accepted");
    for r in &report.trace.records {
        println!(
            "{:>10.6} {:>7} {:>7} {:>12.3e} {:>10}",
            r.tau, r.newton_iters, r.krylov_iters, r.final_residual_sup, r.accepted
        );
    }
    println!("converged: {}", report.converged);
    println!("sup|u| = {:.6e}, residual = {:.3e}", report.u.sup_norm(), report.residual_sup);
    println!("min Lambda = {:.6}", report.ellipticity.min_lambda);
    Ok(())
}
