//! Method of manufactured solutions: pick u*, set F = log(LHS(u*)), solve, compare.

use std::f64::consts::PI;

use ktcy::cli::manufacture;
use ktcy::{solve, GridSpec, ScalarField, SolverConfig};

fn main() -> ktcy::Result<()> {
    let two_pi = 2.0 * PI;
    for n in [8, 16, 32] {
        let grid = GridSpec::cube(n)?;
        let u_star = ScalarField::sample(grid, |x, y, t| {
            0.0025 * (two_pi * x).sin() + 0.005 * (two_pi * y).cos() * (two_pi * t).sin()
        })?;
        let m = manufacture(&u_star)?;
        let report = solve(&m.f, &SolverConfig::new(grid))?;
        println!(
            "{n:>3}^3  |u - u*| = {:.3e}  newton = {:>2}  estimates pass = {}",
            (&report.u - &m.u_star).sup_norm(),
            report.trace.total_newton_iters(),
            report.estimates.all_pass()
        );
    }

    // too large an amplitude leaves the elliptic set
    let grid = GridSpec::cube(16)?;
    let big = ScalarField::sample(grid, |x, _, _| (two_pi * x).sin())?;
    match manufacture(&big) {
        Err(e) => println!("amplitude 1: {e}"),
        Ok(_) => println!("amplitude 1 unexpectedly accepted"),
    }
    Ok(())
}
