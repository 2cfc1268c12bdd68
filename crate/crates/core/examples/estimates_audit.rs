//! Audit every a-priori estimate on a computed solution, then on a non-solution.

use std::f64::consts::PI;

use ktcy::cli::renormalize;
use ktcy::{solve, verify, EstimateReport, GridSpec, ScalarField, SolverConfig};

fn print(title: &str, r: &EstimateReport) {
    println!("{title} (informative only: {})", r.informative);
    for c in &r.checks {
        println!(
            "  ({}) {:<55} {:>13.6e} {:>2} {:>13.6e}  margin {:>10.3e}  {}",
            c.id,
            c.name,
            c.lhs,
            c.relation.symbol(),
            c.rhs,
            c.margin,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    println!("  sup|u| = {:.4e}, sup|lap u| = {:.4e}", r.sup_u, r.sup_laplacian);
}

fn main() -> ktcy::Result<()> {
    let grid = GridSpec::cube(16)?;
    let f = renormalize(&ScalarField::sample(grid, |x, _, t| {
        0.8 * (2.0 * PI * x).sin() * (2.0 * PI * t).cos()
    })?);
    let report = solve(&f, &SolverConfig::new(grid))?;
    print("solution", &report.estimates);

    let not_a_solution = ScalarField::sample(grid, |x, _, _| (2.0 * PI * x).sin() / (2.0 * PI))?;
    print("sin(2 pi x)/2 pi with F = 0", &verify(&not_a_solution, &ScalarField::zeros(grid))?);
    Ok(())
}
