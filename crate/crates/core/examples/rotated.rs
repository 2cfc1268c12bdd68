//! Rotated symplectic forms: solve on the periodic cell for several rational angles.

use std::f64::consts::PI;

use ktcy::cli::renormalize;
use ktcy::{solve_rotated, GridSpec, RationalAngle, ScalarField, SolverConfig};

fn main() -> ktcy::Result<()> {
    let grid = GridSpec::cube(12)?;
    let f = renormalize(&ScalarField::sample(grid, |x, y, t| {
        0.3 * (2.0 * PI * x).sin() * (2.0 * PI * t).cos() + 0.2 * (2.0 * PI * (x + y)).cos()
    })?);
    let cfg = SolverConfig::new(grid);
    println!("{:>6} {:>8} {:>11} {:>12} {:>10} {:>10}", "(m,n)", "L", "cell", "int e^G", "sup|v_p|", "residual");
    for (m, n) in [(1, 0), (0, 1), (1, 1), (2, 1), (1, -2)] {
        let angle = RationalAngle::new(m, n)?;
        let r = solve_rotated(&f, angle, &cfg)?;
        let [np, nq, nt] = r.cell_grid.sample_counts();
        println!(
            "{:>6} {:>8.5} {:>11} {:>12.9} {:>10.4e} {:>10.2e}",
            format!("({m},{n})"),
            r.period,
            format!("{np}x{nq}x{nt}"),
            r.cell_normalization,
            r.sup_vp,
            r.report.residual_sup
        );
        assert!(r.vp_bound_ok);
    }
    Ok(())
}
