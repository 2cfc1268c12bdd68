//! Spectral convergence: solve one datum on refining grids and compare on the finest.
//!
//! Coarse grids can fail outright: the product terms alias into the Nyquist
//! modes, and the discrete problem then has no exact solution.

use std::f64::consts::PI;

use ktcy::cli::renormalize;
use ktcy::{solve, GridSpec, ScalarField, SolverConfig};

fn datum(g: GridSpec) -> ktcy::Result<ScalarField> {
    Ok(renormalize(&ScalarField::sample(g, |x, y, t| {
        (1.0 + 0.6 * (2.0 * PI * x).sin() * (2.0 * PI * (y - t)).cos()).ln()
    })?))
}

fn main() -> ktcy::Result<()> {
    let finest = GridSpec::cube(48)?;
    let reference = solve(&datum(finest)?, &SolverConfig::new(finest))?.u;
    for n in [8, 12, 16, 20, 24, 32] {
        let g = GridSpec::cube(n)?;
        match solve(&datum(g)?, &SolverConfig::new(g)) {
            Ok(r) => {
                let err = (&r.u.resample(finest)? - &reference).sup_norm();
                println!("{n:>3}^3  sup|u - u_48| = {err:.3e}");
            }
            Err(e) => println!("{n:>3}^3  no discrete solution reached: {e}"),
        }
    }
    Ok(())
}
