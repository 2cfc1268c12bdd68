//! Write the file formats: field dump, csv slice, two-form directory and a text report.
//!
//! ```text
//! cargo run --example export_slice -- /tmp/ktcy-export
//! ```

use std::f64::consts::PI;
use std::path::PathBuf;

use ktcy::cli::{csv_slice, renormalize, RunReport};
use ktcy::geometry::{alpha_from_u, exterior_d, TwoForm};
use ktcy::{solve, GridSpec, ScalarField, SolverConfig};

fn main() -> ktcy::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ktcy-export"));
    std::fs::create_dir_all(&dir).map_err(|e| ktcy::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let grid = GridSpec::new([16, 16, 8], [1.0, 1.0, 1.0])?;
    let f = renormalize(&ScalarField::sample(grid, |x, y, _| 0.5 * (2.0 * PI * (x - y)).cos())?);
    let report = solve(&f, &SolverConfig::new(grid))?;

    report.u.write_dump(dir.join("solution.field"))?;
    std::fs::write(dir.join("solution.slice_t0.csv"), csv_slice(&report.u, 0)?).map_err(|e| ktcy::Error::Io {
        path: dir.join("solution.slice_t0.csv"),
        source: e,
    })?;
    let form = TwoForm::omega(grid).add(&exterior_d(&alpha_from_u(&report.u)))?;
    form.write_dir(dir.join("omega_u"))?;

    let mut r = RunReport::new();
    r.add_grid("grid", &grid);
    r.push("converged", report.converged);
    r.add_trace(&report.trace);
    r.add_ellipticity(&report.ellipticity);
    r.add_estimates(&report.estimates);
    r.add_field_summary("solution", &report.u);
    r.write(dir.join("report.txt"))?;

    let back = ScalarField::read_dump(dir.join("solution.field"))?;
    assert_eq!(back, report.u);
    println!("wrote field dump, csv slice, two-form and report to {}", dir.display());
    Ok(())
}
