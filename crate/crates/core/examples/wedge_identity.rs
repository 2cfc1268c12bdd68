//! The perturbed symplectic form Ω + dα(u) reproduces the scalar equation.
//!
//! Compares (Ω + dα)² / Ω² with the left-hand side of the scalar equation and
//! checks J-invariance, closedness and the metric trace.

use ktcy::field::random_band_limited;
use ktcy::geometry::{alpha_from_u, check_j_invariance, exterior_d, metric_field, TwoForm};
use ktcy::pde::ma_lhs;
use ktcy::{Axis, GridSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ktcy::Result<()> {
    let grid = GridSpec::cube(16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:>4} {:>12} {:>12} {:>12} {:>12}", "seed", "ratio-lhs", "J defect", "|d form|", "trace err");
    for seed in 0..5 {
        let u = random_band_limited(grid, 3, 0.05, &mut rng);
        let form = TwoForm::omega(grid).add(&exterior_d(&alpha_from_u(&u)))?;
        let ratio = (&form.wedge_ratio() - &ma_lhs(&u)).sup_norm();
        let trace = (&u.laplacian() + &u.derivative(Axis::T, 1)).map(|v| 2.0 * (v + 2.0));
        let trace_err = (&metric_field(&u).trace() - &trace).sup_norm();
        println!(
            "{seed:>4} {ratio:>12.2e} {:>12.2e} {:>12.2e} {trace_err:>12.2e}",
            check_j_invariance(&form),
            form.exterior_d().sup_norm()
        );
    }
    Ok(())
}
