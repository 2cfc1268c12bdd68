//! Executable a-priori estimates.
//!
//! [`verify`] evaluates ten inequalities and identities that every solution
//! of the reduced equation satisfies, and reports each with its margin.
//! Norms are taken with respect to the normalized measure `dV / volume`, so
//! on the unit box they are the plain torus norms and on an enlarged periodic
//! cell they agree with the norms of the base problem.
//!
//! | check | statement |
//! |-------|-----------|
//! | a | `sup|u_x| ≤ L_x` (gradient bound along the x circle) |
//! | b | `min u_xx > −1` |
//! | c | `min(u_yy + u_tt + u_t) > −1` |
//! | d | `min(Δu + u_t + 2) ≥ 2 min e^{F/2}` |
//! | e | `‖u‖_{L²} ≤ sup|1 + e^F|` |
//! | f | `‖∇u‖² ≤ ¼‖u‖² + (5/2) sup|1 + e^F| ‖u‖` |
//! | g | `(2π/L_max)² ‖u‖² ≤ ‖∇u‖²` (first eigenvalue of `−Δ`) |
//! | h | `∫ u u_t = 0` |
//! | i | `inf Λ(u) > 0` |
//! | j | `mean(residual) = 0` |

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{random_band_limited, Axis, ScalarField};
use crate::pde::{self, Jet};
use crate::solver::{self, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `lhs ≤ rhs`
    AtMost,
    /// `lhs ≥ rhs`
    AtLeast,
    /// `lhs > rhs`, no tolerance
    Exceeds,
    /// `lhs = rhs`
    Equals,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Exceeds => ">",
            Relation::Equals => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateCheck {
    pub id: char,
    pub name: &'static str,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl EstimateCheck {
    fn new(id: char, name: &'static str, relation: Relation, lhs: f64, rhs: f64) -> Self {
        let tol = 1e-8 * (1.0 + rhs.abs());
        let (margin, pass) = match relation {
            Relation::AtMost => (rhs - lhs, rhs - lhs >= -tol),
            Relation::AtLeast => (lhs - rhs, lhs - rhs >= -tol),
            Relation::Exceeds => (lhs - rhs, lhs - rhs > 0.0),
            Relation::Equals => (-(lhs - rhs).abs(), (lhs - rhs).abs() <= tol),
        };
        EstimateCheck {
            id,
            name,
            relation,
            lhs,
            rhs,
            margin,
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub checks: Vec<EstimateCheck>,
    /// Set when the field fails the solution test; the checks are then
    /// informative only.
    pub informative: bool,
    pub residual_sup: f64,
    /// Recorded without a threshold.
    pub sup_u: f64,
    /// Recorded without a threshold.
    pub sup_laplacian: f64,
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, id: char) -> &EstimateCheck {
        self.checks
            .iter()
            .find(|c| c.id == id)
            .unwrap_or_else(|| panic!("no check ({id})"))
    }

    pub fn failures(&self) -> Vec<&EstimateCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

pub fn verify(u: &ScalarField, f: &ScalarField) -> Result<EstimateReport> {
    u.ensure_same_grid(f)?;
    let grid = *u.grid();
    let jet = Jet::of(u);
    let [ux, uy, ut] = u.gradient();
    let residual = pde::residual(u, f)?;

    let mean = |v: &ScalarField| v.mean();
    let l2 = mean(&(u * u)).sqrt();
    let grad2 = mean(&(&ux * &ux)) + mean(&(&uy * &uy)) + mean(&(&ut * &ut));
    let one_plus = f.map(|v| 1.0 + v.exp()).sup_norm();
    let lx = grid.period(Axis::X);
    let l_max = grid.periods().into_iter().fold(0.0, f64::max);
    let (lambda, _) = pde::lambda_field(u, f)?;
    let yy_tt_t = &(&jet.yy + &jet.tt) + &jet.t;
    let min_exp_half = f.map(|v| (0.5 * v).exp()).min();
    let lap = u.laplacian();

    let checks = vec![
        EstimateCheck::new('a', "sup|u_x| <= L_x", Relation::AtMost, ux.sup_norm(), lx),
        EstimateCheck::new('b', "min u_xx > -1", Relation::Exceeds, jet.xx.min(), -1.0),
        EstimateCheck::new('c', "min(u_yy+u_tt+u_t) > -1", Relation::Exceeds, yy_tt_t.min(), -1.0),
        EstimateCheck::new(
            'd',
            "min(lap u+u_t+2) >= 2 min e^(F/2)",
            Relation::AtLeast,
            jet.trace().min(),
            2.0 * min_exp_half,
        ),
        EstimateCheck::new('e', "|u|_L2 <= sup|1+e^F|", Relation::AtMost, l2, one_plus),
        EstimateCheck::new(
            'f',
            "|grad u|^2_L2 <= |u|^2_L2/4 + (5/2) sup|1+e^F| |u|_L2",
            Relation::AtMost,
            grad2,
            0.25 * l2 * l2 + 2.5 * one_plus * l2,
        ),
        EstimateCheck::new(
            'g',
            "(2 pi/L_max)^2 |u|^2_L2 <= |grad u|^2_L2",
            Relation::AtMost,
            (2.0 * PI / l_max).powi(2) * l2 * l2,
            grad2,
        ),
        EstimateCheck::new('h', "integral u u_t = 0", Relation::Equals, mean(&(u * &ut)), 0.0),
        EstimateCheck::new('i', "inf Lambda(u) > 0", Relation::Exceeds, lambda.min(), 0.0),
        EstimateCheck::new('j', "mean(residual) = 0", Relation::Equals, residual.mean(), 0.0),
    ];

    let residual_sup = residual.sup_norm();
    Ok(EstimateReport {
        checks,
        informative: residual_sup > pde::solution_threshold(f),
        residual_sup,
        sup_u: u.sup_norm(),
        sup_laplacian: lap.sup_norm(),
    })
}

#[derive(Clone, Debug)]
pub struct UniquenessProbe {
    pub max_pairwise_sup_diff: f64,
    pub solutions: Vec<ScalarField>,
}

/// Solves from `trials` distinct starts: continuation from zero, then Newton
/// from the continuation solution plus seeded band-limited perturbations.
pub fn uniqueness_probe(f: &ScalarField, cfg: &SolverConfig, trials: usize) -> Result<UniquenessProbe> {
    if trials < 2 {
        return Err(Error::Precondition(format!(
            "uniqueness probe needs at least 2 trials, got {trials}"
        )));
    }
    let base = solver::solve(f, cfg)?;
    let mut solutions = vec![base.u.clone()];
    for k in 1..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + k as u64);
        let noise = random_band_limited(cfg.grid, 2, 1e-3 * k as f64, &mut rng);
        let guess = &base.u + &noise;
        solutions.push(solver::solve_from(f, cfg, &guess)?.u);
    }
    let mut worst: f64 = 0.0;
    for a in 0..solutions.len() {
        for b in a + 1..solutions.len() {
            worst = worst.max((&solutions[a] - &solutions[b]).sup_norm());
        }
    }
    Ok(UniquenessProbe {
        max_pairwise_sup_diff: worst,
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::pde::ma_lhs;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn flat_solution_margins() {
        let g = GridSpec::cube(8).unwrap();
        let z = ScalarField::zeros(g);
        let r = verify(&z, &z).unwrap();
        assert_eq!(r.checks.len(), 10);
        assert!(r.all_pass(), "{:?}", r.failures());
        assert!(!r.informative);
        assert_eq!(r.check('d').margin, 0.0);
        assert_eq!(r.check('e').margin, 2.0);
    }

    #[test]
    fn non_solution_is_informative() {
        let g = GridSpec::cube(16).unwrap();
        let u = ScalarField::sample(g, |x, _, _| (TWO_PI * x).sin() / TWO_PI).unwrap();
        let z = ScalarField::zeros(g);
        let r = verify(&u, &z).unwrap();
        assert!(r.informative);
        assert!(!r.check('b').pass);
        assert!(r.check('j').pass);
        assert!(r.check('h').pass);
        assert!(r.check('g').pass);
    }

    #[test]
    fn manufactured_solution_passes_everything() {
        let g = GridSpec::cube(16).unwrap();
        let u = ScalarField::sample(g, |x, y, t| {
            0.004 * (TWO_PI * (x + y)).sin() + 0.003 * (TWO_PI * y).cos() * (TWO_PI * (x - t)).sin()
        })
        .unwrap();
        let f = ma_lhs(&u).map(f64::ln);
        let r = verify(&u, &f).unwrap();
        assert!(!r.informative);
        assert!(r.all_pass(), "{:?}", r.failures());
        for c in &r.checks {
            if c.relation != Relation::Equals {
                assert!(c.margin > 0.0, "{c:?}");
            }
        }
    }

    #[test]
    fn strict_checks_have_no_tolerance() {
        let c = EstimateCheck::new('b', "x", Relation::Exceeds, -1.0, -1.0);
        assert!(!c.pass);
        let c = EstimateCheck::new('d', "x", Relation::AtLeast, 2.0 - 1e-9, 2.0);
        assert!(c.pass);
    }

    #[test]
    fn probe_needs_two_trials() {
        let cfg = SolverConfig::new(GridSpec::cube(8).unwrap());
        let z = ScalarField::zeros(cfg.grid);
        assert!(matches!(uniqueness_probe(&z, &cfg, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn probe_on_zero_datum() {
        let cfg = SolverConfig::new(GridSpec::cube(16).unwrap());
        let z = ScalarField::zeros(cfg.grid);
        let p = uniqueness_probe(&z, &cfg, 3).unwrap();
        assert_eq!(p.solutions.len(), 3);
        assert!(p.max_pairwise_sup_diff <= 1e-10);
    }
}
