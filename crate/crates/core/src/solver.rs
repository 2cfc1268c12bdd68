//! Continuity method in `τ` along `F_τ = log(1 − τ + τe^F)`, with a damped
//! Newton iteration at each accepted `τ`.
//!
//! Each Newton correction solves `Lw = −residual` on mean-zero fields by
//! GMRES, right-preconditioned with the constant-coefficient operator
//! `P̄ w_xx + Q̄ (w_yy + w_tt + w_t)` inverted mode by mode.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::estimates::{self, EstimateReport};
use crate::field::{GridSpec, ScalarField};
use crate::krylov::{gmres, GmresConfig};
use crate::pde::{self, EllipticityReport, Jet, LinearizedCoeffs};
use crate::spectral::{derivative_symbol, fft3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Damping {
    pub enabled: bool,
    /// Step shrink factor per backtrack, in `(0, 1)`.
    pub factor: f64,
    pub max_backtracks: usize,
}

impl Default for Damping {
    fn default() -> Self {
        Damping {
            enabled: true,
            factor: 0.5,
            max_backtracks: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub grid: GridSpec,
    /// Sup-norm residual target.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Relative residual target of each linear solve.
    pub krylov_tol: f64,
    pub krylov_max_iters: usize,
    pub krylov_restart: usize,
    pub tau_initial_step: f64,
    pub tau_min_step: f64,
    pub damping: Damping,
}

impl SolverConfig {
    pub fn new(grid: GridSpec) -> Self {
        SolverConfig {
            grid,
            newton_tol: 1e-10,
            newton_max_iters: 20,
            krylov_tol: 1e-10,
            krylov_max_iters: 400,
            krylov_restart: 40,
            tau_initial_step: 0.25,
            tau_min_step: 1e-4,
            damping: Damping::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("krylov_tol", self.krylov_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("tau_initial_step", self.tau_initial_step),
            ("tau_min_step", self.tau_min_step),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if self.tau_min_step > self.tau_initial_step {
            return Err(Error::Config("tau_min_step exceeds tau_initial_step".into()));
        }
        if self.newton_max_iters == 0 || self.krylov_max_iters == 0 || self.krylov_restart == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        if !(self.damping.factor > 0.0 && self.damping.factor < 1.0) {
            return Err(Error::Config(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.damping.factor
            )));
        }
        Ok(())
    }

    fn gmres(&self) -> GmresConfig {
        GmresConfig {
            tol: self.krylov_tol,
            max_iters: self.krylov_max_iters,
            restart: self.krylov_restart,
        }
    }
}

/// One continuation attempt.
#[derive(Clone, Debug, PartialEq)]
pub struct TauRecord {
    pub tau: f64,
    pub newton_iters: usize,
    pub krylov_iters: usize,
    pub final_residual_sup: f64,
    pub lambda_min: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContinuationTrace {
    pub records: Vec<TauRecord>,
}

impl ContinuationTrace {
    pub fn accepted(&self) -> impl Iterator<Item = &TauRecord> {
        self.records.iter().filter(|r| r.accepted)
    }

    pub fn total_newton_iters(&self) -> usize {
        self.records.iter().map(|r| r.newton_iters).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Mean-zero solution.
    pub u: ScalarField,
    pub trace: ContinuationTrace,
    pub residual_sup: f64,
    pub ellipticity: EllipticityReport,
    pub estimates: EstimateReport,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct NewtonStep {
    pub u_next: ScalarField,
    pub krylov_iters: usize,
    /// Sup norm of the accepted update `s·w`.
    pub step_norm: f64,
    /// Accepted step length `s`.
    pub step_length: f64,
    pub residual_sup: f64,
}

/// Exact inverse of `P̄ ∂_xx + Q̄ (∂_yy + ∂_tt + ∂_t)` on mean-zero fields.
pub struct FourierPreconditioner {
    grid: GridSpec,
    inverse_symbol: Vec<Complex64>,
}

impl FourierPreconditioner {
    pub fn new(grid: GridSpec, p_bar: f64, q_bar: f64) -> Self {
        let (nx, ny, nt) = grid.shape();
        let [lx, ly, lt] = grid.periods();
        let sxx: Vec<_> = (0..nx).map(|k| derivative_symbol(k, nx, lx, 2)).collect();
        let syy: Vec<_> = (0..ny).map(|k| derivative_symbol(k, ny, ly, 2)).collect();
        let stt: Vec<_> = (0..nt).map(|k| derivative_symbol(k, nt, lt, 2)).collect();
        let st: Vec<_> = (0..nt).map(|k| derivative_symbol(k, nt, lt, 1)).collect();
        let mut inverse_symbol = Vec::with_capacity(grid.len());
        for k in 0..nt {
            for j in 0..ny {
                for i in 0..nx {
                    let m = sxx[i] * p_bar + (syy[j] + stt[k] + st[k]) * q_bar;
                    inverse_symbol.push(if i == 0 && j == 0 && k == 0 {
                        Complex64::default()
                    } else {
                        1.0 / m
                    });
                }
            }
        }
        FourierPreconditioner {
            grid,
            inverse_symbol,
        }
    }

    /// Preconditioner built from the grid means of the linearization coefficients.
    pub fn for_coeffs(c: &LinearizedCoeffs) -> Self {
        Self::new(*c.p.grid(), c.p.mean(), c.q.mean())
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = r.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft3(&self.grid, &mut buf, FftDirection::Forward);
        for (b, m) in buf.iter_mut().zip(&self.inverse_symbol) {
            *b *= m;
        }
        fft3(&self.grid, &mut buf, FftDirection::Inverse);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

fn project_mean_zero(v: &mut [f64]) {
    let m = crate::field::compensated_sum(v.iter().copied()) / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn elliptic(u: &ScalarField) -> (bool, f64, f64) {
    let jet = Jet::of(u);
    let (min_p, min_q) = (jet.p().min(), jet.q().min());
    (min_p > 0.0 && min_q > 0.0, min_p, min_q)
}

/// One damped Newton correction for `ma_lhs(u) = e^F`.
pub fn newton_step(u: &ScalarField, f_target: &ScalarField, cfg: &SolverConfig) -> Result<NewtonStep> {
    u.ensure_same_grid(f_target)?;
    let (ok, min_p, min_q) = elliptic(u);
    if !ok {
        return Err(Error::EllipticityLost { min_p, min_q });
    }
    let r = pde::residual(u, f_target)?;
    let r0 = r.sup_norm();
    let mut rhs: Vec<f64> = r.values().iter().map(|v| -v).collect();
    project_mean_zero(&mut rhs);
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(NewtonStep {
            u_next: u.clone(),
            krylov_iters: 0,
            step_norm: 0.0,
            step_length: 1.0,
            residual_sup: r0,
        });
    }

    let coeffs = pde::linearize(u);
    let pc = FourierPreconditioner::for_coeffs(&coeffs);
    let grid = *u.grid();
    let apply = |x: &[f64]| {
        let w = ScalarField::from_raw(grid, x.to_vec());
        let mut out = coeffs.apply(&w).into_values();
        project_mean_zero(&mut out);
        out
    };
    let lin = gmres(apply, |x| pc.apply(x), &rhs, &cfg.gmres());
    if !lin.converged {
        return Err(Error::KrylovStalled {
            iterations: lin.iterations,
            relative_residual: lin.relative_residual,
        });
    }
    let mut w = lin.x;
    project_mean_zero(&mut w);
    let w = ScalarField::from_raw(grid, w);

    let mut s = 1.0;
    let attempts = if cfg.damping.enabled {
        cfg.damping.max_backtracks + 1
    } else {
        1
    };
    let mut best = r0;
    for _ in 0..attempts {
        let candidate = u.axpy(s, &w).project_mean_zero();
        let rc = pde::residual(&candidate, f_target)?.sup_norm();
        best = best.min(rc);
        if !cfg.damping.enabled || (rc < r0 && elliptic(&candidate).0) {
            return Ok(NewtonStep {
                u_next: candidate,
                krylov_iters: lin.iterations,
                step_norm: s * w.sup_norm(),
                step_length: s,
                residual_sup: rc,
            });
        }
        s *= cfg.damping.factor;
    }
    Err(Error::LineSearchFailed { residual: best })
}

struct NewtonOutcome {
    u: ScalarField,
    iters: usize,
    krylov_iters: usize,
    residual: f64,
}

fn newton(u0: &ScalarField, f: &ScalarField, cfg: &SolverConfig) -> Result<NewtonOutcome> {
    let mut u = u0.clone();
    let mut residual = pde::residual(&u, f)?.sup_norm();
    let mut krylov_iters = 0;
    for iters in 0..=cfg.newton_max_iters {
        if residual <= cfg.newton_tol {
            return Ok(NewtonOutcome {
                u,
                iters,
                krylov_iters,
                residual,
            });
        }
        if iters == cfg.newton_max_iters {
            break;
        }
        let step = newton_step(&u, f, cfg)?;
        krylov_iters += step.krylov_iters;
        if step.step_norm == 0.0 {
            // nothing left to correct; the residual is a pure mean offset
            break;
        }
        u = step.u_next;
        residual = step.residual_sup;
    }
    Err(Error::NewtonNotConverged {
        iterations: cfg.newton_max_iters,
        residual,
    })
}

/// Checks `∫e^F dV = volume` to `1e−10` relative.
pub fn check_normalization(f: &ScalarField) -> Result<()> {
    let integral = f.map(f64::exp).integrate();
    let volume = f.grid().volume();
    if (integral - volume).abs() > 1e-10 * volume {
        return Err(Error::Normalization { integral, volume });
    }
    Ok(())
}

fn finish(u: ScalarField, f: &ScalarField, trace: ContinuationTrace, cfg: &SolverConfig) -> Result<SolveReport> {
    let residual_sup = pde::residual(&u, f)?.sup_norm();
    let ellipticity = pde::ellipticity_report(&u, f)?;
    let estimates = estimates::verify(&u, f)?;
    Ok(SolveReport {
        converged: residual_sup <= cfg.newton_tol && u.mean().abs() < 1e-14,
        u,
        trace,
        residual_sup,
        ellipticity,
        estimates,
    })
}

/// Continuation from `u = 0` at `τ = 0` to the target datum at `τ = 1`.
pub fn solve(f: &ScalarField, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if f.grid() != &cfg.grid {
        return Err(Error::GridMismatch);
    }
    check_normalization(f)?;

    let mut trace = ContinuationTrace::default();
    let mut u = ScalarField::zeros(cfg.grid);
    let mut previous: Option<(f64, ScalarField)> = None;
    let mut tau = 0.0;
    let mut step = cfg.tau_initial_step;
    trace.records.push(TauRecord {
        tau,
        newton_iters: 0,
        krylov_iters: 0,
        final_residual_sup: 0.0,
        lambda_min: 1.0,
        accepted: true,
    });

    while tau < 1.0 {
        let at_end = pde::residual(&u, f)?.sup_norm();
        if at_end <= cfg.newton_tol {
            trace.records.push(TauRecord {
                tau: 1.0,
                newton_iters: 0,
                krylov_iters: 0,
                final_residual_sup: at_end,
                lambda_min: pde::ellipticity_report(&u, f)?.min_lambda,
                accepted: true,
            });
            break;
        }

        let target = (tau + step).min(1.0);
        let f_target = pde::continuity_datum(f, target)?;
        // secant predictor along the path, kept only if it stays elliptic
        let guess = match &previous {
            Some((tau_prev, u_prev)) => {
                let ratio = (target - tau) / (tau - tau_prev);
                let g = u.axpy(ratio, &(&u - u_prev));
                if elliptic(&g).0 {
                    g
                } else {
                    u.clone()
                }
            }
            None => u.clone(),
        };
        match newton(&guess, &f_target, cfg) {
            Ok(out) => {
                let lambda_min = pde::ellipticity_report(&out.u, &f_target)?.min_lambda;
                trace.records.push(TauRecord {
                    tau: target,
                    newton_iters: out.iters,
                    krylov_iters: out.krylov_iters,
                    final_residual_sup: out.residual,
                    lambda_min,
                    accepted: true,
                });
                previous = Some((tau, std::mem::replace(&mut u, out.u)));
                tau = target;
                if out.iters <= 3 {
                    step = (2.0 * step).min(1.0);
                }
            }
            Err(e) => {
                let residual = match e {
                    Error::NewtonNotConverged { residual, .. } | Error::LineSearchFailed { residual } => residual,
                    _ => f64::NAN,
                };
                trace.records.push(TauRecord {
                    tau: target,
                    newton_iters: 0,
                    krylov_iters: 0,
                    final_residual_sup: residual,
                    lambda_min: f64::NAN,
                    accepted: false,
                });
                step *= 0.5;
                if step < cfg.tau_min_step {
                    return Err(Error::ContinuationStalled { tau, step });
                }
            }
        }
    }

    finish(u, f, trace, cfg)
}

/// Newton directly at `τ = 1` from a warm start (projected to mean zero).
pub fn solve_from(f: &ScalarField, cfg: &SolverConfig, guess: &ScalarField) -> Result<SolveReport> {
    cfg.validate()?;
    if f.grid() != &cfg.grid || guess.grid() != &cfg.grid {
        return Err(Error::GridMismatch);
    }
    check_normalization(f)?;
    let out = newton(&guess.project_mean_zero(), f, cfg)?;
    let lambda_min = pde::ellipticity_report(&out.u, f)?.min_lambda;
    let trace = ContinuationTrace {
        records: vec![TauRecord {
            tau: 1.0,
            newton_iters: out.iters,
            krylov_iters: out.krylov_iters,
            final_residual_sup: out.residual,
            lambda_min,
            accepted: true,
        }],
    };
    finish(out.u, f, trace, cfg)
}
