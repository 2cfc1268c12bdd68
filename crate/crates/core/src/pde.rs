//! The reduced Calabi-Yau operator on the base torus,
//!
//! ```text
//! (u_xx + 1)(u_yy + u_tt + u_t + 1) − u_xy² − u_xt² = e^F,
//! ```
//!
//! its continuity path, its linearization and the ellipticity diagnostics.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::spectral::Spectrum;

/// The second-order jet entering the operator, all computed from one transform.
#[derive(Clone, Debug)]
pub struct Jet {
    pub xx: ScalarField,
    pub yy: ScalarField,
    pub tt: ScalarField,
    pub t: ScalarField,
    pub xy: ScalarField,
    pub xt: ScalarField,
}

impl Jet {
    pub fn of(u: &ScalarField) -> Self {
        let s = Spectrum::of(u);
        Jet {
            xx: s.derivative([2, 0, 0]),
            yy: s.derivative([0, 2, 0]),
            tt: s.derivative([0, 0, 2]),
            t: s.derivative([0, 0, 1]),
            xy: s.derivative([1, 1, 0]),
            xt: s.derivative([1, 0, 1]),
        }
    }

    /// `u_xx + 1`
    pub fn q(&self) -> ScalarField {
        self.xx.map(|v| v + 1.0)
    }

    /// `u_yy + u_tt + u_t + 1`
    pub fn p(&self) -> ScalarField {
        let n = self.yy.values().len();
        let vals = (0..n)
            .map(|i| self.yy.values()[i] + self.tt.values()[i] + self.t.values()[i] + 1.0)
            .collect();
        ScalarField::from_raw(*self.yy.grid(), vals)
    }

    /// `Δu + u_t + 2 = P + Q`
    pub fn trace(&self) -> ScalarField {
        &self.p() + &self.q()
    }
}

pub fn ma_lhs(u: &ScalarField) -> ScalarField {
    ma_lhs_from_jet(&Jet::of(u))
}

pub(crate) fn ma_lhs_from_jet(jet: &Jet) -> ScalarField {
    let p = jet.p();
    let n = p.values().len();
    let vals = (0..n)
        .map(|i| {
            let q = jet.xx.values()[i] + 1.0;
            let r = jet.xy.values()[i];
            let s = jet.xt.values()[i];
            q * p.values()[i] - r * r - s * s
        })
        .collect();
    ScalarField::from_raw(*p.grid(), vals)
}

/// `ma_lhs(u) − e^F`.
pub fn residual(u: &ScalarField, f: &ScalarField) -> Result<ScalarField> {
    u.ensure_same_grid(f)?;
    ma_lhs(u).try_zip_with(f, |l, fv| l - fv.exp())
}

/// `F_τ = log(1 − τ + τ e^F)`.
pub fn continuity_datum(f: &ScalarField, tau: f64) -> Result<ScalarField> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange(tau));
    }
    if tau == 1.0 {
        return Ok(f.clone());
    }
    Ok(f.map(|v| (1.0 - tau + tau * v.exp()).ln()))
}

/// Pointwise threshold of the solution test, `1e−10·max(1, ‖e^F‖_∞)`.
pub fn solution_threshold(f: &ScalarField) -> f64 {
    1e-10 * f.max().exp().max(1.0)
}

/// Coefficients of the linearized operator
/// `Lw = P w_xx + Q (w_yy + w_tt) − 2R w_xy − 2S w_xt + Q w_t`.
#[derive(Clone, Debug)]
pub struct LinearizedCoeffs {
    pub p: ScalarField,
    pub q: ScalarField,
    pub r: ScalarField,
    pub s: ScalarField,
}

pub fn linearize(u: &ScalarField) -> LinearizedCoeffs {
    let jet = Jet::of(u);
    LinearizedCoeffs {
        p: jet.p(),
        q: jet.q(),
        r: jet.xy.clone(),
        s: jet.xt.clone(),
    }
}

pub fn apply_linearized(c: &LinearizedCoeffs, w: &ScalarField) -> Result<ScalarField> {
    w.ensure_same_grid(&c.p)?;
    Ok(c.apply(w))
}

impl LinearizedCoeffs {
    pub(crate) fn apply(&self, w: &ScalarField) -> ScalarField {
        let d = Jet::of(w);
        let n = w.values().len();
        let vals = (0..n)
            .map(|i| {
                let (p, q) = (self.p.values()[i], self.q.values()[i]);
                let (r, s) = (self.r.values()[i], self.s.values()[i]);
                p * d.xx.values()[i] + q * (d.yy.values()[i] + d.tt.values()[i])
                    - 2.0 * r * d.xy.values()[i]
                    - 2.0 * s * d.xt.values()[i]
                    + q * d.t.values()[i]
            })
            .collect();
        ScalarField::from_raw(*w.grid(), vals)
    }
}

/// Eigenvalue fields `(λ₋, u_xx + 1, λ₊)` of the principal symbol matrix
///
/// ```text
/// [ P  R  S ]
/// [ R  Q  0 ]
/// [ S  0  Q ]
/// ```
///
/// from its factored characteristic polynomial
/// `(λ − Q)(λ² − (P + Q)λ + PQ − R² − S²)`. Exact for any field.
pub fn symbol_eigenvalues(u: &ScalarField) -> [ScalarField; 3] {
    let c = linearize(u);
    let n = c.p.values().len();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for i in 0..n {
        let (p, q) = (c.p.values()[i], c.q.values()[i]);
        let (r, s) = (c.r.values()[i], c.s.values()[i]);
        let half_sum = 0.5 * (p + q);
        let disc = (0.25 * (p - q) * (p - q) + r * r + s * s).sqrt();
        lo.push(half_sum - disc);
        hi.push(half_sum + disc);
    }
    let grid = *u.grid();
    [
        ScalarField::from_raw(grid, lo),
        c.q,
        ScalarField::from_raw(grid, hi),
    ]
}

/// `Λ(u) = ½(Δu + u_t + 2 − √((Δu + u_t + 2)² − 4e^F))` with the root argument
/// clamped at zero. Also returns how many points needed the clamp.
pub fn lambda_field(u: &ScalarField, f: &ScalarField) -> Result<(ScalarField, usize)> {
    u.ensure_same_grid(f)?;
    Ok(lambda_from_trace(&Jet::of(u).trace(), f))
}

fn lambda_from_trace(trace: &ScalarField, f: &ScalarField) -> (ScalarField, usize) {
    let mut clamped = 0;
    let vals = trace
        .values()
        .iter()
        .zip(f.values())
        .map(|(&tr, &fv)| {
            let arg = tr * tr - 4.0 * fv.exp();
            if arg < 0.0 {
                clamped += 1;
            }
            0.5 * (tr - arg.max(0.0).sqrt())
        })
        .collect();
    (ScalarField::from_raw(*trace.grid(), vals), clamped)
}

/// Pointwise ellipticity diagnostics; never fails on iterates that are not solutions.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityReport {
    /// `min(u_xx + 1)`
    pub min_q: f64,
    /// `min(u_yy + u_tt + u_t + 1)`
    pub min_p: f64,
    /// `min(Δu + u_t + 2)`
    pub min_trace: f64,
    /// `inf Λ(u)` with the clamped root
    pub min_lambda: f64,
    /// smallest eigenvalue of the principal symbol, from the actual determinant
    pub min_symbol_eigenvalue: f64,
    /// `min(Δu + u_t + 2 − 2e^{F/2})`
    pub min_trace_margin: f64,
    /// points where `(Δu + u_t + 2)² < 4e^F` and the root was clamped
    pub clamped_points: usize,
    /// `u_xx > −1` everywhere
    pub q_positive: bool,
    /// `u_yy + u_tt + u_t > −1` everywhere
    pub p_positive: bool,
    /// `2e^{F/2} ≤ Δu + u_t + 2` everywhere, within `tolerance`
    pub trace_bound: bool,
    pub tolerance: f64,
}

impl EllipticityReport {
    pub fn all_ok(&self) -> bool {
        self.q_positive && self.p_positive && self.trace_bound && self.min_lambda > 0.0
    }
}

pub fn ellipticity_report(u: &ScalarField, f: &ScalarField) -> Result<EllipticityReport> {
    u.ensure_same_grid(f)?;
    let jet = Jet::of(u);
    let (p, q, trace) = (jet.p(), jet.q(), jet.trace());
    let (lambda, clamped_points) = lambda_from_trace(&trace, f);
    let margin = trace.try_zip_with(f, |tr, fv| tr - 2.0 * (0.5 * fv).exp())?;
    let [lo, _, _] = symbol_eigenvalues(u);
    let tolerance = solution_threshold(f);
    Ok(EllipticityReport {
        min_q: q.min(),
        min_p: p.min(),
        min_trace: trace.min(),
        min_lambda: lambda.min(),
        min_symbol_eigenvalue: lo.min(),
        min_trace_margin: margin.min(),
        clamped_points,
        q_positive: q.min() > 0.0,
        p_positive: p.min() > 0.0,
        trace_bound: margin.min() >= -tolerance,
        tolerance,
    })
}
