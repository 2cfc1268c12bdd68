//! Periodic scalar fields on a box torus.
//!
//! Samples live on the uniform grid `(i·L_x/n_x, j·L_y/n_y, k·L_t/n_t)` and are
//! stored x-fastest, then y, then t: `values[i + n_x·(j + n_y·k)]`.
//!
//! Axis naming: the coframe derivatives are `∂₁ = ∂_y`, `∂₂ = ∂_x`, `∂₃ = ∂_t`;
//! this module only ever speaks of x, y and t.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::spectral::{self, is_nyquist, signed_index, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    T,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::T];

    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::T => 2,
        }
    }
}

/// Uniform periodic grid on the box `[0,L_x) × [0,L_y) × [0,L_t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    samples: [usize; 3],
    periods: [f64; 3],
}

impl GridSpec {
    pub fn new(samples: [usize; 3], periods: [f64; 3]) -> Result<Self> {
        for (n, axis) in samples.iter().zip(["x", "y", "t"]) {
            if *n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{axis} sample count {n} must be even and at least 4"
                )));
            }
        }
        for (l, axis) in periods.iter().zip(["x", "y", "t"]) {
            if !(l.is_finite() && *l > 0.0) {
                return Err(Error::InvalidGrid(format!("{axis} period {l} must be positive")));
            }
        }
        Ok(GridSpec { samples, periods })
    }

    /// `n × n × n` samples on the unit box.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new([n; 3], [1.0; 3])
    }

    pub fn unit(samples: [usize; 3]) -> Result<Self> {
        Self::new(samples, [1.0; 3])
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.samples[0], self.samples[1], self.samples[2])
    }

    pub fn samples(&self, axis: Axis) -> usize {
        self.samples[axis.index()]
    }

    pub fn period(&self, axis: Axis) -> f64 {
        self.periods[axis.index()]
    }

    pub fn periods(&self) -> [f64; 3] {
        self.periods
    }

    pub fn sample_counts(&self) -> [usize; 3] {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        self.period(axis) / self.samples(axis) as f64
    }

    pub fn is_unit_box(&self) -> bool {
        self.periods == [1.0; 3]
    }

    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.samples[0] * (j + self.samples[1] * k)
    }

    pub fn grid_index(&self, linear: usize) -> (usize, usize, usize) {
        let (nx, ny, _) = self.shape();
        (linear % nx, (linear / nx) % ny, linear / (nx * ny))
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> (f64, f64, f64) {
        (
            i as f64 * self.spacing(Axis::X),
            j as f64 * self.spacing(Axis::Y),
            k as f64 * self.spacing(Axis::T),
        )
    }

    /// Same box, different sample counts.
    pub fn with_samples(&self, samples: [usize; 3]) -> Result<Self> {
        Self::new(samples, self.periods)
    }

    /// The header line of the field dump format.
    pub fn header(&self) -> String {
        format!(
            "{} {} {} {:.16e} {:.16e} {:.16e}",
            self.samples[0],
            self.samples[1],
            self.samples[2],
            self.periods[0],
            self.periods[1],
            self.periods[2]
        )
    }
}

/// Sup, L² and gradient norms of a field (L² taken with respect to `dV`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub sup: f64,
    pub l2: f64,
    pub grad_sup: f64,
    pub grad_l2: f64,
}

/// Neumaier summation; quadrature sums stay accurate to a few ulps.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Real samples of a periodic function on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            let (i, j, k) = grid.grid_index(bad);
            return Err(Error::NonFinite(i, j, k));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every grid point; rejects non-finite samples.
    pub fn sample(grid: GridSpec, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        let (nx, ny, nt) = grid.shape();
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..nt {
            for j in 0..ny {
                for i in 0..nx {
                    let (x, y, t) = grid.point(i, j, k);
                    let v = f(x, y, t);
                    if !v.is_finite() {
                        return Err(Error::NonFinite(i, j, k));
                    }
                    values.push(v);
                }
            }
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.linear_index(i, j, k)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn try_zip_with(
        &self,
        other: &ScalarField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<ScalarField> {
        self.ensure_same_grid(other)?;
        Ok(self.zip_with(other, f))
    }

    fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn ensure_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|v| s * v)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a + s * b)
    }

    /// Spectral derivative of the given order (1 or 2) along one axis.
    pub fn derivative(&self, axis: Axis, order: u8) -> ScalarField {
        assert!(order == 1 || order == 2, "derivative order must be 1 or 2");
        let mut orders = [0u8; 3];
        orders[axis.index()] = order;
        Spectrum::of(self).derivative(orders)
    }

    /// Mixed spectral derivative with per-axis orders `[x, y, t]`.
    pub fn mixed_derivative(&self, orders: [u8; 3]) -> ScalarField {
        Spectrum::of(self).derivative(orders)
    }

    pub fn gradient(&self) -> [ScalarField; 3] {
        let s = Spectrum::of(self);
        [
            s.derivative([1, 0, 0]),
            s.derivative([0, 1, 0]),
            s.derivative([0, 0, 1]),
        ]
    }

    /// `u_xx + u_yy + u_tt`.
    pub fn laplacian(&self) -> ScalarField {
        let s = Spectrum::of(self);
        let [tx, ty, tt] = [
            spectral::symbol_tables(&self.grid, [2, 0, 0]),
            spectral::symbol_tables(&self.grid, [0, 2, 0]),
            spectral::symbol_tables(&self.grid, [0, 0, 2]),
        ];
        s.map_symbol(|i, j, k| tx[0][i] + ty[1][j] + tt[2][k])
    }

    /// Periodic trapezoid rule, `∫ u dV`.
    pub fn integrate(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) * self.grid.volume() / self.grid.len() as f64
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.grid.len() as f64
    }

    /// `∫ u·v dV`.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let s = compensated_sum(self.values.iter().zip(&other.values).map(|(a, b)| a * b));
        s * self.grid.volume() / self.grid.len() as f64
    }

    pub fn project_mean_zero(&self) -> ScalarField {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Location and value of the minimum.
    pub fn argmin(&self) -> ((usize, usize, usize), f64) {
        let (idx, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        (self.grid.grid_index(idx), v)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn norms(&self) -> Norms {
        let [ux, uy, ut] = self.gradient();
        let grad2: Vec<f64> = (0..self.grid.len())
            .map(|n| ux.values[n].powi(2) + uy.values[n].powi(2) + ut.values[n].powi(2))
            .collect();
        let w = self.grid.volume() / self.grid.len() as f64;
        Norms {
            sup: self.sup_norm(),
            l2: self.l2_norm(),
            grad_sup: grad2.iter().fold(0.0f64, |a, &g| a.max(g)).sqrt(),
            grad_l2: (grad2.iter().sum::<f64>() * w).sqrt(),
        }
    }

    /// Band-limited interpolation onto a grid on the same box.
    ///
    /// Exact for trigonometric polynomials resolved by both grids; the
    /// source Nyquist mode is split evenly between `±n/2` on a finer axis.
    pub fn resample(&self, target: GridSpec) -> Result<ScalarField> {
        if target.periods() != self.grid.periods() {
            return Err(Error::GridMismatch);
        }
        let src = self.grid.sample_counts();
        let dst = target.sample_counts();
        if dst.iter().zip(&src).any(|(d, s)| d < s) {
            return Err(Error::InvalidGrid(
                "resampling only refines; target grid is coarser".into(),
            ));
        }
        let spec = Spectrum::of(self);
        let targets = |axis: usize, k: usize| -> Vec<(usize, f64)> {
            let (n, m) = (src[axis], dst[axis]);
            if is_nyquist(k, n) && m > n {
                vec![(n / 2, 0.5), (m - n / 2, 0.5)]
            } else {
                let kk = signed_index(k, n);
                vec![(kk.rem_euclid(m as i64) as usize, 1.0)]
            }
        };
        let mut out = vec![Complex64::default(); target.len()];
        let scale = target.len() as f64 / self.grid.len() as f64;
        for k in 0..src[2] {
            let tk = targets(2, k);
            for j in 0..src[1] {
                let tj = targets(1, j);
                for i in 0..src[0] {
                    let c = spec.coeffs()[self.grid.linear_index(i, j, k)] * scale;
                    for &(ii, wi) in &targets(0, i) {
                        for &(jj, wj) in &tj {
                            for &(kk, wk) in &tk {
                                out[target.linear_index(ii, jj, kk)] += c * (wi * wj * wk);
                            }
                        }
                    }
                }
            }
        }
        Ok(Spectrum::from_coeffs(target, out).to_field())
    }

    /// Writes the field dump: header line `nx ny nt Lx Ly Lt`, then one value
    /// per line in storage order with 17 significant digits.
    pub fn to_dump_string(&self) -> String {
        let mut s = String::with_capacity(25 * self.values.len() + 80);
        s.push_str(&self.grid.header());
        s.push('\n');
        for v in &self.values {
            let _ = writeln!(s, "{v:.16e}");
        }
        s
    }

    pub fn from_dump_str(text: &str) -> Result<ScalarField> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field dump".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 6 {
            return Err(Error::Parse(format!("bad field dump header: {header:?}")));
        }
        let mut samples = [0usize; 3];
        let mut periods = [0f64; 3];
        for a in 0..3 {
            samples[a] = parts[a]
                .parse()
                .map_err(|_| Error::Parse(format!("bad sample count {:?}", parts[a])))?;
            periods[a] = parts[a + 3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad period {:?}", parts[a + 3])))?;
        }
        let grid = GridSpec::new(samples, periods)?;
        let values = lines
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value {l:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        ScalarField::from_values(grid, values)
    }

    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_dump_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_dump(path: impl AsRef<Path>) -> Result<ScalarField> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_dump_str(&text)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// Point evaluation of the trigonometric interpolant of a field.
///
/// The Nyquist mode of an axis is evaluated as a cosine, which reproduces
/// grid values and keeps the interpolant real.
#[derive(Clone, Debug)]
pub struct SpectralInterpolant {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralInterpolant {
    pub fn new(field: &ScalarField) -> Self {
        let n = field.grid().len() as f64;
        let coeffs = Spectrum::of(field).coeffs().iter().map(|c| c / n).collect();
        SpectralInterpolant {
            grid: *field.grid(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub(crate) fn basis(n: usize, period: f64, s: f64) -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                let phase = 2.0 * PI * signed_index(k, n) as f64 * s / period;
                if is_nyquist(k, n) {
                    Complex64::new(phase.cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, phase)
                }
            })
            .collect()
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        let (nx, ny, nt) = self.grid.shape();
        let bx = Self::basis(nx, self.grid.period(Axis::X), x);
        let by = Self::basis(ny, self.grid.period(Axis::Y), y);
        let bt = Self::basis(nt, self.grid.period(Axis::T), t);
        let mut total = Complex64::default();
        for k in 0..nt {
            let mut plane = Complex64::default();
            for j in 0..ny {
                let row = &self.coeffs[nx * (j + ny * k)..nx * (j + ny * k) + nx];
                let line: Complex64 = row.iter().zip(&bx).map(|(c, b)| c * b).sum();
                plane += line * by[j];
            }
            total += plane * bt[k];
        }
        total.re
    }
}

/// Random real trigonometric polynomial with integer wavenumbers
/// `|k_x|, |k_y|, |k_t| ≤ max_mode`, zero mean, no Nyquist content, scaled so
/// that its sup norm equals `amplitude`.
pub fn random_band_limited<R: Rng + ?Sized>(
    grid: GridSpec,
    max_mode: usize,
    amplitude: f64,
    rng: &mut R,
) -> ScalarField {
    let (nx, ny, nt) = grid.shape();
    assert!(
        2 * max_mode < nx.min(ny).min(nt),
        "max_mode must stay below the Nyquist index"
    );
    let m = max_mode as i64;
    let wrap = |kk: i64, n: usize| kk.rem_euclid(n as i64) as usize;
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let n = grid.len() as f64;
    for kt in -m..=m {
        for ky in -m..=m {
            for kx in -m..=m {
                // visit each conjugate pair once
                if (kt, ky, kx) <= (0, 0, 0) {
                    continue;
                }
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * n;
                let a = grid.linear_index(wrap(kx, nx), wrap(ky, ny), wrap(kt, nt));
                let b = grid.linear_index(wrap(-kx, nx), wrap(-ky, ny), wrap(-kt, nt));
                coeffs[a] = c;
                coeffs[b] = c.conj();
            }
        }
    }
    let field = Spectrum::from_coeffs(grid, coeffs).to_field();
    let sup = field.sup_norm();
    if sup == 0.0 {
        field
    } else {
        field.scale(amplitude / sup)
    }
}
