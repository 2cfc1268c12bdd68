//! FFT plumbing for periodic box grids.
//!
//! Coefficients are stored unnormalized (forward transform without scaling),
//! in the same x-fastest order as [`ScalarField`] values. The inverse
//! transform divides by the sample count.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::field::{Axis, GridSpec, ScalarField};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Signed integer wavenumber of storage index `k` on an axis with `n` samples.
/// The Nyquist index `n/2` is reported as `+n/2`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub fn is_nyquist(k: usize, n: usize) -> bool {
    n.is_multiple_of(2) && k == n / 2
}

/// Angular wavenumber `2π k / L` of storage index `k`.
pub fn angular_wavenumber(k: usize, n: usize, period: f64) -> f64 {
    2.0 * PI * signed_index(k, n) as f64 / period
}

/// Fourier multiplier of `d^order/ds^order` on one axis.
///
/// Odd orders vanish on the Nyquist mode so that derivative fields stay real.
pub fn derivative_symbol(k: usize, n: usize, period: f64, order: u8) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if order % 2 == 1 && is_nyquist(k, n) {
        return Complex64::new(0.0, 0.0);
    }
    let w = angular_wavenumber(k, n, period);
    Complex64::new(0.0, w).powu(order as u32)
}

/// In-place 3-D transform of a buffer laid out x-fastest.
pub fn fft3(grid: &GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let (nx, ny, nt) = grid.shape();
    debug_assert_eq!(data.len(), nx * ny * nt);

    // x lines are contiguous
    plan(nx, direction).process(data);

    let fy = plan(ny, direction);
    let mut line = vec![Complex64::default(); ny];
    for k in 0..nt {
        for i in 0..nx {
            let base = i + nx * ny * k;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + nx * j];
            }
            fy.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[base + nx * j] = *v;
            }
        }
    }

    let ft = plan(nt, direction);
    let mut line = vec![Complex64::default(); nt];
    let plane = nx * ny;
    for base in 0..plane {
        for (k, v) in line.iter_mut().enumerate() {
            *v = data[base + plane * k];
        }
        ft.process(&mut line);
        for (k, v) in line.iter().enumerate() {
            data[base + plane * k] = *v;
        }
    }
}

/// In-place transform along the x and y axes only (one 2-D transform per t plane).
pub fn fft_xy(grid: &GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let (nx, ny, nt) = grid.shape();
    plan(nx, direction).process(data);
    let fy = plan(ny, direction);
    let mut line = vec![Complex64::default(); ny];
    for k in 0..nt {
        for i in 0..nx {
            let base = i + nx * ny * k;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + nx * j];
            }
            fy.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[base + nx * j] = *v;
            }
        }
    }
}

/// Fourier coefficients of a real field.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(field: &ScalarField) -> Self {
        let mut coeffs: Vec<Complex64> = field
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft3(field.grid(), &mut coeffs, FftDirection::Forward);
        Spectrum {
            grid: *field.grid(),
            coeffs,
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len());
        Spectrum { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Back to grid space, keeping the real part.
    pub fn to_field(&self) -> ScalarField {
        let mut buf = self.coeffs.clone();
        fft3(&self.grid, &mut buf, FftDirection::Inverse);
        let scale = 1.0 / self.grid.len() as f64;
        ScalarField::from_raw(self.grid, buf.iter().map(|c| c.re * scale).collect())
    }

    /// Multiply every coefficient by `symbol(ix, iy, it)` and transform back.
    pub fn map_symbol(&self, mut symbol: impl FnMut(usize, usize, usize) -> Complex64) -> ScalarField {
        let (nx, ny, nt) = self.grid.shape();
        let mut out = self.coeffs.clone();
        for k in 0..nt {
            for j in 0..ny {
                let row = nx * (j + ny * k);
                for i in 0..nx {
                    out[row + i] *= symbol(i, j, k);
                }
            }
        }
        Spectrum {
            grid: self.grid,
            coeffs: out,
        }
        .to_field()
    }

    /// Mixed spectral derivative with per-axis orders `(x, y, t)`.
    pub fn derivative(&self, orders: [u8; 3]) -> ScalarField {
        let tables = symbol_tables(&self.grid, orders);
        self.map_symbol(|i, j, k| tables[0][i] * tables[1][j] * tables[2][k])
    }
}

/// Per-axis multiplier tables for a mixed derivative.
pub fn symbol_tables(grid: &GridSpec, orders: [u8; 3]) -> [Vec<Complex64>; 3] {
    let axis_table = |axis: Axis, order: u8| {
        let n = grid.samples(axis);
        let l = grid.period(axis);
        (0..n)
            .map(|k| derivative_symbol(k, n, l, order))
            .collect::<Vec<_>>()
    };
    [
        axis_table(Axis::X, orders[0]),
        axis_table(Axis::Y, orders[1]),
        axis_table(Axis::T, orders[2]),
    ]
}
