//! Invariant forms on the Kodaira-Thurston coframe.
//!
//! The coframe is `e¹ = dy, e² = dx, e³ = dt, e⁴ = dz − x dy` with
//! `de¹ = de² = de³ = 0` and `de⁴ = e¹²`. Coefficients of fiber-invariant
//! forms do not depend on `z`, so they are fields on the base torus and the
//! frame derivatives are `e₁ = ∂_y`, `e₂ = ∂_x`, `e₃ = ∂_t`, `e₄ = 0`.
//!
//! Two-forms are stored on the `i < j` basis; `e⁴²` is written as `−e²⁴`.
//! The almost-complex structure acts by `Je¹ = e³`, `Je² = −e⁴`, `Je³ = −e¹`,
//! `Je⁴ = e²`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::pde::Jet;
use crate::spectral::Spectrum;

/// Frame derivatives `[e₁ f, e₂ f, e₃ f] = [f_y, f_x, f_t]` of an invariant function.
fn frame_gradient(f: &ScalarField) -> [ScalarField; 3] {
    let s = Spectrum::of(f);
    [
        s.derivative([0, 1, 0]),
        s.derivative([1, 0, 0]),
        s.derivative([0, 0, 1]),
    ]
}

/// Sign and sorted position of `e^a ∧ e^{b_1 … b_k}`; `None` when it vanishes.
fn sort_wedge(indices: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut v = indices.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, v))
}

/// `α = a₁e¹ + a₂e² + a₃e³ + a₄e⁴`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub a1: ScalarField,
    pub a2: ScalarField,
    pub a3: ScalarField,
    pub a4: ScalarField,
}

impl OneForm {
    pub fn zero(grid: GridSpec) -> Self {
        let z = ScalarField::zeros(grid);
        OneForm {
            a1: z.clone(),
            a2: z.clone(),
            a3: z.clone(),
            a4: z,
        }
    }

    pub fn new(a1: ScalarField, a2: ScalarField, a3: ScalarField, a4: ScalarField) -> Result<Self> {
        a1.ensure_same_grid(&a2)?;
        a1.ensure_same_grid(&a3)?;
        a1.ensure_same_grid(&a4)?;
        Ok(OneForm { a1, a2, a3, a4 })
    }

    pub fn grid(&self) -> &GridSpec {
        self.a1.grid()
    }

    fn components(&self) -> [&ScalarField; 4] {
        [&self.a1, &self.a2, &self.a3, &self.a4]
    }
}

pub const TWO_FORM_BASIS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// `ω = Σ_{i<j} c_ij e^{ij}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub c12: ScalarField,
    pub c13: ScalarField,
    pub c14: ScalarField,
    pub c23: ScalarField,
    pub c24: ScalarField,
    pub c34: ScalarField,
}

impl TwoForm {
    pub fn zero(grid: GridSpec) -> Self {
        Self::constant(grid, [0.0; 6])
    }

    /// Constant coefficients in basis order `12, 13, 14, 23, 24, 34`.
    pub fn constant(grid: GridSpec, c: [f64; 6]) -> Self {
        let f = |v| ScalarField::constant(grid, v);
        TwoForm {
            c12: f(c[0]),
            c13: f(c[1]),
            c14: f(c[2]),
            c23: f(c[3]),
            c24: f(c[4]),
            c34: f(c[5]),
        }
    }

    pub fn from_components(c: [ScalarField; 6]) -> Result<Self> {
        for other in &c[1..] {
            c[0].ensure_same_grid(other)?;
        }
        let [c12, c13, c14, c23, c24, c34] = c;
        Ok(TwoForm {
            c12,
            c13,
            c14,
            c23,
            c24,
            c34,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.c12.grid()
    }

    pub fn components(&self) -> [&ScalarField; 6] {
        [&self.c12, &self.c13, &self.c14, &self.c23, &self.c24, &self.c34]
    }

    fn slot(&mut self, i: usize, j: usize) -> &mut ScalarField {
        match (i, j) {
            (1, 2) => &mut self.c12,
            (1, 3) => &mut self.c13,
            (1, 4) => &mut self.c14,
            (2, 3) => &mut self.c23,
            (2, 4) => &mut self.c24,
            (3, 4) => &mut self.c34,
            _ => unreachable!("not a sorted two-form index"),
        }
    }

    fn add_to(&mut self, i: usize, j: usize, coeff: f64, f: &ScalarField) {
        let s = self.slot(i, j);
        *s = s.axpy(coeff, f);
    }

    pub fn add(&self, other: &TwoForm) -> Result<TwoForm> {
        let a = self.components();
        let b = other.components();
        let mut out = Vec::with_capacity(6);
        for n in 0..6 {
            out.push(a[n].try_zip_with(b[n], |x, y| x + y)?);
        }
        let out: [ScalarField; 6] = out.try_into().expect("six components");
        TwoForm::from_components(out)
    }

    /// `Ω = e¹³ + e⁴²`.
    pub fn omega(grid: GridSpec) -> Self {
        Self::constant(grid, [0.0, 1.0, 0.0, 0.0, -1.0, 0.0])
    }

    /// `ω_θ = (cos θ e¹ + sin θ e²) ∧ e³ − (−sin θ e¹ + cos θ e²) ∧ e⁴`.
    pub fn omega_theta(grid: GridSpec, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::constant(grid, [0.0, c, s, s, -c, 0.0])
    }

    /// `ω ∧ ω / Ω²` with `Ω² = 2e¹²³⁴`, i.e. `c₁₂c₃₄ − c₁₃c₂₄ + c₁₄c₂₃`.
    pub fn wedge_ratio(&self) -> ScalarField {
        let n = self.grid().len();
        let [c12, c13, c14, c23, c24, c34] = self.components().map(|c| c.values());
        let vals = (0..n)
            .map(|i| c12[i] * c34[i] - c13[i] * c24[i] + c14[i] * c23[i])
            .collect();
        ScalarField::from_raw(*self.grid(), vals)
    }

    /// `Jω` with `J(e^i ∧ e^j) = Je^i ∧ Je^j`.
    pub fn apply_j(&self) -> TwoForm {
        // Je^i = sign · e^{image}
        const J: [(usize, f64); 5] = [(0, 0.0), (3, 1.0), (4, -1.0), (1, -1.0), (2, 1.0)];
        let mut out = TwoForm::zero(*self.grid());
        for (&(i, j), c) in TWO_FORM_BASIS.iter().zip(self.components()) {
            let (ji, si) = J[i];
            let (jj, sj) = J[j];
            if let Some((sign, idx)) = sort_wedge(&[ji, jj]) {
                out.add_to(idx[0], idx[1], sign * si * sj, c);
            }
        }
        out
    }

    /// Exterior derivative, using `de⁴ = e¹²`.
    pub fn exterior_d(&self) -> ThreeForm {
        let grid = *self.grid();
        let mut out = ThreeForm::zero(grid);
        for (&(i, j), c) in TWO_FORM_BASIS.iter().zip(self.components()) {
            for (k, dc) in frame_gradient(c).iter().enumerate() {
                if let Some((sign, idx)) = sort_wedge(&[k + 1, i, j]) {
                    out.add_to(&idx, sign, dc);
                }
            }
            // d(e^i ∧ e⁴) = −e^i ∧ e¹²
            if j == 4 {
                if let Some((sign, idx)) = sort_wedge(&[i, 1, 2]) {
                    out.add_to(&idx, -sign, c);
                }
            }
        }
        out
    }

    /// Writes `c12.field … c34.field` and a `manifest.txt` naming each basis element.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = String::from("# two-form coefficients on the e^{ij} basis, i < j\n");
        for (&(i, j), c) in TWO_FORM_BASIS.iter().zip(self.components()) {
            let name = format!("c{i}{j}.field");
            c.write_dump(dir.join(&name))?;
            let _ = writeln!(manifest, "e{i}{j} {name}");
        }
        let path = dir.join("manifest.txt");
        std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<TwoForm> {
        let dir = dir.as_ref();
        let path = dir.join("manifest.txt");
        let manifest = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut slots: [Option<ScalarField>; 6] = Default::default();
        for line in manifest.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let mut parts = line.split_whitespace();
            let (label, file) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
            let pos = TWO_FORM_BASIS
                .iter()
                .position(|(i, j)| label == format!("e{i}{j}"))
                .ok_or_else(|| Error::Parse(format!("unknown basis label {label:?}")))?;
            slots[pos] = Some(ScalarField::read_dump(dir.join(file))?);
        }
        let comps: Vec<ScalarField> = slots
            .into_iter()
            .map(|s| s.ok_or_else(|| Error::Parse("manifest is missing a basis element".into())))
            .collect::<Result<_>>()?;
        TwoForm::from_components(comps.try_into().expect("six components"))
    }
}

/// `Σ_{i<j<k} c_ijk e^{ijk}`; used to check `d² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeForm {
    pub c123: ScalarField,
    pub c124: ScalarField,
    pub c134: ScalarField,
    pub c234: ScalarField,
}

impl ThreeForm {
    pub fn zero(grid: GridSpec) -> Self {
        let z = ScalarField::zeros(grid);
        ThreeForm {
            c123: z.clone(),
            c124: z.clone(),
            c134: z.clone(),
            c234: z,
        }
    }

    fn add_to(&mut self, idx: &[usize], coeff: f64, f: &ScalarField) {
        let slot = match idx {
            [1, 2, 3] => &mut self.c123,
            [1, 2, 4] => &mut self.c124,
            [1, 3, 4] => &mut self.c134,
            [2, 3, 4] => &mut self.c234,
            _ => unreachable!("not a sorted three-form index"),
        };
        *slot = slot.axpy(coeff, f);
    }

    pub fn sup_norm(&self) -> f64 {
        [&self.c123, &self.c124, &self.c134, &self.c234]
            .iter()
            .map(|c| c.sup_norm())
            .fold(0.0, f64::max)
    }
}

/// `α = d^c u − u e¹ = −(u_t + u) e¹ + u_y e³ − u_x e⁴`, where `d^c u = Σ ∂_j u Je^j`.
pub fn alpha_from_u(u: &ScalarField) -> OneForm {
    let [uy, ux, ut] = frame_gradient(u);
    OneForm {
        a1: -&(&ut + u),
        a2: ScalarField::zeros(*u.grid()),
        a3: uy,
        a4: -&ux,
    }
}

/// `dα = Σ_j e_j(a_i) e^j ∧ e^i + a₄ e¹²`.
pub fn exterior_d(alpha: &OneForm) -> TwoForm {
    let mut out = TwoForm::zero(*alpha.grid());
    for (i, a) in alpha.components().into_iter().enumerate() {
        for (j, da) in frame_gradient(a).iter().enumerate() {
            if let Some((sign, idx)) = sort_wedge(&[j + 1, i + 1]) {
                out.add_to(idx[0], idx[1], sign, da);
            }
        }
    }
    out.add_to(1, 2, 1.0, &alpha.a4);
    out
}

/// Largest violation of `Jω = ω`: `max(sup|c₁₄ + c₂₃|, sup|c₁₂ + c₃₄|)`.
pub fn check_j_invariance(omega: &TwoForm) -> f64 {
    let a = (&omega.c14 + &omega.c23).sup_norm();
    let b = (&omega.c12 + &omega.c34).sup_norm();
    a.max(b)
}

/// The symmetric 4×4 metric of `Ω + dα(u)` as a matrix of fields.
#[derive(Clone, Debug)]
pub struct MetricField {
    entries: [[ScalarField; 4]; 4],
}

impl MetricField {
    /// Entry `(row, col)`, 1-based to match the coframe labels.
    pub fn entry(&self, row: usize, col: usize) -> &ScalarField {
        &self.entries[row - 1][col - 1]
    }

    pub fn trace(&self) -> ScalarField {
        let d = |n: usize| &self.entries[n][n];
        &(&(d(0) + d(1)) + d(2)) + d(3)
    }

    pub fn at(&self, linear: usize) -> Matrix4<f64> {
        Matrix4::from_fn(|r, c| self.entries[r][c].values()[linear])
    }

    /// Pointwise smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> ScalarField {
        let grid = *self.entries[0][0].grid();
        let vals = (0..grid.len())
            .map(|n| SymmetricEigen::new(self.at(n)).eigenvalues.min())
            .collect();
        ScalarField::from_raw(grid, vals)
    }
}

pub fn metric_field(u: &ScalarField) -> MetricField {
    let jet = Jet::of(u);
    let (p, q) = (jet.p(), jet.q());
    let (r, s) = (jet.xy, jet.xt);
    let z = ScalarField::zeros(*u.grid());
    let nr = -&r;
    MetricField {
        entries: [
            [p.clone(), r.clone(), z.clone(), s.clone()],
            [r.clone(), q.clone(), s.clone(), z.clone()],
            [z.clone(), s.clone(), p, nr.clone()],
            [s, z, nr, q],
        ],
    }
}
