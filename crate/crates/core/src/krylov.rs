//! Restarted GMRES with right preconditioning, for matrix-free operators.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresConfig {
    /// Relative residual target `‖b − Ax‖ ≤ tol·‖b‖`.
    pub tol: f64,
    pub max_iters: usize,
    /// Krylov subspace dimension between restarts.
    pub restart: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            tol: 1e-10,
            max_iters: 400,
            restart: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` starting from zero, with `A` applied as `apply` and the
/// right preconditioner `M⁻¹` applied as `precondition`: GMRES runs on
/// `A M⁻¹ y = b` and returns `x = M⁻¹ y`.
pub fn gmres(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut precondition: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    cfg: &GmresConfig,
) -> GmresOutcome {
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return GmresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }

    let m = cfg.restart.max(1);
    let mut iterations = 0;
    let mut r = b.to_vec();
    let mut rel = 1.0;

    while iterations < cfg.max_iters {
        let beta = norm(&r);
        rel = beta / b_norm;
        if rel <= cfg.tol {
            break;
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns, rotated in place
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut inner = 0;
        while inner < m && iterations < cfg.max_iters {
            let z = precondition(&basis[inner]);
            let mut w = apply(&z);
            let mut col = vec![0.0; inner + 2];
            // modified Gram-Schmidt
            for (k, v) in basis.iter().enumerate() {
                let hk = dot(&w, v);
                col[k] = hk;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hk * vi;
                }
            }
            let wn = norm(&w);
            col[inner + 1] = wn;

            for k in 0..inner {
                let t = cs[k] * col[k] + sn[k] * col[k + 1];
                col[k + 1] = -sn[k] * col[k] + cs[k] * col[k + 1];
                col[k] = t;
            }
            let denom = col[inner].hypot(col[inner + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[inner] / denom, col[inner + 1] / denom)
            };
            col[inner] = denom;
            col[inner + 1] = 0.0;
            g[inner + 1] = -s * g[inner];
            g[inner] *= c;
            cs.push(c);
            sn.push(s);
            h.push(col);

            iterations += 1;
            inner += 1;
            rel = g[inner].abs() / b_norm;
            if rel <= cfg.tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }

        // back substitution on the triangular system
        let mut y = vec![0.0; inner];
        for k in (0..inner).rev() {
            let mut s = g[k];
            for j in k + 1..inner {
                s -= h[j][k] * y[j];
            }
            y[k] = if h[k][k] == 0.0 { 0.0 } else { s / h[k][k] };
        }
        let mut update = vec![0.0; n];
        for (yk, v) in y.iter().zip(&basis) {
            for (u, vi) in update.iter_mut().zip(v) {
                *u += yk * vi;
            }
        }
        let dx = precondition(&update);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        // true residual for the restart
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(bi, a)| bi - a).collect();
        rel = norm(&r) / b_norm;
        if rel <= cfg.tol {
            break;
        }
    }

    GmresOutcome {
        converged: rel <= cfg.tol,
        x,
        iterations,
        relative_residual: rel,
    }
}
