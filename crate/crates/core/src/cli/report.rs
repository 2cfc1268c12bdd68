//! Structured key-value run reports.
//!
//! One `key = value` pair per line, in insertion order. Floats use the
//! shortest representation that parses back to the same bits.

use std::fmt::Display;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimates::EstimateReport;
use crate::field::{GridSpec, ScalarField};
use crate::pde::EllipticityReport;
use crate::solver::{ContinuationTrace, SolverConfig};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    entries: Vec<(String, String)>,
}

fn real(v: f64) -> String {
    format!("{v:e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_real(&mut self, key: impl Into<String>, value: f64) {
        self.entries.push((key.into(), real(value)));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_real(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    /// Keys starting with `prefix`.
    pub fn section<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _)| k.starts_with(prefix))
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("report line {}: missing '='", n + 1)))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(RunReport { entries })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn add_grid(&mut self, prefix: &str, grid: &GridSpec) {
        let [nx, ny, nt] = grid.sample_counts();
        let [lx, ly, lt] = grid.periods();
        self.push(format!("{prefix}.samples"), format!("{nx},{ny},{nt}"));
        self.push(format!("{prefix}.periods"), format!("{},{},{}", real(lx), real(ly), real(lt)));
        self.push(format!("{prefix}.checksum"), sha256_hex(grid.header().as_bytes()));
    }

    pub fn add_field_summary(&mut self, prefix: &str, field: &ScalarField) {
        let n = field.norms();
        self.push_real(format!("{prefix}.sup"), n.sup);
        self.push_real(format!("{prefix}.l2"), n.l2);
        self.push_real(format!("{prefix}.grad_sup"), n.grad_sup);
        self.push_real(format!("{prefix}.grad_l2"), n.grad_l2);
        self.push_real(format!("{prefix}.mean"), field.mean());
        self.push(
            format!("{prefix}.checksum"),
            sha256_hex(field.to_dump_string().as_bytes()),
        );
    }

    pub fn add_solver_config(&mut self, cfg: &SolverConfig) {
        self.push_real("solver.newton_tol", cfg.newton_tol);
        self.push("solver.newton_max_iters", cfg.newton_max_iters);
        self.push_real("solver.krylov_tol", cfg.krylov_tol);
        self.push("solver.krylov_max_iters", cfg.krylov_max_iters);
        self.push("solver.krylov_restart", cfg.krylov_restart);
        self.push_real("solver.tau_initial_step", cfg.tau_initial_step);
        self.push_real("solver.tau_min_step", cfg.tau_min_step);
        self.push("solver.damping", cfg.damping.enabled);
        self.push_real("solver.damping_factor", cfg.damping.factor);
        self.push("solver.max_backtracks", cfg.damping.max_backtracks);
    }

    pub fn add_trace(&mut self, trace: &ContinuationTrace) {
        self.push("trace.attempts", trace.records.len());
        self.push("trace.accepted", trace.accepted().count());
        self.push("trace.total_newton_iters", trace.total_newton_iters());
        for (i, r) in trace.records.iter().enumerate() {
            let p = format!("trace.{i:03}");
            self.push_real(format!("{p}.tau"), r.tau);
            self.push(format!("{p}.newton_iters"), r.newton_iters);
            self.push(format!("{p}.krylov_iters"), r.krylov_iters);
            self.push_real(format!("{p}.residual_sup"), r.final_residual_sup);
            self.push_real(format!("{p}.lambda_min"), r.lambda_min);
            self.push(format!("{p}.accepted"), r.accepted);
        }
    }

    pub fn add_ellipticity(&mut self, e: &EllipticityReport) {
        self.push_real("ellipticity.min_q", e.min_q);
        self.push_real("ellipticity.min_p", e.min_p);
        self.push_real("ellipticity.min_trace", e.min_trace);
        self.push_real("ellipticity.min_lambda", e.min_lambda);
        self.push_real("ellipticity.min_symbol_eigenvalue", e.min_symbol_eigenvalue);
        self.push_real("ellipticity.min_trace_margin", e.min_trace_margin);
        self.push("ellipticity.clamped_points", e.clamped_points);
        self.push("ellipticity.q_positive", e.q_positive);
        self.push("ellipticity.p_positive", e.p_positive);
        self.push("ellipticity.trace_bound", e.trace_bound);
        self.push_real("ellipticity.tolerance", e.tolerance);
        self.push("ellipticity.ok", e.all_ok());
    }

    pub fn add_estimates(&mut self, r: &EstimateReport) {
        self.push("estimate.count", r.checks.len());
        self.push("estimate.informative", r.informative);
        self.push("estimate.all_pass", r.all_pass());
        self.push_real("estimate.residual_sup", r.residual_sup);
        self.push_real("estimate.sup_u", r.sup_u);
        self.push_real("estimate.sup_laplacian", r.sup_laplacian);
        for c in &r.checks {
            let p = format!("estimate.{}", c.id);
            self.push(format!("{p}.name"), c.name);
            self.push(format!("{p}.relation"), c.relation.symbol());
            self.push_real(format!("{p}.lhs"), c.lhs);
            self.push_real(format!("{p}.rhs"), c.rhs);
            self.push_real(format!("{p}.margin"), c.margin);
            self.push(format!("{p}.pass"), c.pass);
        }
    }
}
