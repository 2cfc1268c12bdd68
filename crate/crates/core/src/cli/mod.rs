//! Batch front door: datum sources, the five commands, reports and exports.

pub mod config;
pub mod expr;
pub mod report;

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimates::verify;
use crate::field::{GridSpec, ScalarField};
use crate::pde::{self, ellipticity_report, ma_lhs};
use crate::rotation::{solve_rotated, RationalAngle};
use crate::solver::{self, SolveReport};

pub use config::{Command, ExportFormat, ExportSettings, RunConfig};
pub use expr::Expr;
pub use report::RunReport;

pub const BUILTINS: [&str; 4] = ["zero", "triple-sine", "acceptance-manufactured", "mild-manufactured"];

#[derive(Clone, Debug, PartialEq)]
pub enum DatumSource {
    /// A named closed form multiplied by `scale`.
    Builtin { name: String, scale: f64 },
    Dump(PathBuf),
    Expr(String),
}

impl FromStr for DatumSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("datum {s:?} must start with builtin:, dump: or expr:")))?;
        let rest = rest.trim();
        match kind.trim() {
            "builtin" => {
                let (name, scale) = match rest.split_once(':') {
                    Some((n, sc)) => (
                        n.trim(),
                        sc.trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("bad builtin scale {sc:?}")))?,
                    ),
                    None => (rest, 1.0),
                };
                if !BUILTINS.contains(&name) {
                    return Err(Error::Config(format!(
                        "unknown builtin {name:?}; available: {}",
                        BUILTINS.join(", ")
                    )));
                }
                Ok(DatumSource::Builtin {
                    name: name.to_string(),
                    scale,
                })
            }
            "dump" => Ok(DatumSource::Dump(PathBuf::from(rest))),
            "expr" => {
                Expr::parse(rest)?;
                Ok(DatumSource::Expr(rest.to_string()))
            }
            other => Err(Error::Config(format!("unknown datum kind {other:?}"))),
        }
    }
}

impl fmt::Display for DatumSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatumSource::Builtin { name, scale } => write!(f, "builtin:{name}:{scale}"),
            DatumSource::Dump(p) => write!(f, "dump:{}", p.display()),
            DatumSource::Expr(e) => write!(f, "expr:{e}"),
        }
    }
}

fn builtin(name: &str, scale: f64, grid: GridSpec) -> Result<ScalarField> {
    let [lx, ly, lt] = grid.periods();
    let (kx, ky, kt) = (2.0 * PI / lx, 2.0 * PI / ly, 2.0 * PI / lt);
    let f: Box<dyn Fn(f64, f64, f64) -> f64> = match name {
        "zero" => Box::new(|_, _, _| 0.0),
        "triple-sine" => Box::new(move |x, y, t| 0.3 * (kx * x).sin() * (ky * y).sin() * (kt * t).sin()),
        "acceptance-manufactured" => {
            Box::new(move |x, y, t| 0.01 * (kx * x).sin() + 0.02 * (ky * y).cos() * (kt * t).sin())
        }
        "mild-manufactured" => {
            Box::new(move |x, y, t| 0.004 * (kx * x).sin() + 0.003 * (ky * y).cos() * (kt * t).sin())
        }
        other => return Err(Error::Config(format!("unknown builtin {other:?}"))),
    };
    ScalarField::sample(grid, |x, y, t| scale * f(x, y, t))
}

impl DatumSource {
    /// Samples the datum. Dumps carry their own grid, which must equal `grid`
    /// when `grid_explicit` is set.
    pub fn resolve(&self, grid: GridSpec, grid_explicit: bool) -> Result<ScalarField> {
        match self {
            DatumSource::Builtin { name, scale } => builtin(name, *scale, grid),
            DatumSource::Expr(src) => Expr::parse(src)?.sample(grid),
            DatumSource::Dump(path) => {
                let f = ScalarField::read_dump(path)?;
                if grid_explicit && f.grid() != &grid {
                    return Err(Error::Config(format!(
                        "dump {} has grid {} but the configuration asks for {}",
                        path.display(),
                        f.grid().header(),
                        grid.header()
                    )));
                }
                Ok(f)
            }
        }
    }
}

/// A manufactured datum and the exact discrete solution it was built from.
#[derive(Clone, Debug)]
pub struct Manufactured {
    pub f: ScalarField,
    pub u_star: ScalarField,
}

/// `F = log(ma_lhs(u*))` for the mean-zero projection of `u*`.
pub fn manufacture(u_star: &ScalarField) -> Result<Manufactured> {
    let u_star = u_star.project_mean_zero();
    let lhs = ma_lhs(&u_star);
    let (index, min) = lhs.argmin();
    if !(min > 0.0) {
        return Err(Error::NonPositiveLhs { min, index });
    }
    Ok(Manufactured {
        f: lhs.map(f64::ln),
        u_star,
    })
}

/// `F − log(∫e^F dV / volume)`.
pub fn renormalize(f: &ScalarField) -> ScalarField {
    let shift = f.map(f64::exp).mean().ln();
    f.map(|v| v - shift)
}

/// Rows `x,y,value` of the plane `t = t_k`, preceded by a header line.
pub fn csv_slice(field: &ScalarField, t_index: usize) -> Result<String> {
    let grid = field.grid();
    let (nx, ny, nt) = grid.shape();
    if t_index >= nt {
        return Err(Error::Config(format!("slice index {t_index} out of range 0..{nt}")));
    }
    let mut out = String::from("x,y,value\n");
    for j in 0..ny {
        for i in 0..nx {
            let (x, y, _) = grid.point(i, j, t_index);
            out.push_str(&format!("{x:e},{y:e},{:.16e}\n", field.at(i, j, t_index)));
        }
    }
    Ok(out)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// What a command produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub written: Vec<PathBuf>,
}

/// Process exit status for an error: 2 normalization, 3 stalled continuation,
/// 4 non-positive manufactured left-hand side, 5 I/O, 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Normalization { .. } => 2,
        Error::ContinuationStalled { .. } => 3,
        Error::NonPositiveLhs { .. } => 4,
        Error::Io { .. } => 5,
        _ => 1,
    }
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn field(&mut self, name: &str, f: &ScalarField) -> Result<()> {
        let p = self.dir.join(name);
        f.write_dump(&p)?;
        self.written.push(p);
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.dir.join(name);
        write_text(&p, text)?;
        self.written.push(p);
        Ok(())
    }

    fn report(mut self, name: &str, report: RunReport) -> Result<RunOutcome> {
        self.text(name, &report.to_text())?;
        Ok(RunOutcome {
            report,
            written: self.written,
        })
    }
}

fn header(cfg: &RunConfig) -> RunReport {
    let mut r = RunReport::new();
    r.push("tool.version", report::TOOL_VERSION);
    r.push("config.command", cfg.command);
    if let Some(d) = &cfg.datum {
        r.push("config.datum", d);
    }
    r.push("config.renormalize", cfg.renormalize);
    if let Some((m, n)) = cfg.angle {
        r.push("config.angle", format!("{m},{n}"));
    }
    r.push("config.out", cfg.out.display());
    r
}

/// Resolves the datum and applies (or checks) the normalization.
fn normalized_datum(cfg: &RunConfig, source: &DatumSource, r: &mut RunReport) -> Result<ScalarField> {
    let raw = source.resolve(cfg.grid, cfg.grid_explicit)?;
    let volume = raw.grid().volume();
    let integral = raw.map(f64::exp).integrate();
    r.push_real("datum.integral_exp", integral);
    r.push_real("datum.volume", volume);
    if cfg.renormalize {
        let f = renormalize(&raw);
        r.push_real("datum.shift", (integral / volume).ln());
        Ok(f)
    } else {
        solver::check_normalization(&raw)?;
        Ok(raw)
    }
}

fn add_solve(r: &mut RunReport, s: &SolveReport, f: &ScalarField) -> Result<()> {
    r.push("converged", s.converged);
    r.add_trace(&s.trace);
    let res = pde::residual(&s.u, f)?;
    r.push_real("residual.sup", res.sup_norm());
    r.push_real("residual.l2", res.l2_norm());
    r.push_real("residual.threshold", pde::solution_threshold(f));
    r.add_ellipticity(&s.ellipticity);
    r.add_estimates(&s.estimates);
    r.add_field_summary("solution", &s.u);
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut r = header(cfg);
    let mut w = Writer::new(&cfg.out)?;
    match cfg.command {
        Command::Solve => {
            let source = cfg.datum.as_ref().expect("validated");
            let f = normalized_datum(cfg, source, &mut r)?;
            r.add_grid("grid", f.grid());
            let scfg = solver::SolverConfig {
                grid: *f.grid(),
                ..cfg.solver
            };
            r.add_solver_config(&scfg);
            let t0 = Instant::now();
            let s = solver::solve(&f, &scfg)?;
            r.push_real("timings.solve_seconds", t0.elapsed().as_secs_f64());
            add_solve(&mut r, &s, &f)?;
            w.field("solution.field", &s.u)?;
            w.field("datum.field", &f)?;
        }
        Command::Verify => {
            let sol_path = cfg.solution.clone().unwrap_or_else(|| cfg.out.join("solution.field"));
            let u = ScalarField::read_dump(&sol_path)?;
            let f = match &cfg.datum {
                Some(source) => normalized_datum(
                    &RunConfig {
                        grid: *u.grid(),
                        grid_explicit: true,
                        ..cfg.clone()
                    },
                    source,
                    &mut r,
                )?,
                None => ScalarField::read_dump(cfg.out.join("datum.field"))?,
            };
            u.ensure_same_grid(&f)?;
            r.push("verify.solution", sol_path.display());
            r.add_grid("grid", u.grid());
            let res = pde::residual(&u, &f)?;
            r.push_real("residual.sup", res.sup_norm());
            r.push_real("residual.l2", res.l2_norm());
            r.push_real("residual.threshold", pde::solution_threshold(&f));
            r.add_ellipticity(&ellipticity_report(&u, &f)?);
            r.add_estimates(&verify(&u, &f)?);
            r.add_field_summary("solution", &u);
            r.push_real("timings.total_seconds", start.elapsed().as_secs_f64());
            return w.report("verify_report.txt", r);
        }
        Command::Rotate => {
            let source = cfg.datum.as_ref().expect("validated");
            let (m, n) = cfg.angle.expect("validated");
            let angle = RationalAngle::new(m, n)?;
            let f = normalized_datum(cfg, source, &mut r)?;
            r.add_grid("grid", f.grid());
            let scfg = solver::SolverConfig {
                grid: *f.grid(),
                ..cfg.solver
            };
            r.add_solver_config(&scfg);
            let t0 = Instant::now();
            let rot = solve_rotated(&f, angle, &scfg)?;
            r.push_real("timings.solve_seconds", t0.elapsed().as_secs_f64());
            r.push("rotation.m", m);
            r.push("rotation.n", n);
            r.push_real("rotation.period", rot.period);
            r.push_real("rotation.theta", angle.theta());
            r.add_grid("rotation.cell_grid", &rot.cell_grid);
            r.push_real("rotation.cell_normalization", rot.cell_normalization);
            r.push_real("rotation.cell_normalization_target", rot.period * rot.period);
            r.push_real("rotation.datum_shift", rot.datum_shift);
            r.push_real("rotation.sup_vp", rot.sup_vp);
            r.push("rotation.vp_bound_ok", rot.vp_bound_ok);
            let g = crate::rotation::RotatedProblem::new(&f, angle)?
                .g
                .map(|v| v - rot.datum_shift);
            add_solve(&mut r, &rot.report, &g)?;
            w.field("cell_solution.field", &rot.report.u)?;
            w.field("cell_datum.field", &g)?;
            w.field("datum.field", &f)?;
        }
        Command::Manufacture => {
            let source = cfg.datum.as_ref().expect("validated");
            let u_star = source.resolve(cfg.grid, cfg.grid_explicit)?;
            r.add_grid("grid", u_star.grid());
            let m = manufacture(&u_star)?;
            let lhs = ma_lhs(&m.u_star);
            r.push_real("manufacture.min_lhs", lhs.min());
            r.push_real("manufacture.max_lhs", lhs.max());
            r.push_real("datum.integral_exp", m.f.map(f64::exp).integrate());
            r.push_real("datum.volume", m.f.grid().volume());
            r.add_field_summary("datum", &m.f);
            r.add_field_summary("u_star", &m.u_star);
            w.field("datum.field", &m.f)?;
            w.field("u_star.field", &m.u_star)?;
        }
        Command::Export => {
            let input = cfg
                .export
                .input
                .clone()
                .unwrap_or_else(|| cfg.out.join("solution.field"));
            let field = ScalarField::read_dump(&input)?;
            let stem = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "field".into());
            r.push("export.input", input.display());
            r.push("export.format", cfg.export.format);
            match cfg.export.format {
                ExportFormat::CsvSlice => {
                    let k = cfg.export.slice;
                    r.push("export.slice", k);
                    w.text(&format!("{stem}.slice_t{k}.csv"), &csv_slice(&field, k)?)?;
                }
                ExportFormat::FieldDump => w.field(&format!("{stem}.export.field"), &field)?,
                ExportFormat::ReportText => {
                    let mut fr = RunReport::new();
                    fr.push("tool.version", report::TOOL_VERSION);
                    fr.push("export.input", input.display());
                    fr.add_grid("grid", field.grid());
                    fr.add_field_summary("field", &field);
                    if let Some(source) = &cfg.datum {
                        let f = source.resolve(*field.grid(), true)?;
                        fr.add_ellipticity(&ellipticity_report(&field, &f)?);
                        fr.add_estimates(&verify(&field, &f)?);
                    }
                    w.text(&format!("{stem}.report.txt"), &fr.to_text())?;
                }
            }
            r.push_real("timings.total_seconds", start.elapsed().as_secs_f64());
            return w.report("export_report.txt", r);
        }
    }
    r.push_real("timings.total_seconds", start.elapsed().as_secs_f64());
    w.report("report.txt", r)
}
