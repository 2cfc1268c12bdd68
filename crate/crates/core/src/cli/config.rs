//! Flat `key = value` run configuration.
//!
//! A config file and command-line overrides both reduce to an ordered list of
//! pairs; later pairs win. Recognized keys:
//!
//! | key | value |
//! |-----|-------|
//! | `datum` | `builtin:NAME[:SCALE]`, `dump:PATH` or `expr:EXPRESSION` |
//! | `grid` | `NX,NY,NT` |
//! | `periods` | `LX,LY,LT` |
//! | `angle` | `M,N` (rotate only) |
//! | `renormalize` | `true` / `false` |
//! | `out` | output directory |
//! | `solution` | solution dump read by verify |
//! | `export.format` | `csv-slice`, `field-dump` or `report-text` |
//! | `export.input` | field dump to export |
//! | `export.slice` | t index of the csv slice |
//! | `newton_tol`, `newton_max_iters`, `krylov_tol`, `krylov_max_iters`, `krylov_restart`, `tau_initial_step`, `tau_min_step`, `damping`, `damping_factor`, `max_backtracks` | solver settings |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::solver::SolverConfig;

use super::DatumSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Rotate,
    Manufacture,
    Export,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Rotate => "rotate",
            Command::Manufacture => "manufacture",
            Command::Export => "export",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    ReportText,
    FieldDump,
    CsvSlice,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "report-text" => Ok(ExportFormat::ReportText),
            "field-dump" => Ok(ExportFormat::FieldDump),
            "csv-slice" => Ok(ExportFormat::CsvSlice),
            other => Err(Error::Config(format!(
                "unknown export format {other:?} (expected report-text, field-dump or csv-slice)"
            ))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::ReportText => "report-text",
            ExportFormat::FieldDump => "field-dump",
            ExportFormat::CsvSlice => "csv-slice",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExportSettings {
    pub format: ExportFormat,
    pub input: Option<PathBuf>,
    pub slice: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub datum: Option<DatumSource>,
    pub grid: GridSpec,
    /// Set when `grid` or `periods` came from the configuration rather than the default.
    pub grid_explicit: bool,
    pub solver: SolverConfig,
    pub angle: Option<(i64, i64)>,
    pub renormalize: bool,
    pub out: PathBuf,
    pub solution: Option<PathBuf>,
    pub export: ExportSettings,
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", n + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(&text)
}

fn list<T: FromStr, const N: usize>(key: &str, value: &str) -> Result<[T; N]> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(Error::Config(format!("{key}: expected {N} comma-separated values, got {value:?}")));
    }
    let parsed: Vec<T> = parts
        .iter()
        .map(|p| p.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {p:?}"))))
        .collect::<Result<_>>()?;
    parsed
        .try_into()
        .map_err(|_| Error::Config(format!("{key}: wrong arity")))
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    pub fn from_pairs(command: Command, pairs: &[(String, String)]) -> Result<Self> {
        let mut samples = [16, 16, 16];
        let mut periods = [1.0, 1.0, 1.0];
        let mut grid_explicit = false;
        let mut solver = SolverConfig::new(GridSpec::cube(16)?);
        let mut datum = None;
        let mut angle = None;
        let mut renormalize = false;
        let mut out = PathBuf::from(".");
        let mut solution = None;
        let mut export = ExportSettings {
            format: ExportFormat::CsvSlice,
            input: None,
            slice: 0,
        };

        for (key, value) in pairs {
            let (k, v) = (key.as_str(), value.as_str());
            match k {
                "datum" => datum = Some(v.parse::<DatumSource>()?),
                "grid" => {
                    samples = list(k, v)?;
                    grid_explicit = true;
                }
                "periods" => {
                    periods = list(k, v)?;
                    grid_explicit = true;
                }
                "angle" => {
                    let [m, n] = list(k, v)?;
                    angle = Some((m, n));
                }
                "renormalize" => renormalize = scalar(k, v)?,
                "out" => out = PathBuf::from(v),
                "solution" => solution = Some(PathBuf::from(v)),
                "export.format" => export.format = v.parse()?,
                "export.input" => export.input = Some(PathBuf::from(v)),
                "export.slice" => export.slice = scalar(k, v)?,
                "newton_tol" => solver.newton_tol = scalar(k, v)?,
                "newton_max_iters" => solver.newton_max_iters = scalar(k, v)?,
                "krylov_tol" => solver.krylov_tol = scalar(k, v)?,
                "krylov_max_iters" => solver.krylov_max_iters = scalar(k, v)?,
                "krylov_restart" => solver.krylov_restart = scalar(k, v)?,
                "tau_initial_step" => solver.tau_initial_step = scalar(k, v)?,
                "tau_min_step" => solver.tau_min_step = scalar(k, v)?,
                "damping" => solver.damping.enabled = scalar(k, v)?,
                "damping_factor" => solver.damping.factor = scalar(k, v)?,
                "max_backtracks" => solver.damping.max_backtracks = scalar(k, v)?,
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }

        let grid = GridSpec::new(samples, periods)?;
        solver.grid = grid;
        solver.validate()?;
        if angle.is_some() && command != Command::Rotate {
            return Err(Error::Config(format!("angle is only valid with rotate, not {command}")));
        }
        if command == Command::Rotate && angle.is_none() {
            return Err(Error::Config("rotate needs an angle M,N".into()));
        }
        if datum.is_none() && matches!(command, Command::Solve | Command::Rotate | Command::Manufacture) {
            return Err(Error::Config(format!("{command} needs a datum source")));
        }
        Ok(RunConfig {
            command,
            datum,
            grid,
            grid_explicit,
            solver,
            angle,
            renormalize,
            out,
            solution,
            export,
        })
    }

    /// Pairs from `config` (if any) followed by `overrides`.
    pub fn load(command: Command, config: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs = match config {
            Some(p) => read_pairs(p)?,
            None => Vec::new(),
        };
        pairs.extend_from_slice(overrides);
        Self::from_pairs(command, &pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parses_flat_file_with_comments() {
        let p = parse_pairs("# run\n\ngrid = 8, 8, 4\n datum=expr: sin(2*pi*x) \n").unwrap();
        assert_eq!(p, pairs(&[("grid", "8, 8, 4"), ("datum", "expr: sin(2*pi*x)")]));
        assert!(parse_pairs("grid 8,8,8").is_err());
    }

    #[test]
    fn later_pairs_override() {
        let c = RunConfig::from_pairs(
            Command::Solve,
            &pairs(&[("datum", "builtin:zero"), ("grid", "8,8,8"), ("grid", "12,12,4"), ("newton_tol", "1e-9")]),
        )
        .unwrap();
        assert_eq!(c.grid.sample_counts(), [12, 12, 4]);
        assert_eq!(c.solver.grid, c.grid);
        assert_eq!(c.solver.newton_tol, 1e-9);
        assert!(c.grid_explicit);
        assert!(!c.renormalize);
    }

    #[test]
    fn defaults() {
        let c = RunConfig::from_pairs(Command::Verify, &[]).unwrap();
        assert_eq!(c.grid, GridSpec::cube(16).unwrap());
        assert!(!c.grid_explicit);
        assert_eq!(c.out, PathBuf::from("."));
        assert_eq!(c.export.format, ExportFormat::CsvSlice);
    }

    #[test]
    fn invariants() {
        let zero = ("datum", "builtin:zero");
        assert!(RunConfig::from_pairs(Command::Solve, &[]).is_err());
        assert!(RunConfig::from_pairs(Command::Solve, &pairs(&[zero, ("angle", "1,1")])).is_err());
        assert!(RunConfig::from_pairs(Command::Rotate, &pairs(&[zero])).is_err());
        let r = RunConfig::from_pairs(Command::Rotate, &pairs(&[zero, ("angle", "-1,2")])).unwrap();
        assert_eq!(r.angle, Some((-1, 2)));
        assert!(RunConfig::from_pairs(Command::Solve, &pairs(&[zero, ("bogus", "1")])).is_err());
        assert!(RunConfig::from_pairs(Command::Solve, &pairs(&[zero, ("grid", "8,8")])).is_err());
        assert!(RunConfig::from_pairs(Command::Solve, &pairs(&[zero, ("grid", "7,8,8")])).is_err());
        assert!(RunConfig::from_pairs(Command::Solve, &pairs(&[zero, ("tau_min_step", "0.5")])).is_err());
        assert!(RunConfig::from_pairs(Command::Export, &pairs(&[("export.format", "png")])).is_err());
    }
}
