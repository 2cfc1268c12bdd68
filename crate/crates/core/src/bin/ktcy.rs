use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ktcy::cli::{self, Command, RunConfig};

#[derive(Parser)]
#[command(name = "ktcy", version, about = "Reduced Calabi-Yau equation on the Kodaira-Thurston manifold")]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// Sample counts NX,NY,NT
    #[arg(long, global = true, value_name = "NX,NY,NT")]
    grid: Option<String>,

    /// Rational angle M,N (rotate only)
    #[arg(long, global = true, value_name = "M,N", allow_hyphen_values = true)]
    angle: Option<String>,

    /// Shift F so that the integral of e^F equals the box volume
    #[arg(long, global = true)]
    renormalize: bool,

    /// Flat key = value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Datum source: builtin:NAME[:SCALE], dump:PATH or expr:EXPRESSION
    #[arg(long, global = true, value_name = "SOURCE")]
    datum: Option<String>,

    /// Any configuration key, repeatable
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Solve for u by continuation from F = 0
    Solve,
    /// Audit a dumped solution against the a-priori estimates
    Verify,
    /// Solve the equation for a rotated symplectic form
    Rotate,
    /// Build F = log(LHS(u*)) from a chosen u*
    Manufacture,
    /// Write a csv slice, field dump or text report of a field
    Export,
}

fn overrides(args: &Args) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(d) = &args.datum {
        pairs.push(("datum".into(), d.clone()));
    }
    if let Some(g) = &args.grid {
        pairs.push(("grid".into(), g.clone()));
    }
    if let Some(a) = &args.angle {
        pairs.push(("angle".into(), a.clone()));
    }
    if args.renormalize {
        pairs.push(("renormalize".into(), "true".into()));
    }
    if let Some(o) = &args.out {
        pairs.push(("out".into(), o.display().to_string()));
    }
    Ok(pairs)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Solve => Command::Solve,
        Cmd::Verify => Command::Verify,
        Cmd::Rotate => Command::Rotate,
        Cmd::Manufacture => Command::Manufacture,
        Cmd::Export => Command::Export,
    };
    let pairs = match overrides(&args) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let result = RunConfig::load(command, args.config.as_deref(), &pairs).and_then(|cfg| cli::run(&cfg));
    match result {
        Ok(outcome) => {
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
