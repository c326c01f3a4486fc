mod commands;
mod config;
mod table;
mod verify;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::commands::{plan, PointError};
use crate::config::{
    parse_number, Command, CsQuantity, Format, GridSpec, Output, Params, ProjectKind, RunConfig, Sector, Sign, Suite,
};
use crate::table::{Cell, Table};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "mobius", version, about = "Coherent states, dynamics and projections on the Möbius strip")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Cmd {
    /// Θ₃, Θ₂ and the modular image at (ν, τ).
    Theta,
    /// Coherent-state quantities.
    Cs {
        #[arg(value_enum)]
        quantity: CsQuantity,
    },
    /// Energy levels |j| <= j_max.
    Spectrum,
    /// Integrate the strip motion and export the trajectory.
    Dynamics,
    /// Torus to strip to circle projections.
    Project {
        #[arg(value_enum)]
        kind: ProjectKind,
    },
    /// Run identity checks.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Run a TOML config, or a JSON config or previous JSON output.
    Run { config: PathBuf },
}

#[derive(Args)]
struct Flags {
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    l: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number)]
    r: Option<f64>,
    #[arg(long, global = true, value_enum)]
    s: Option<Sector>,
    #[arg(long, global = true, value_enum)]
    sign: Option<Sign>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    j: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number)]
    j_max: Option<f64>,
    #[arg(long = "L0", global = true, value_parser = parse_number, allow_hyphen_values = true)]
    l0: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    l2: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    phi2: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number)]
    delta: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    phi_dot: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    z0: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    z0_dot: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number)]
    t_end: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number)]
    dt: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    nu_im: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number, allow_hyphen_values = true)]
    tau_re: Option<f64>,
    #[arg(long, global = true, value_parser = parse_number)]
    tau_im: Option<f64>,
    /// Sweep `name=start:stop:count` (half-open); repeat for a Cartesian product.
    #[arg(long = "grid", global = true, allow_hyphen_values = true)]
    grid: Vec<GridSpec>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Tolerance override for verification and series targets.
    #[arg(long, global = true, value_parser = parse_number)]
    tol: Option<f64>,
    #[arg(long, global = true, env = "MOBIUS_WORKERS")]
    workers: Option<usize>,
}

impl Flags {
    fn params(&self) -> Params {
        Params {
            l: self.l,
            phi: self.phi,
            r: self.r,
            s: self.s,
            sign: self.sign,
            j: self.j,
            j_max: self.j_max,
            l0: self.l0,
            l2: self.l2,
            phi2: self.phi2,
            theta: self.theta,
            delta: self.delta,
            phi_dot: self.phi_dot,
            z0: self.z0,
            z0_dot: self.z0_dot,
            t_end: self.t_end,
            dt: self.dt,
            nu: self.nu,
            nu_im: self.nu_im,
            tau_re: self.tau_re,
            tau_im: self.tau_im,
        }
    }
}

fn build_config(cli: Cli) -> Result<RunConfig, String> {
    let flags = cli.flags;
    let mut cfg = match cli.command {
        Cmd::Run { config } => {
            let text = fs::read_to_string(&config).map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let json = config.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
            RunConfig::from_text(&text, json)?
        }
        other => {
            let (command, quantity, projection, suite) = match other {
                Cmd::Theta => (Command::Theta, None, None, None),
                Cmd::Cs { quantity } => (Command::Cs, Some(quantity), None, None),
                Cmd::Spectrum => (Command::Spectrum, None, None, None),
                Cmd::Dynamics => (Command::Dynamics, None, None, None),
                Cmd::Project { kind } => (Command::Project, None, Some(kind), None),
                Cmd::Verify { suite } => (Command::Verify, None, None, Some(suite)),
                Cmd::Run { .. } => unreachable!(),
            };
            RunConfig {
                command,
                quantity,
                projection,
                suite,
                params: Params::default(),
                grid: Vec::new(),
                output: Output::default(),
                tol: None,
                workers: None,
            }
        }
    };
    cfg.params.merge(&flags.params());
    if !flags.grid.is_empty() {
        cfg.grid = flags.grid;
    }
    if let Some(path) = flags.out {
        cfg.output.path = Some(path.to_string_lossy().into_owned());
    }
    if let Some(f) = flags.format {
        cfg.output.format = f;
    }
    if flags.tol.is_some() {
        cfg.tol = flags.tol;
    }
    if flags.workers.is_some() {
        cfg.workers = flags.workers;
    }
    if cfg.command == Command::Dynamics && !cfg.grid.is_empty() {
        return Err("dynamics exports a single trajectory; grids are not supported".into());
    }
    if cfg.command == Command::Verify && !cfg.grid.is_empty() {
        return Err("verify runs fixed grids; --grid is not supported".into());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Grid points in lexicographic order of grid indices, first grid outermost.
fn grid_points(base: &Params, grids: &[GridSpec]) -> Result<Vec<Params>, String> {
    let mut points = vec![base.clone()];
    for g in grids {
        let values = g.values();
        let mut next = Vec::with_capacity(points.len() * values.len());
        for p in &points {
            for &v in &values {
                let mut q = p.clone();
                q.set(&g.name, v)?;
                next.push(q);
            }
        }
        points = next;
    }
    Ok(points)
}

fn param_cell(p: &Params, column: &str) -> Cell {
    let v = match column {
        "l" => p.l,
        "phi" => p.phi,
        "r" => p.r,
        "j" => p.j,
        "L0" => p.l0,
        "l2" => p.l2,
        "phi2" => p.phi2,
        "theta" => p.theta,
        "delta" => p.delta,
        "nu" => p.nu,
        "nu_im" => p.nu_im,
        "tau_re" => p.tau_re,
        "tau_im" => p.tau_im,
        _ => None,
    };
    Cell::Num(v.unwrap_or(f64::NAN))
}

enum Failure {
    Usage(String),
    Numeric(String),
    Io(std::io::Error),
}

fn evaluate(cfg: &RunConfig) -> Result<Table, Failure> {
    if cfg.command == Command::Verify {
        return verify::run(cfg.suite.unwrap_or(Suite::All), cfg.tol).map_err(|e| Failure::Numeric(e.to_string()));
    }
    let (columns, eval) = plan(cfg);
    let points = grid_points(&cfg.params, &cfg.grid).map_err(Failure::Usage)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Usage(e.to_string()))?;
    let results: Vec<Result<_, PointError>> = pool.install(|| points.par_iter().map(|p| eval(p, cfg)).collect());

    let mut table = Table::new(&columns);
    if cfg.grid.is_empty() {
        // a single point: errors abort the run
        match results.into_iter().next().expect("one point") {
            Ok(rows) => table.rows = rows,
            Err(PointError::Usage(m)) => return Err(Failure::Usage(m)),
            Err(PointError::Numeric(m)) => return Err(Failure::Numeric(m)),
        }
        return Ok(table);
    }
    for (p, res) in points.iter().zip(results) {
        match res {
            Ok(rows) => table.rows.extend(rows),
            Err(e) => {
                table.failed_rows += 1;
                let mut row: Vec<Cell> = columns[..columns.len() - 1].iter().map(|c| param_cell(p, c)).collect();
                row.push(e.message().to_string().into());
                table.rows.push(row);
            }
        }
    }
    Ok(table)
}

fn write_output(cfg: &RunConfig, table: &Table) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(e);
    match &cfg.output.path {
        Some(path) => {
            let mut buf = Vec::new();
            table.write(cfg.output.format, cfg, &mut buf).map_err(io)?;
            fs::write(path, buf).map_err(io)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(cfg.output.format, cfg, &mut lock).map_err(io)?;
            lock.flush().map_err(io)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = evaluate(&cfg).and_then(|table| {
        write_output(&cfg, &table)?;
        Ok(table.failed_rows)
    });
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("error: {n} row(s) failed");
            ExitCode::from(EXIT_FAILED)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
        // a closed pipe (e.g. `| head`) is not an error
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
