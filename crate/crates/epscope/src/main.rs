use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use epscope::config::{self, RunConfig};
use epscope::epfinder::{
    locate_ep_2level, locate_ep_numeric_tol, BranchPoint, CriticalParam, EpError, ScaleTarget,
    SearchBox, SolveFor,
};
use epscope::figures::{run_figure, FigureError};
use epscope::output::{sweep_csv, sweep_svg};
use epscope::sweep::run_sweep;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_NO_EP: u8 = 4;

#[derive(Parser)]
#[command(name = "epscope", version, about = "Eigenvalue trajectories and branch points of coupled-level models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the tuning parameter and emit the trajectory dataset as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; falls back to the config's output block, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an SVG plot of the energy trajectories.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Locate the branch point of the configured model.
    LocateEp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "omega")]
        solve_for: SolveForArg,
        /// State pair to coalesce, 1-based "i,j" (models with more than two levels).
        #[arg(long)]
        pair: Option<String>,
    },
    /// Emit the dataset(s) for one of the canned figures.
    Figure {
        n: u8,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SVG plots.
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveForArg {
    Omega,
    GammaScale,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("epscope: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run() -> Result<(), (u8, String)> {
    match Cli::parse().command {
        Command::Sweep { config, out, svg } => cmd_sweep(&config, out, svg),
        Command::LocateEp {
            config,
            solve_for,
            pair,
        } => cmd_locate_ep(&config, solve_for, pair.as_deref()),
        Command::Figure { n, out, svg } => cmd_figure(n, out, svg),
    }
}

fn load_config(path: &std::path::Path) -> Result<RunConfig, (u8, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
    config::parse_str(&text).map_err(|e| (EXIT_CONFIG, format!("{}: {e}", path.display())))
}

/// EPSCOPE_TOLERANCE beats the config's output.tolerance, which beats the
/// built-in default.
fn tolerance(cfg: &RunConfig) -> Result<f64, (u8, String)> {
    if let Ok(raw) = std::env::var("EPSCOPE_TOLERANCE") {
        let t: f64 = raw
            .parse()
            .map_err(|_| (EXIT_CONFIG, format!("invalid EPSCOPE_TOLERANCE '{raw}'")))?;
        if !(t > 0.0) {
            return Err((EXIT_CONFIG, format!("EPSCOPE_TOLERANCE must be positive, got {t}")));
        }
        return Ok(t);
    }
    Ok(cfg.output.tolerance.unwrap_or(epscope::DEFAULT_TOLERANCE))
}

fn cmd_sweep(
    config_path: &std::path::Path,
    out: Option<PathBuf>,
    svg: Option<PathBuf>,
) -> Result<(), (u8, String)> {
    let cfg = load_config(config_path)?;
    let result = run_sweep(&cfg.model, &cfg.grid).map_err(|e| (EXIT_NUMERIC, e.to_string()))?;
    let csv = sweep_csv(&result);
    match out.or(cfg.output.csv) {
        Some(path) => std::fs::write(&path, csv)
            .map_err(|e| (EXIT_NUMERIC, format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    if let Some(path) = svg.or(cfg.output.svg) {
        let title = config_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        std::fs::write(&path, sweep_svg(&result, &title))
            .map_err(|e| (EXIT_NUMERIC, format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn parse_pair(raw: &str, n: usize) -> Result<(usize, usize), (u8, String)> {
    let bad = || (EXIT_CONFIG, format!("invalid --pair '{raw}', expected 1-based 'i,j'"));
    let (i, j) = raw.split_once(',').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 || i > n || j > n || i == j {
        return Err((
            EXIT_CONFIG,
            format!("--pair {raw} out of range for a {n}-level model"),
        ));
    }
    Ok((i - 1, j - 1))
}

fn cmd_locate_ep(
    config_path: &std::path::Path,
    solve_for: SolveForArg,
    pair: Option<&str>,
) -> Result<(), (u8, String)> {
    let cfg = load_config(config_path)?;
    let tol = tolerance(&cfg)?;
    let n = cfg.model.n();
    let bp = if n == 2 {
        let sf = match solve_for {
            SolveForArg::Omega => SolveFor::Omega,
            SolveForArg::GammaScale => SolveFor::GammaScale,
        };
        locate_ep_2level(&cfg.model, sf)
    } else {
        let pair = parse_pair(pair.unwrap_or("1,2"), n)?;
        let target = match solve_for {
            SolveForArg::GammaScale => ScaleTarget::AllWidths,
            SolveForArg::Omega => ScaleTarget::CouplingEntry(pair.0, pair.1),
        };
        let search = SearchBox {
            a: (cfg.grid.a_min, cfg.grid.a_max),
            scale: (0.05, 20.0),
        };
        locate_ep_numeric_tol(&cfg.model, pair, target, search, tol)
    };
    let bp = match bp {
        Ok(bp) => bp,
        Err(e @ (EpError::NoCrossing | EpError::NotBracketed)) => {
            return Err((EXIT_NO_EP, e.to_string()))
        }
        Err(e) => return Err((EXIT_NUMERIC, e.to_string())),
    };
    print_branch_point(&bp);
    Ok(())
}

fn print_branch_point(bp: &BranchPoint) {
    let x = format_complex(bp.value);
    match &bp.param {
        CriticalParam::Omega(w) => {
            println!("a_cr={:.6} omega_cr={:.6} X={x}", bp.a_cr, w);
        }
        CriticalParam::WidthScale { scale, gamma_cr } => {
            let gammas: Vec<String> = gamma_cr.iter().map(|g| format!("{g:.6}")).collect();
            println!(
                "a_cr={:.6} gamma_scale={:.6} gamma_cr={} X={x}",
                bp.a_cr,
                scale,
                gammas.join(",")
            );
        }
        CriticalParam::CouplingScale { k, l, scale } => {
            println!(
                "a_cr={:.6} coupling_scale_{}_{}={:.6} X={x}",
                bp.a_cr,
                k + 1,
                l + 1,
                scale
            );
        }
    }
    println!("residual={:.3e}", bp.residual);
}

fn format_complex(z: num_complex::Complex64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{:.6}{}{:.6}i", z.re, sign, z.im.abs())
}

fn cmd_figure(n: u8, out: Option<PathBuf>, svg: bool) -> Result<(), (u8, String)> {
    let dir = out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| (EXIT_CONFIG, format!("cannot create {}: {e}", dir.display())))?;
    let paths = run_figure(n, &dir, svg).map_err(|e| match e {
        FigureError::UnknownFigure(_) => (EXIT_CONFIG, e.to_string()),
        _ => (EXIT_NUMERIC, e.to_string()),
    })?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}
