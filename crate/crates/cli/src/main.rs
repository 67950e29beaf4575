use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spinbound_cli::emit::{emit_csv, emit_svg, write_csv};
use spinbound_cli::figures::write_figures;
use spinbound_cli::gridfile::read_grid_file;
use spinbound_cli::sweep::{parse_grid, run_sweep, Family, SeriesSpec, SweepSpec, DEFAULT_TOL};
use spinbound_cli::{BoundCurve, CliError, Result};
use spinbound_core::bounds::TrivialPrefactor;
use spinbound_core::optimize::{optimize_beta, DEFAULT_BETA_HI};
use spinbound_core::spectrum::{flat_spectrum, skew_lattice_report};
use spinbound_core::{BoundKind, ConformalFactorField, Lattice2, SpinStructure};

/// Bounds for the first Dirac eigenvalue on ellipsoids, tubes and tori.
#[derive(Parser)]
#[command(name = "spinbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the ellipsoid parameter a.
    Ellipsoid {
        #[command(flatten)]
        common: Common,
        /// Exponents for UPPER_T1 (comma separated).
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
    },
    /// Sweep r*kappa for a tube around a circle of curvature kappa.
    Tube {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value = "1,1", value_parser = parse_spin)]
        spin: SpinStructure,
        /// Prefactor of the trivial-structure bound.
        #[arg(long, value_enum, default_value_t = Prefactor::Nominal)]
        prefactor: Prefactor,
    },
    /// Sweep a stretch of the second basis vector of a conformally flat torus.
    Torus {
        #[command(flatten)]
        common: Common,
        /// Basis `x1,y1;x2,y2`.
        #[arg(long, default_value = "1,0;0,1", value_parser = parse_lattice)]
        lattice: Lattice2,
        /// Conformal factor grid file; h = 1 when absent.
        #[arg(long)]
        h_grid: Option<PathBuf>,
        #[arg(long, default_value = "0,0", value_parser = parse_spin)]
        spin: SpinStructure,
    },
    /// Minimize the UPPER_T1 family over beta for one ellipsoid.
    OptimizeBeta {
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 0.55)]
        lo: f64,
        #[arg(long, default_value_t = DEFAULT_BETA_HI)]
        hi: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Smallest eigenvalues of D^2 on a flat torus.
    Spectrum {
        #[arg(long, default_value = "1,0;0,1", value_parser = parse_lattice)]
        lattice: Lattice2,
        #[arg(long, default_value = "0,0", value_parser = parse_spin)]
        spin: SpinStructure,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Regenerate the five comparison datasets (CSV and SVG).
    Figures {
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// `lo:hi:n` or a comma-separated list.
    #[arg(long)]
    grid: Option<String>,
    /// Bound kinds (comma separated); defaults depend on the surface.
    #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
    kinds: Vec<BoundKind>,
    /// Report lambda_1^2 * vol.
    #[arg(long)]
    normalized: bool,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Prefactor {
    Nominal,
    Lattice,
}

fn parse_kind(s: &str) -> std::result::Result<BoundKind, String> {
    s.parse().map_err(|e: spinbound_core::Error| e.to_string())
}

fn parse_spin(s: &str) -> std::result::Result<SpinStructure, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [e1, e2] = parts[..] else {
        return Err(format!("spin structure must be 'e1,e2', got '{s}'"));
    };
    let bit = |t: &str| t.parse::<u8>().map_err(|_| format!("bad spin entry '{t}'"));
    SpinStructure::new(bit(e1)?, bit(e2)?).map_err(|e| e.to_string())
}

fn parse_lattice(s: &str) -> std::result::Result<Lattice2, String> {
    let vecs: Vec<[f64; 2]> = s
        .split(';')
        .map(|v| {
            let c: Vec<f64> = v
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad lattice entry '{t}'")))
                .collect::<std::result::Result<_, _>>()?;
            <[f64; 2]>::try_from(c).map_err(|_| format!("lattice vector '{v}' needs two components"))
        })
        .collect::<std::result::Result<_, _>>()?;
    let [v1, v2] = vecs[..] else {
        return Err(format!("lattice must be 'x1,y1;x2,y2', got '{s}'"));
    };
    Lattice2::new(v1, v2).map_err(|e| e.to_string())
}

fn series(kinds: &[BoundKind], betas: &[f64], defaults: &[BoundKind]) -> Result<Vec<SeriesSpec>> {
    let kinds = if kinds.is_empty() { defaults } else { kinds };
    if !betas.is_empty() && !kinds.contains(&BoundKind::UpperT1) {
        return Err(CliError::Spec("--beta needs UPPER_T1 among the kinds".into()));
    }
    let mut out = Vec::new();
    for &k in kinds {
        if k == BoundKind::UpperT1 && !betas.is_empty() {
            out.extend(betas.iter().map(|&b| SeriesSpec::t1(b)));
        } else {
            out.push(SeriesSpec::new(k));
        }
    }
    Ok(out)
}

fn emit(curve: &BoundCurve, common: &Common) -> Result<()> {
    if let Some(path) = &common.svg {
        emit_svg(curve, path)?;
    }
    match &common.csv {
        Some(path) => emit_csv(curve, path),
        None if common.svg.is_some() => Ok(()),
        None => {
            spinbound_cli::emit::check_ordering(curve)?;
            let stdout = io::stdout();
            write_csv(curve, stdout.lock()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn sweep_command(
    family: Family,
    common: Common,
    spin: SpinStructure,
    series: Vec<SeriesSpec>,
    grid: &str,
) -> Result<u8> {
    let grid = parse_grid(common.grid.as_deref().unwrap_or(grid))?;
    let spec = SweepSpec {
        spin,
        ..SweepSpec::new(family, grid, series)
    }
    .with_tol(common.tol)
    .with_normalized(common.normalized);
    Ok(run_and_report(spec, &common)?.into_iter().max().unwrap_or(0))
}

fn run_and_report(spec: SweepSpec, common: &Common) -> Result<Vec<u8>> {
    let curve = run_sweep(&spec)?;
    emit(&curve, common)?;
    for f in &curve.failures {
        eprintln!("warning: {}={} {}: {}", curve.param_name, f.param, f.label, f.message);
    }
    Ok(curve.failures.iter().map(|f| f.exit_code).collect())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Ellipsoid { common, beta } => {
            use BoundKind::*;
            let series = series(&common.kinds, &beta, &[LowerLb, UpperH2, UpperT1, UpperT2])?;
            sweep_command(
                Family::Ellipsoid,
                common,
                SpinStructure::TRIVIAL,
                series,
                "0.05:0.95:19",
            )
        }
        Command::Tube {
            common,
            kappa,
            spin,
            prefactor,
        } => {
            use BoundKind::*;
            let defaults: &[BoundKind] = if spin.is_trivial() {
                &[TubeTrivial, TubeH2]
            } else {
                &[TubeStar, TubeDstar, TubeH2]
            };
            let series = series(&common.kinds, &[], defaults)?;
            let prefactor = match prefactor {
                Prefactor::Nominal => TrivialPrefactor::Nominal,
                Prefactor::Lattice => TrivialPrefactor::Lattice,
            };
            sweep_command(Family::Tube { kappa, prefactor }, common, spin, series, "0.05:0.95:19")
        }
        Command::Torus {
            common,
            lattice,
            h_grid,
            spin,
        } => {
            use BoundKind::*;
            let defaults: &[BoundKind] = if spin.is_trivial() {
                &[UpperT3]
            } else {
                &[UpperT4Star, UpperT4Dstar, UpperT4Curv]
            };
            let series = series(&common.kinds, &[], defaults)?;
            let factor = match h_grid {
                Some(path) => read_grid_file(path)?,
                None => ConformalFactorField::constant(1.0)?,
            };
            sweep_command(Family::Torus { lattice, factor }, common, spin, series, "1")
        }
        Command::OptimizeBeta { a, lo, hi, tol } => {
            let r = optimize_beta(a, lo, hi, tol)?;
            let mut out = io::stdout().lock();
            let lines = format!(
                "beta_star={:.16e}\nvalue={:.16e}\niterations={}\npinned_at_boundary={}\nstarts_disagree={}\n",
                r.beta_star, r.value, r.iterations, r.pinned_at_boundary, r.starts_disagree
            );
            out.write_all(lines.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))?;
            Ok(0)
        }
        Command::Spectrum { lattice, spin, count } => {
            let slice = flat_spectrum(&lattice, spin, count)?;
            let mut text = format!("# spin {spin}, kernel dimension {}\n", slice.kernel_dimension());
            if !spin.is_trivial() {
                let r = skew_lattice_report(&lattice, spin)?;
                text.push_str(&format!(
                    "# lambda1^2 vol = {:.16e}, constant = {:.16e}, unsquared constant = {}, undercuts = {}\n",
                    r.spectral,
                    r.constant_squared,
                    r.constant_unsquared
                        .map_or("undefined".to_string(), |c| format!("{c:.16e}")),
                    r.undercuts
                ));
            }
            for v in &slice.eigenvalue_squares {
                text.push_str(&format!("{v:.16e}\n"));
            }
            io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))?;
            Ok(0)
        }
        Command::Figures { out, tol } => {
            let mut code = 0;
            for (path, curve) in write_figures(&out, tol)? {
                for f in &curve.failures {
                    eprintln!(
                        "warning: {}: {}={} {}: {}",
                        path.display(),
                        curve.param_name,
                        f.param,
                        f.label,
                        f.message
                    );
                    code = code.max(f.exit_code);
                }
                println!("{}", path.display());
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
