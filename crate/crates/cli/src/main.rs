//! `viscowave` - batch front end for the spectral traveling-wave solver.
//!
//! Subcommands: `symbols` (tabulate the Fourier symbols), `solve-linear`
//! (one gravity-capillary inversion on data files), `solve` (nonlinear
//! traveling-wave iteration), `validate` (acceptance battery).
//!
//! Exit codes: 0 success, 2 validation failure, 3 divergence, 4 config error.

mod config;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::RunConfig;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use viscowave::field::{SurfaceField, VolumeField};
use viscowave::grid::HorizontalGrid;
use viscowave::io as fieldio;
use viscowave::linear::{solve_gravity_capillary, DataQuadruple};
use viscowave::nonlinear::solve_traveling_wave;
use viscowave::norms::xs_norm;
use viscowave::oracles::forward_operator;
use viscowave::params::Frequency;
use viscowave::quadrature::VerticalNodes;
use viscowave::symbols::{eval_m, m_asymptotic_infty, m_asymptotic_zero, rho_value};
use viscowave::Error as WaveError;

const EXIT_VALIDATION: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "viscowave", version, about = "Spectral solver for viscous traveling free-surface waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = auto); falls back to VISCOWAVE_THREADS.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the symbols m and rho over a log-spaced frequency grid.
    Symbols,
    /// Solve the linear gravity-capillary problem on data files.
    SolveLinear,
    /// Run the nonlinear traveling-wave iteration.
    Solve,
    /// Run the acceptance battery and emit a machine-readable verdict.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = if cli.threads > 0 {
        cli.threads
    } else {
        std::env::var("VISCOWAVE_THREADS").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
    };
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // typed solver failures map to distinct codes
            if let Some(wave) = e.downcast_ref::<WaveError>() {
                match wave {
                    WaveError::Diverged { .. } | WaveError::MaxIterations { .. } => {
                        return ExitCode::from(EXIT_DIVERGED)
                    }
                    _ => {}
                }
            }
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config_path = cli.config.clone().context("--config is required")?;
    let mut config = RunConfig::load(&config_path)?;
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating {}", config.output_dir.display()))?;
    match cli.command {
        Command::Symbols => cmd_symbols(&config),
        Command::SolveLinear => cmd_solve_linear(&config, &config_path),
        Command::Solve => cmd_solve(&config),
        Command::Validate => cmd_validate(&config),
    }
}

/// CSV table of m, rho, and the asymptotic reference ratios.
fn cmd_symbols(config: &RunConfig) -> Result<ExitCode> {
    let params = config.wave_params()?;
    let section = &config.symbols;
    let path = config.output_dir.join("symbols.csv");
    let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(
        w,
        "xi_mag,xi1,re_m,im_m,re_rho,im_rho,m_zero_ref,m_infty_ref,ratio_zero,ratio_infty"
    )?;
    // zero-frequency row first
    writeln!(w, "0,0,0,0,0,0,0,nan,nan,nan")?;
    let lo = section.xi_min.ln();
    let hi = section.xi_max.ln();
    for i in 0..section.samples {
        let mag = (lo + (hi - lo) * i as f64 / (section.samples - 1) as f64).exp();
        let xi = Frequency::new_1d(mag);
        let m = eval_m(&xi, params.gamma, params.b).map_err(anyhow::Error::from)?;
        let rho = rho_value(&xi, &params).map_err(anyhow::Error::from)?;
        let zero_ref = m_asymptotic_zero(&xi, &params).re;
        let infty_ref = m_asymptotic_infty(&xi, &params).re;
        writeln!(
            w,
            "{mag:e},{mag:e},{:e},{:e},{:e},{:e},{zero_ref:e},{infty_ref:e},{:e},{:e}",
            m.re,
            m.im,
            rho.re,
            rho.im,
            m.re / zero_ref,
            m.re / infty_ref,
        )?;
        if m.re >= 0.0 {
            anyhow::bail!("symbol table check failed: Re m >= 0 at |xi| = {mag}");
        }
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn resolve(base: &Path, rel: &Path) -> PathBuf {
    if rel.is_absolute() {
        rel.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(rel)
    }
}

#[derive(serde::Serialize)]
struct LinearReport {
    eta_xs_norm: f64,
    eta_hs_norm: f64,
    u_l2_norms: Vec<f64>,
    q_l2_norm: f64,
    round_trip_residual: f64,
}

/// One linear gravity-capillary inversion on externally supplied data.
fn cmd_solve_linear(config: &RunConfig, config_path: &Path) -> Result<ExitCode> {
    let params = config.wave_params()?;
    let section = config
        .linear_data
        .as_ref()
        .context("config section [linear_data] is required for solve-linear")?;
    let n = params.n();
    let f = fieldio::read_volume_fields::<f64>(&resolve(config_path, &section.f))
        .map_err(anyhow::Error::from)?;
    let g_all = fieldio::read_volume_fields::<f64>(&resolve(config_path, &section.g))
        .map_err(anyhow::Error::from)?;
    let (h_all, _) = fieldio::read_surface_fields::<f64>(&resolve(config_path, &section.h))
        .map_err(anyhow::Error::from)?;
    let (k, _) = fieldio::read_surface_fields::<f64>(&resolve(config_path, &section.k))
        .map_err(anyhow::Error::from)?;
    anyhow::ensure!(f.len() == n, "f must have {n} components");
    anyhow::ensure!(g_all.len() == 1, "g must be a single scalar field");
    anyhow::ensure!(h_all.len() == 1, "h must be a single surface spectrum");
    anyhow::ensure!(k.len() == n, "k must have {n} components");
    let nodes = f[0].nodes.clone();
    let data = DataQuadruple::assemble(f, g_all.into_iter().next().unwrap(),
        h_all.into_iter().next().unwrap(), k, &nodes);

    let solution = match solve_gravity_capillary(&data, &params) {
        Ok(s) => s,
        Err(WaveError::CompatibilityViolated { residual, tol }) => {
            eprintln!("compatibility violated at the zero mode: residual {residual:.3e} (tol {tol:.1e})");
            return Ok(ExitCode::from(EXIT_VALIDATION));
        }
        Err(e) => return Err(e.into()),
    };

    // outputs
    let out = &config.output_dir;
    fieldio::write_volume_fields(&out.join("u.vwf"), &solution.u).map_err(anyhow::Error::from)?;
    fieldio::write_volume_fields(&out.join("q.vwf"), &[solution.q.clone()])
        .map_err(anyhow::Error::from)?;
    fieldio::write_volume_fields(&out.join("p.vwf"), &[solution.pressure()])
        .map_err(anyhow::Error::from)?;
    fieldio::write_surface_fields(&out.join("eta.vwf"), &[solution.eta.clone()], params.b)
        .map_err(anyhow::Error::from)?;
    fieldio::write_surface_csv(&out.join("eta_spectrum.csv"), &solution.eta)
        .map_err(anyhow::Error::from)?;

    let recovered = forward_operator(&solution, &params);
    let mut diff = recovered.clone();
    diff.axpy(-1.0, &data);
    let residual = diff.y0_norm() / data.y0_norm().max(1e-300);
    let weights = nodes.weights().to_vec();
    let l2 = |field: &VolumeField<f64>| -> f64 {
        let mut acc = 0.0;
        for mode in 0..field.grid.num_modes() {
            for (node, &wq) in weights.iter().enumerate() {
                acc += field.data[[mode, node]].norm_sqr() * wq;
            }
        }
        (acc * field.grid.cell_measure()).sqrt()
    };
    let report = LinearReport {
        eta_xs_norm: xs_norm(&solution.eta, 2.5).xs,
        eta_hs_norm: xs_norm(&solution.eta, 2.5).hs,
        u_l2_norms: solution.u.iter().map(l2).collect(),
        q_l2_norm: l2(&solution.q),
        round_trip_residual: residual,
    };
    let report_path = out.join("linear_report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    println!("wrote solution fields and {}", report_path.display());
    Ok(ExitCode::SUCCESS)
}

/// The nonlinear traveling-wave solve.
fn cmd_solve(config: &RunConfig) -> Result<ExitCode> {
    let params = config.wave_params()?;
    if params.gamma == 0.0 {
        anyhow::bail!("gamma must be nonzero for the nonlinear solve");
    }
    let grid = HorizontalGrid::<f64>::new(params.horiz_dim, config.grid.npts, config.grid.length)
        .map_err(anyhow::Error::from)?;
    let nodes = VerticalNodes::<f64>::new(config.vertical_order(), params.b);
    let forcing = config.forcing_spec();
    let cfg = config.iteration_config();
    let result = solve_traveling_wave(&forcing, &params, &grid, &nodes, &cfg);
    let (state, report) = match result {
        Ok(v) => v,
        Err(e @ (WaveError::Diverged { .. } | WaveError::MaxIterations { .. })) => {
            eprintln!("solver did not converge: {e}");
            return Ok(ExitCode::from(EXIT_DIVERGED));
        }
        Err(e) => return Err(e.into()),
    };
    let out = &config.output_dir;
    fieldio::write_volume_fields(&out.join("u.vwf"), &state.u).map_err(anyhow::Error::from)?;
    fieldio::write_volume_fields(&out.join("q.vwf"), &[state.q.clone()])
        .map_err(anyhow::Error::from)?;
    fieldio::write_surface_fields(&out.join("eta.vwf"), &[state.eta.clone()], params.b)
        .map_err(anyhow::Error::from)?;
    write_eta_profile(&out.join("eta_profile.csv"), &state.eta)?;
    std::fs::write(&out.join("convergence.json"), serde_json::to_string_pretty(&report)?)?;
    println!(
        "converged in {} iterations, final residual {:.3e}; outputs in {}",
        report.iterations.len(),
        report.final_residual,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn write_eta_profile(path: &Path, eta: &SurfaceField<f64>) -> Result<()> {
    let values = eta.to_physical().map_err(anyhow::Error::from)?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    if eta.grid.d == 1 {
        writeln!(w, "x,eta")?;
        for (p, v) in values.iter().enumerate() {
            writeln!(w, "{:e},{:e}", eta.grid.point(p)[0], v)?;
        }
    } else {
        writeln!(w, "x1,x2,eta")?;
        for (p, v) in values.iter().enumerate() {
            let x = eta.grid.point(p);
            writeln!(w, "{:e},{:e},{:e}", x[0], x[1], v)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// The acceptance battery with machine-readable verdicts.
fn cmd_validate(config: &RunConfig) -> Result<ExitCode> {
    let reports = viscowave::validation::run_all();
    let mut all_pass = true;
    for report in &reports {
        println!("{}", report.one_line());
        all_pass &= report.pass;
    }
    let path = config.output_dir.join("validation.json");
    std::fs::write(&path, serde_json::to_string_pretty(&reports)?)?;
    println!("wrote {}", path.display());
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VALIDATION) })
}
