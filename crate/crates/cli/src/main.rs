//! `quasiprob`: verification suites and plot-ready data for signed probability objects.

mod config;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use quasiprob::grid::{GridDensity, UniformGrid};
use quasiprob::mixtures::{catalog, catalog_family, linnik_density};
use quasiprob::quasibayes::{bump_coeffs, feynman_table, total_probability, SineSeriesSolution};
use quasiprob::series::{binomial_pgf, halfcoin_coeffs};
use quasiprob::tol::Settings;
use quasiprob::transforms::{completely_monotone_test, dual_density};
use quasiprob::verify::{run_suite, Suite};
use quasiprob::wigner::{phase_axis, wigner_transform, State, Wavefunction, GRID_POINTS};

use crate::config::ConfigError;
use crate::output::Sink;

#[derive(Parser)]
#[command(name = "quasiprob", version, about = "Numerics for signed probability objects")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone)]
struct Common {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Grid points (overrides `grid_points`).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Series order (overrides `series_order`).
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Tolerance: replaces every check tolerance in `verify`, and `mass_tol` elsewhere.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Configuration file (default `quasiprob.json` in the working directory).
    #[arg(long, global = true, env = "QUASIPROB_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Runs an identity suite; prints one JSON record per check.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Writes a catalog object.
    Emit(EmitArgs),
    /// Dual density of a tabulated density.
    Dual {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Half-coin generating-function coefficients.
    Halfcoin,
    /// Marginals of the signed conditional table.
    Feynman,
    /// Heat equation on `[0, π]` by sine series.
    Diffusion(DiffusionArgs),
    /// Wigner function on a phase-space grid.
    Wigner(WignerArgs),
    /// Linnik density on a symmetric grid.
    Linnik(LinnikArgs),
    /// Complete-monotonicity test of a named function.
    Cmtest {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value_t = 0.1)]
        from: f64,
        #[arg(long, default_value_t = 10.0)]
        to: f64,
    },
}

#[derive(Args)]
struct EmitArgs {
    /// halfcoin, reciprocal, dual, wigner, linnik, diffusion, feynman, family or gneiting.
    object: String,
    /// Family for `dual` and `family`.
    #[arg(long, default_value = "laplace")]
    family: String,
    #[arg(long, default_value = "gaussian")]
    state: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Success probability for `reciprocal`.
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value = "bump")]
    init: String,
    #[arg(long, default_value_t = 0.1)]
    t: f64,
    #[arg(long = "half-width", default_value_t = 8.0)]
    half_width: f64,
}

#[derive(Args)]
struct DiffusionArgs {
    /// `bump` or `mode:n`.
    #[arg(long, default_value = "bump")]
    init: String,
    #[arg(long, default_value_t = 0.1)]
    t: f64,
}

#[derive(Args)]
struct WignerArgs {
    /// `gaussian`, `hermite1` or `squeezed:σ`.
    #[arg(long, default_value = "gaussian")]
    state: String,
}

#[derive(Args)]
struct LinnikArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long = "half-width", default_value_t = 8.0)]
    half_width: f64,
}

/// Terms of the sine series when `--order` is absent.
const DIFFUSION_TERMS: usize = 1024;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let settings = match config::resolve(&cli.common) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &settings) {
        Ok(code) => code,
        Err(e) => {
            if e.downcast_ref::<ConfigError>().is_some() {
                eprintln!("configuration error: {e:#}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: &Cli, settings: &Settings) -> anyhow::Result<ExitCode> {
    let c = &cli.common;
    let sink = Sink::new(c.out.clone(), c.format == FormatArg::Json);
    match &cli.command {
        Command::Verify { suite } => {
            let suite: Suite = suite.parse().map_err(|e| ConfigError(format!("{e}")))?;
            return verify(suite, settings, c.tol, &sink);
        }
        Command::Emit(a) => emit(a, c, settings, &sink)?,
        Command::Dual { input } => {
            let d = read_density(input)?;
            sink.density(&dual_density(&d)?)?;
        }
        Command::Halfcoin => sink.series(&halfcoin_coeffs(settings.series_order))?,
        Command::Feynman => feynman(&sink)?,
        Command::Diffusion(a) => sink.density(&diffusion(&a.init, a.t, c, settings)?)?,
        Command::Wigner(a) => wigner(&a.state, c, &sink)?,
        Command::Linnik(a) => sink.density(&linnik(a.alpha, a.half_width, settings)?)?,
        Command::Cmtest { function, from, to } => cmtest(function, (*from, *to), c.order.unwrap_or(8), &sink)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(suite: Suite, settings: &Settings, tol: Option<f64>, sink: &Sink) -> anyhow::Result<ExitCode> {
    let records = run_suite(suite, settings, tol);
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    sink.raw(&text)?;
    let failed: Vec<&str> = records.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} of {} checks failed: {}", failed.len(), records.len(), failed.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn emit(a: &EmitArgs, c: &Common, settings: &Settings, sink: &Sink) -> anyhow::Result<()> {
    match a.object.as_str() {
        "halfcoin" => sink.series(&halfcoin_coeffs(settings.series_order)),
        "reciprocal" => {
            let r = binomial_pgf(-1, a.p, settings.series_order)?;
            sink.series(&r)
        }
        "dual" => sink.density(&dual_density(&family_grid(&a.family, c.grid)?)?),
        "family" => sink.density(&family_grid(&a.family, c.grid)?),
        "wigner" => wigner(&a.state, c, sink),
        "linnik" => sink.density(&linnik(a.alpha, a.half_width, settings)?),
        "diffusion" => sink.density(&diffusion(&a.init, a.t, c, settings)?),
        "feynman" => feynman(sink),
        "gneiting" => gneiting(sink),
        other => Err(anyhow!("unknown catalog object `{other}`")),
    }
}

/// A catalog density on `[-40, 40]`: step `1/1024` by default, or `--grid` points.
fn family_grid(name: &str, points: Option<usize>) -> anyhow::Result<GridDensity> {
    let fam = catalog_family(name).ok_or_else(|| anyhow!("unknown family `{name}`"))?;
    let p = fam
        .density_closed_form
        .clone()
        .ok_or_else(|| anyhow!("family `{name}` has no closed-form density"))?;
    let grid = match points {
        Some(n) => UniformGrid::symmetric(40.0, n)?,
        None => UniformGrid::new(-40.0, 1.0 / 1024.0, 81_921)?,
    };
    Ok(GridDensity::from_fn(grid, |x| p(x))?)
}

fn read_density(path: &PathBuf) -> anyhow::Result<GridDensity> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let d = if path.extension().is_some_and(|e| e == "json") {
        GridDensity::from_json(&text)?
    } else {
        GridDensity::read_csv(text.as_bytes())?
    };
    Ok(d)
}

fn feynman(sink: &Sink) -> anyhow::Result<()> {
    let table = feynman_table();
    let m = total_probability(&table)?;
    let rows: Vec<(String, f64)> = table.states().iter().cloned().zip(m.weights()).collect();
    sink.labelled(("state", "probability"), &rows)
}

fn gneiting(sink: &Sink) -> anyhow::Result<()> {
    let mut rows = Vec::new();
    for fam in catalog() {
        let s = quasiprob::mixtures::gneiting_product(&fam)?;
        rows.push((fam.name.clone(), quasiprob::verify::spread_marker(s)));
    }
    sink.labelled_text(("family", "product"), &rows)
}

fn diffusion(init: &str, t: f64, c: &Common, settings: &Settings) -> anyhow::Result<GridDensity> {
    let terms = c.order.unwrap_or(DIFFUSION_TERMS);
    let sol: SineSeriesSolution = match init {
        "bump" => bump_coeffs(terms),
        s => {
            let n: usize = s
                .strip_prefix("mode:")
                .and_then(|v| v.parse().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| anyhow!("unknown initial condition `{s}`"))?;
            let mut coeffs = vec![0.0; n];
            coeffs[n - 1] = 1.0;
            SineSeriesSolution::new(coeffs)
        }
    };
    let sol = sol.at_time(t)?;
    let points = settings.grid_points;
    if points < 2 {
        bail!("diffusion needs at least two grid points");
    }
    let grid = UniformGrid::linspace(0.0, PI, points)?;
    Ok(GridDensity::new(grid, grid.points().into_iter().map(|x| sol.eval(x)).collect())?)
}

fn wigner(state: &str, c: &Common, sink: &Sink) -> anyhow::Result<()> {
    let state = State::parse(state)?;
    let n = c.grid.unwrap_or(GRID_POINTS);
    let (lx, lp) = state.extent();
    let psi = Wavefunction::from_fn(phase_axis(lx, n)?, |x| state.eval(x))?;
    let w = wigner_transform(&psi, &phase_axis(lp, n)?)?;
    sink.wigner(&w)
}

/// Pointwise Linnik density on a symmetric grid, evaluated on one side and mirrored.
fn linnik(alpha: f64, half_width: f64, settings: &Settings) -> anyhow::Result<GridDensity> {
    let n = settings.grid_points;
    if n % 2 == 0 {
        bail!("linnik needs an odd number of grid points so the origin is a node");
    }
    let grid = UniformGrid::symmetric(half_width, n)?;
    let mid = n / 2;
    let mut values = vec![0.0; n];
    for i in mid..n {
        let v = linnik_density(alpha, grid.point(i))?;
        if v.slowly_convergent {
            log::warn!("Linnik density at the origin is infinite for α ≤ 1; the value is a truncation");
        }
        values[i] = v.value;
        values[n - 1 - i] = v.value;
    }
    Ok(GridDensity::new(grid, values)?)
}

fn cmtest(name: &str, domain: (f64, f64), order: usize, sink: &Sink) -> anyhow::Result<()> {
    let f: fn(f64) -> f64 = match name {
        "exp" => |x| (-x).exp(),
        "exp_sqrt" => |x| (-x.sqrt()).exp(),
        "rational" => |x| 1.0 / (1.0 + x),
        "gaussian" => |x| (-x * x).exp(),
        _ => bail!("unknown function `{name}`; expected exp, exp_sqrt, rational or gaussian"),
    };
    let r = completely_monotone_test(f, domain, order)?;
    let doc = serde_json::json!({
        "function": name,
        "order": r.order,
        "pass": r.pass,
        "violation_x": r.violation.map(|v| v.0),
        "violation_order": r.violation.map(|v| v.1),
        "step": r.step,
        "tol": r.tol,
    });
    sink.raw(&format!("{doc}\n"))
}
