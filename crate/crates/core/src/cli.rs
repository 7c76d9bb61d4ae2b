//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 physics error (unstable or
//! singular system, no convergence), 4 internal-consistency or I/O failure.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::figures::{self, FigurePreset};
use crate::linear::build_system;
use crate::output::{spectrum_table, sweep_table, Cell, Table};
use crate::params::{
    cyclic, freeze_drive_power, paper_preset, power_from_drive_amplitude, thermal_occupation,
    Drive, SystemParams, PRESETS, THZ,
};
use crate::plot::{self, CellValue, Series};
use crate::spectra::{self, FrequencyGrid};
use crate::steady;
use crate::sweep::{
    run_sweep, Axis, AxisRange, DriveConvention, OmegaWindow, ParamPath, PhaseChoice, Quantity,
    SweepResult, SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "epsqueeze",
    version,
    about = "Output-field squeezing spectra of a driven exciton-phonon-photon microcavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParamArgs {
    /// Named parameter set (list them with `epsqueeze presets`).
    #[arg(long, default_value = "fig2a")]
    preset: String,
    /// Override a parameter, e.g. `--set rates.kappa_d=0.5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DriveArg {
    AsGiven,
    FixedAmplitude,
    FixedPower,
    FixedTarget,
}

impl From<DriveArg> for DriveConvention {
    fn from(d: DriveArg) -> Self {
        match d {
            DriveArg::AsGiven => DriveConvention::AsGiven,
            DriveArg::FixedAmplitude => DriveConvention::FixedAmplitude,
            DriveArg::FixedPower => DriveConvention::FixedPower,
            DriveArg::FixedTarget => DriveConvention::FixedTarget,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classical steady state, effective couplings and cooperativity.
    SteadyState {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Stability margin on max Re(λ), rad/s.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
    },
    /// Output-quadrature noise spectrum S_φ(ω).
    Spectrum {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Homodyne angle: `optimal`, a multiple of π such as `0.75pi`, or radians.
        #[arg(long, default_value = "optimal")]
        phi: String,
        /// Frequency grid `start:end:points`, in units of ω_b.
        #[arg(long, default_value = "-2:2:2001", allow_hyphen_values = true)]
        grid: String,
        /// Stability margin on max Re(λ), rad/s.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Squeezing levels (dB) whose bandwidths are reported.
        #[arg(long, value_delimiter = ',', default_value = "3")]
        thresholds: Vec<f64>,
        /// Also write an SVG plot here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Optimal homodyne angle at one frequency, or at the best frequency of a grid.
    OptimizePhase {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Analysis frequency in units of ω_b (default: search the grid).
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        /// Search grid `start:end:points`, in units of ω_b.
        #[arg(long, default_value = "-2:2:2001", allow_hyphen_values = true)]
        grid: String,
        /// Stability margin on max Re(λ), rad/s.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
    },
    /// One- or two-dimensional parameter sweep with stability masking.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// First axis: `key=start:end:points[:log]` or `key=v1,v2,...`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Optional second axis, same syntax.
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        /// Quantities: nsd, db, max-db, omega-at-max, cooperativity,
        /// photon-number, exciton-number, max-re-eig.
        #[arg(long = "quantity", value_delimiter = ',', default_value = "max-db")]
        quantities: Vec<String>,
        /// `optimal`, `per-curve`, a multiple of π such as `0.75pi`, or radians.
        #[arg(long, default_value = "optimal")]
        phi: String,
        /// What stays fixed about the drive across the sweep.
        #[arg(long, value_enum, default_value_t = DriveArg::FixedPower)]
        drive: DriveArg,
        /// Analysis frequency (ω_b) when ω is not an axis.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        /// Window `start:end:points` (ω_b) searched by max-db and omega-at-max.
        #[arg(long, default_value = "-2:2:2001", allow_hyphen_values = true)]
        window: String,
        /// Points with max Re(λ) ≥ −margin (rad/s) are masked as unstable.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Also write an SVG plot here (heatmap for two range axes).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Regenerate the data of a named figure.
    Figure {
        /// Figure name (fig2a ... fig4d).
        name: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
        /// Override the number of points on every range axis.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// List parameter presets and figures.
    Presets,
}

/// Run the CLI on the process arguments and return the exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::SteadyState { params, output, margin } => {
            let p = resolve_params(&params)?;
            emit(&steady_state_table(&p, margin)?, &output)
        }
        Command::Spectrum { params, output, phi, grid, margin, thresholds, plot } => {
            let p = resolve_params(&params)?;
            spectrum(&p, &output, &phi, &grid, margin, &thresholds, plot.as_deref())
        }
        Command::OptimizePhase { params, output, omega, grid, margin } => {
            let p = resolve_params(&params)?;
            emit(&optimize_phase_table(&p, omega, &grid, margin)?, &output)
        }
        Command::Sweep {
            params,
            output,
            x,
            y,
            quantities,
            phi,
            drive,
            omega,
            window,
            margin,
            plot,
        } => {
            let base = resolve_params(&params)?;
            let mut axes = vec![parse_axis(&x)?];
            if let Some(y) = y {
                axes.push(parse_axis(&y)?);
            }
            let quantities = quantities
                .iter()
                .map(|q| Quantity::parse(q.trim()))
                .collect::<Result<Vec<_>>>()?;
            let (start, end, points) = parse_grid(&window)?;
            let spec = SweepSpec {
                drive: drive.into(),
                phi: parse_phase_choice(&phi)?,
                omega,
                omega_window: OmegaWindow { start, end, points },
                margin: check_margin(margin)?,
                ..SweepSpec::new(base, axes, quantities)
            };
            let result = run_sweep(&spec)?;
            emit(&sweep_output(&spec, &result)?, &output)?;
            if let Some(path) = plot {
                fs::write(path, sweep_plot("sweep", &spec, &result))?;
            }
            Ok(())
        }
        Command::Figure { name, out, format, plot, resolution } => {
            let mut preset = figures::figure_preset(&name)?;
            if let Some(points) = resolution {
                if points == 0 {
                    return Err(Error::Config("resolution must be at least 1".into()));
                }
                preset = figures::with_resolution(preset, points);
            }
            write_figure(&preset, &out, format, plot)
        }
        Command::Presets => {
            let mut text = String::from("parameter presets (--preset):\n");
            for (name, description) in PRESETS {
                text.push_str(&format!("  {name:<18} {description}\n"));
            }
            text.push_str("\nfigures (epsqueeze figure NAME):\n");
            for (name, description) in figures::FIGURES {
                text.push_str(&format!("  {name:<18} {description}\n"));
            }
            text.push_str("\nparameter keys (--set, sweep axes):\n");
            for path in ParamPath::ALL {
                text.push_str(&format!("  {:<22} {}\n", path.key(), path.unit().label()));
            }
            write_stdout(text.as_bytes())
        }
    }
}

fn parse_number(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("cannot parse {what} `{text}` as a number")))
}

fn parse_assignment(text: &str) -> Result<(ParamPath, f64)> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{text}`")))?;
    let path = ParamPath::parse(key.trim())?;
    Ok((path, parse_number(value, key.trim())?))
}

/// Preset plus `--set` overrides.
///
/// A preset defined by a target |G_db| is first frozen to the laser power it
/// implies, unless an override sets the drive itself; overriding e.g. g_db
/// then changes the physics at fixed power instead of being compensated.
fn resolve_params(args: &ParamArgs) -> Result<SystemParams> {
    let mut params = paper_preset(&args.preset)?;
    let overrides = args
        .set
        .iter()
        .map(|s| parse_assignment(s))
        .collect::<Result<Vec<_>>>()?;
    if !overrides.is_empty()
        && matches!(params.drive, Drive::TargetGdb(_))
        && !overrides.iter().any(|(p, _)| p.is_drive())
    {
        params = freeze_drive_power(&params)?;
    }
    for &(path, value) in overrides.iter().filter(|(p, _)| !p.is_detuning()) {
        path.apply(&mut params, value)?;
    }
    for &(path, value) in overrides.iter().filter(|(p, _)| p.is_detuning()) {
        path.apply(&mut params, value)?;
    }
    params.validate()?;
    Ok(params)
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, points] = parts.as_slice() else {
        return Err(Error::Config(format!("expected start:end:points, got `{text}`")));
    };
    let points = points
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("cannot parse point count `{points}`")))?;
    Ok((parse_number(start, "grid start")?, parse_number(end, "grid end")?, points))
}

fn frequency_grid(text: &str, omega_b: f64) -> Result<Vec<f64>> {
    let (start, end, points) = parse_grid(text)?;
    FrequencyGrid {
        start: start * omega_b,
        end: end * omega_b,
        points,
    }
    .values()
}

fn parse_axis(text: &str) -> Result<Axis> {
    let (key, range) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected KEY=RANGE for an axis, got `{text}`")))?;
    let path = ParamPath::parse(key.trim())?;
    let range = if range.contains(':') {
        let (spec, log) = match range.strip_suffix(":log") {
            Some(r) => (r, true),
            None => (range, false),
        };
        let (start, end, points) = parse_grid(spec)?;
        if log {
            AxisRange::Log { start, end, points }
        } else {
            AxisRange::Linear { start, end, points }
        }
    } else {
        let values = range
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(|v| parse_number(v, key.trim()))
            .collect::<Result<Vec<_>>>()?;
        AxisRange::List { values }
    };
    Ok(Axis { path, range })
}

/// `None` means optimize the angle.
fn parse_phi(text: &str) -> Result<Option<f64>> {
    let t = text.trim();
    if t == "optimal" {
        return Ok(None);
    }
    match t.strip_suffix("pi") {
        Some("") => Ok(Some(PI)),
        Some(factor) => Ok(Some(parse_number(factor.trim_end_matches('*'), "phi")? * PI)),
        None => Ok(Some(parse_number(t, "phi")?)),
    }
}

fn parse_phase_choice(text: &str) -> Result<PhaseChoice> {
    if text.trim() == "per-curve" {
        return Ok(PhaseChoice::OptimalPerCurve);
    }
    Ok(match parse_phi(text)? {
        Some(phi) => PhaseChoice::Fixed(phi),
        None => PhaseChoice::Optimal,
    })
}

fn check_margin(margin: f64) -> Result<f64> {
    if margin.is_finite() && margin >= 0.0 {
        Ok(margin)
    } else {
        Err(Error::Config(format!("margin must be finite and ≥ 0, got {margin}")))
    }
}

fn stable_system(params: &SystemParams, margin: f64) -> Result<crate::StableSystem> {
    let op = steady::solve(params)?;
    build_system(&op, params)?.into_stable(check_margin(margin)?)
}

fn params_metadata(table: &mut Table, params: &SystemParams) -> Result<()> {
    table.meta("generator", format!("epsqueeze {}", env!("CARGO_PKG_VERSION")));
    table.meta("params_hash", params.fingerprint());
    table.meta("params", serde_json::to_string(params)?);
    Ok(())
}

fn write_stdout(bytes: &[u8]) -> Result<()> {
    let mut stdout = io::stdout().lock();
    match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn render(table: &Table, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => {
            let mut bytes = Vec::new();
            table.write_csv(&mut bytes)?;
            bytes
        }
        Format::Json => table.to_json()?.into_bytes(),
    })
}

fn emit(table: &Table, output: &OutputArgs) -> Result<()> {
    let bytes = render(table, output.format)?;
    match &output.out {
        Some(path) => Ok(fs::write(path, bytes)?),
        None => write_stdout(&bytes),
    }
}

fn steady_state_table(params: &SystemParams, margin: f64) -> Result<Table> {
    let op = steady::solve(params)?;
    let sys = build_system(&op, params)?;
    let stability = sys.stability(check_margin(margin)?)?;
    let power = power_from_drive_amplitude(op.omega_drive, params.kappa_1, params.laser_frequency())?;
    let ghz = |w: f64| cyclic(w) / 1e9;

    let mut table = Table::new(&["quantity", "value", "unit"]);
    params_metadata(&mut table, params)?;
    let mut row = |name: &str, value: Cell, unit: &str| {
        table.rows.push(vec![Cell::Text(name.into()), value, Cell::Text(unit.into())]);
    };
    row("drive_omega", (cyclic(op.omega_drive) / THZ).into(), "THz (Omega/2pi)");
    row("laser_power", (power * 1e3).into(), "mW");
    row("a_re", op.a_ss.re.into(), "");
    row("a_im", op.a_ss.im.into(), "");
    row("d_re", op.d_ss.re.into(), "");
    row("d_im", op.d_ss.im.into(), "");
    row("b_re", op.b_ss.re.into(), "");
    row("b_im", op.b_ss.im.into(), "");
    row("photon_number", op.photon_number().into(), "");
    row("exciton_number", op.exciton_number().into(), "");
    row("delta_a_eff", (op.delta_a_eff / params.omega_b).into(), "omega_b");
    row("delta_d_eff", (op.delta_d_eff / params.omega_b).into(), "omega_b");
    row("G_ab_re", ghz(op.g_ab_eff.re).into(), "GHz (/2pi)");
    row("G_ab_im", ghz(op.g_ab_eff.im).into(), "GHz (/2pi)");
    row("G_db_re", ghz(op.g_db_eff.re).into(), "GHz (/2pi)");
    row("G_db_im", ghz(op.g_db_eff.im).into(), "GHz (/2pi)");
    row("G_db_abs", ghz(op.g_db_eff.norm()).into(), "GHz (/2pi)");
    row("cooperativity", steady::cooperativity(&op, params)?.into(), "");
    row("phonon_occupation", thermal_occupation(params.omega_b, params.temperature)?.into(), "");
    row("max_re_eig", stability.max_real_eig.into(), "rad/s");
    row("stable", stability.stable.into(), "");
    Ok(table)
}

fn spectrum(
    params: &SystemParams,
    output: &OutputArgs,
    phi: &str,
    grid: &str,
    margin: f64,
    thresholds: &[f64],
    plot_path: Option<&Path>,
) -> Result<()> {
    let phi = parse_phi(phi)?;
    let omegas = frequency_grid(grid, params.omega_b)?;
    let sys = stable_system(params, margin)?;
    let hash = params.fingerprint();
    let spectrum = match phi {
        Some(phi) => spectra::spectrum_fixed(&sys, &omegas, phi, &hash)?,
        None => spectra::spectrum_optimal(&sys, &omegas, &hash)?,
    };
    let summary = spectra::summarize(&spectrum, thresholds)?;

    let mut table = spectrum_table(&spectrum, params.omega_b);
    params_metadata(&mut table, params)?;
    table.meta("max_dB", format!("{}", summary.max_db));
    table.meta("omega_at_max", format!("{}", summary.omega_at_max / params.omega_b));
    for (level, bw) in &summary.bandwidth_above {
        table.meta(&format!("bandwidth_above_{level}dB"), format!("{}", bw / params.omega_b));
    }
    emit(&table, output)?;

    if let Some(path) = plot_path {
        let series = Series {
            label: match phi {
                Some(phi) => format!("phi = {:.3} pi", phi / PI),
                None => "optimal phi".into(),
            },
            points: spectrum
                .omegas
                .iter()
                .zip(spectrum.db_values())
                .map(|(w, db)| (w / params.omega_b, Some(db)))
                .collect(),
        };
        let svg = plot::line_plot("Output squeezing", "omega / omega_b", "squeezing (dB)", &[series]);
        fs::write(path, svg)?;
    }
    Ok(())
}

fn optimize_phase_table(params: &SystemParams, omega: Option<f64>, grid: &str, margin: f64) -> Result<Table> {
    let sys = stable_system(params, margin)?;
    let (omega, s_min, phi) = match omega {
        Some(w) => {
            let o = spectra::optimal_phase(&sys, w * params.omega_b)?;
            (w * params.omega_b, o.s_min, o.phi)
        }
        None => {
            let peak = spectra::peak_squeezing(&sys, &frequency_grid(grid, params.omega_b)?, None)?;
            (peak.omega, peak.s, peak.phi)
        }
    };
    let mut table = Table::new(&["omega_over_omega_b", "phi", "S_min", "dB"]);
    params_metadata(&mut table, params)?;
    table.meta("units", "omega in omega_b, phi in multiples of pi");
    table.rows.push(vec![
        Cell::Num(omega / params.omega_b),
        Cell::Num(phi / PI),
        Cell::Num(s_min),
        spectra::squeezing_db(s_min).ok().into(),
    ]);
    Ok(table)
}

fn sweep_output(spec: &SweepSpec, result: &SweepResult) -> Result<Table> {
    let mut table = sweep_table(result);
    params_metadata(&mut table, &spec.base)?;
    table.meta("sweep", serde_json::to_string(spec)?);
    Ok(table)
}

fn axis_label(key: &str, unit: &str) -> String {
    format!("{key} ({unit})")
}

fn sweep_plot(title: &str, spec: &SweepSpec, result: &SweepResult) -> String {
    let quantity = result
        .quantities
        .iter()
        .copied()
        .find(|&q| q == Quantity::Db)
        .unwrap_or(result.quantities[0]);
    let column = result.column(quantity).expect("quantity present");
    let x = &result.axes[0];
    match result.axes.as_slice() {
        [_] => {
            let series: Vec<Series> = result
                .quantities
                .iter()
                .zip(&result.values)
                .map(|(q, col)| Series {
                    label: q.column().to_string(),
                    points: x.values.iter().copied().zip(col.iter().copied()).collect(),
                })
                .collect();
            plot::line_plot(title, &axis_label(x.key, x.unit), "value", &series)
        }
        [_, y] if matches!(spec.axes[1].range, AxisRange::List { .. }) => {
            let n = y.values.len();
            let series: Vec<Series> = y
                .values
                .iter()
                .enumerate()
                .map(|(j, v)| Series {
                    label: format!("{} = {v} {}", y.key, y.unit),
                    points: x
                        .values
                        .iter()
                        .enumerate()
                        .map(|(i, &xv)| (xv, column[i * n + j]))
                        .collect(),
                })
                .collect();
            plot::line_plot(title, &axis_label(x.key, x.unit), quantity.column(), &series)
        }
        [_, y] => {
            let n = y.values.len();
            plot::heatmap(
                title,
                &axis_label(x.key, x.unit),
                &axis_label(y.key, y.unit),
                &x.values,
                &y.values,
                |i, j| {
                    let k = i * n + j;
                    if !result.stable[k] {
                        CellValue::Unstable
                    } else if result.above_vacuum[k] && quantity == Quantity::Db {
                        CellValue::Blank
                    } else {
                        column[k].map_or(CellValue::Blank, CellValue::Value)
                    }
                },
            )
        }
        _ => unreachable!("sweeps have one or two axes"),
    }
}

fn write_figure(preset: &FigurePreset, dir: &Path, format: Format, with_plot: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    for panel in &preset.panels {
        let stem = if preset.panels.len() == 1 {
            preset.name.to_string()
        } else {
            format!("{}-{}", preset.name, panel.label)
        };
        let result = run_sweep(&panel.spec)?;
        let mut table = sweep_output(&panel.spec, &result)?;
        table.meta("figure", preset.name);
        let path = dir.join(format!("{stem}.{}", format.extension()));
        fs::write(&path, render(&table, format)?)?;
        if with_plot {
            let title = format!("{stem}: {}", preset.description);
            fs::write(dir.join(format!("{stem}.svg")), sweep_plot(&title, &panel.spec, &result))?;
        }
        let unstable = result.stable.iter().filter(|s| !**s).count();
        eprintln!(
            "wrote {} ({} points, {} unstable)",
            path.display(),
            result.len(),
            unstable
        );
    }
    Ok(())
}
