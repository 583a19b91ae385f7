//! Command-line front end: runs scenarios, sweeps beams, codes links, and
//! converts waveform files. Every command validates its whole configuration
//! before writing anything, so a bad invocation leaves no partial artifacts.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use parray::dsp::FilterMode;
use parray::io::{
    export_pattern_csv, export_spectrum_csv, export_waveform, import_waveform, load_scenario,
    write_json_report, FileFormat,
};
use parray::sim::{
    random_bits, run_distances, run_link, run_scan, run_simulate, Scenario, SimulationOutput,
};
use parray::waveform::Waveform;
use parray::{dsp, Error};

#[derive(Parser)]
#[command(
    name = "parray",
    version,
    about = "Parametric-array simulation and signal design",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the characteristic ranges of a scenario's geometry
    Distances {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Run one symbol end to end and write every record it produces
    Simulate {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Format for waveform artifacts (the spectrum is always CSV)
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Sweep a receiver across the beam and measure the half-power width
    Scan {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Half-span of the sweep on each side of the axis, meters
        #[arg(long, default_value_t = 0.4)]
        span_m: f64,
        /// Receiver spacing, meters
        #[arg(long, default_value_t = 0.025)]
        step_m: f64,
    },
    /// Transmit a coded bit sequence through the channel and decode it
    Link {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Explicit message as a string of + and - characters, e.g. "+--+"
        #[arg(long)]
        bits: Option<String>,
        /// Length of the random message used when --bits is absent
        #[arg(long, default_value_t = 64)]
        n_symbols: usize,
        /// Format for the received and reference records
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Convert a waveform file to another format
    Export {
        /// Source waveform, .csv or .wav
        input: PathBuf,
        /// Target format
        #[arg(long, value_enum)]
        format: FormatArg,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Read a waveform file and summarize it
    Import {
        /// Source waveform, .csv or .wav
        input: PathBuf,
        /// Source format; inferred from the extension when omitted
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Directory for the summary JSON; summary prints to stdout regardless
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file; built-in defaults are used when omitted
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory for artifacts
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the scenario's filter mode
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Override the scenario's noise seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum FormatArg {
    Csv,
    Wav,
    Json,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    Causal,
    ZeroPhase,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario, Error> {
        let mut s = match &self.scenario {
            Some(path) => load_scenario(path)?,
            None => Scenario::default(),
        };
        if let Some(mode) = self.mode {
            s.filter_mode = match mode {
                ModeArg::Causal => FilterMode::Causal,
                ModeArg::ZeroPhase => FilterMode::ZeroPhase,
            };
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        Ok(s)
    }
}

/// Waveform artifacts are time series; JSON is reserved for reports.
fn waveform_format(arg: FormatArg) -> Result<FileFormat, String> {
    match arg {
        FormatArg::Csv => Ok(FileFormat::Csv),
        FormatArg::Wav => Ok(FileFormat::Wav),
        FormatArg::Json => Err("waveform records are written as csv or wav, not json".into()),
    }
}

fn extension(format: FileFormat) -> &'static str {
    match format {
        FileFormat::Csv => "csv",
        FileFormat::Wav => "wav",
    }
}

fn infer_format(path: &Path) -> Result<FileFormat, String> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => Ok(FileFormat::Csv),
        Some(e) if e.eq_ignore_ascii_case("wav") => Ok(FileFormat::Wav),
        _ => Err(format!(
            "cannot infer a format from {:?}; pass --format csv or --format wav",
            path.display()
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("parray: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Run(e)) => {
            eprintln!("parray: {e}");
            ExitCode::FAILURE
        }
    }
}

enum AppError {
    /// The invocation itself is wrong; exits 2 like other argument errors.
    Usage(String),
    /// A stage failed while executing a valid invocation; exits 1.
    Run(Error),
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Run(e)
    }
}

impl From<String> for AppError {
    fn from(msg: String) -> Self {
        AppError::Usage(msg)
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Distances { args } => cmd_distances(&args),
        Command::Simulate { args, format } => cmd_simulate(&args, format),
        Command::Scan { args, span_m, step_m } => cmd_scan(&args, span_m, step_m),
        Command::Link {
            args,
            bits,
            n_symbols,
            format,
        } => cmd_link(&args, bits.as_deref(), n_symbols, format),
        Command::Export { input, format, out } => cmd_export(&input, format, &out),
        Command::Import { input, format, out } => cmd_import(&input, format, out.as_deref()),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir).map_err(|e| {
        AppError::Run(Error::Io {
            path: dir.display().to_string(),
            source: e,
        })
    })
}

fn cmd_distances(args: &ScenarioArgs) -> Result<(), AppError> {
    let scenario = args.scenario()?;
    let report = run_distances(&scenario)?;
    ensure_dir(&args.out)?;
    write_json_report(&report, &args.out.join("distances.json"))?;
    println!("rayleigh distance  R_F = {:9.3} m", report.rayleigh_distance_m);
    println!("absorption range   R_a = {:9.3} m", report.absorption_range_m);
    println!("shock distance     R_s = {:9.3} m", report.shock_distance_m);
    if report.in_collimated_zone {
        println!(
            "range {:.3} m is inside the collimated near field (range < R_F)",
            report.range_m
        );
    } else {
        println!(
            "range {:.3} m is beyond the collimated near field (range > R_F)",
            report.range_m
        );
    }
    Ok(())
}

fn print_simulation_report(out: &SimulationOutput) {
    let r = &out.report;
    println!("peak correlation    {:.4}", r.peak_correlation);
    println!("arrival time        {:.6e} s", r.arrival_time_s);
    match r.phase_vs_positive_deg {
        Some(p) => println!("phase vs positive   {p:.2} deg"),
        None => println!("phase vs positive   (not measurable)"),
    }
    match r.measured_frequency_hz {
        Some(f) => println!("measured frequency  {f:.1} Hz"),
        None => println!("measured frequency  (not measurable)"),
    }
    println!("peak pressure       {:.4} Pa", r.peak_pressure_pa);
    println!("carrier rejection   {:.1} dB", r.carrier_rejection_db);
    println!("source level        {:.2} dB re 1 uPa at 1 m", r.source_level_db);
    for w in &r.warnings {
        println!("warning: {w}");
    }
}

fn cmd_simulate(args: &ScenarioArgs, format: FormatArg) -> Result<(), AppError> {
    let format = waveform_format(format)?;
    let scenario = args.scenario()?;
    let out = run_simulate(&scenario)?;
    ensure_dir(&args.out)?;
    let ext = extension(format);
    let records: [(&str, &Waveform); 4] = [
        ("drive", &out.drive),
        ("primary_at_range", &out.primary_at_range),
        ("demodulated_raw", &out.demodulated_raw),
        ("demodulated_filtered", &out.demodulated_filtered),
    ];
    for (name, record) in records {
        if scenario.wants(name) {
            export_waveform(record, &args.out.join(format!("{name}.{ext}")), format)?;
        }
    }
    if scenario.wants("spectrum") {
        export_spectrum_csv(&args.out.join("spectrum.csv"), &out.spectrum)?;
    }
    if scenario.wants("report") {
        write_json_report(&out.report, &args.out.join("report.json"))?;
    }
    print_simulation_report(&out);
    Ok(())
}

fn cmd_scan(args: &ScenarioArgs, span_m: f64, step_m: f64) -> Result<(), AppError> {
    let scenario = args.scenario()?;
    let out = run_scan(&scenario, span_m, step_m)?;
    ensure_dir(&args.out)?;
    export_pattern_csv(
        &args.out.join("pattern.csv"),
        &out.positions_m,
        &out.angles_deg,
        &out.normalized_rms_db,
    )?;
    write_json_report(&out.report, &args.out.join("scan_report.json"))?;
    println!(
        "beamwidth {:.3} deg from {} positions (analytic {:.3} deg)",
        out.report.beamwidth_deg, out.report.n_positions, out.report.analytic_beamwidth_deg
    );
    for w in &out.report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn parse_bits(text: &str) -> Result<Vec<i8>, String> {
    if text.is_empty() {
        return Err("--bits must hold at least one + or - symbol".into());
    }
    text.chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            other => Err(format!("--bits holds {other:?}; only + and - are meaningful")),
        })
        .collect()
}

fn cmd_link(
    args: &ScenarioArgs,
    bits: Option<&str>,
    n_symbols: usize,
    format: FormatArg,
) -> Result<(), AppError> {
    let format = waveform_format(format)?;
    let scenario = args.scenario()?;
    let bits = match bits {
        Some(text) => parse_bits(text)?,
        None => {
            if n_symbols == 0 {
                return Err(AppError::Usage("--n-symbols must be at least 1".into()));
            }
            random_bits(n_symbols, scenario.seed)
        }
    };
    let out = run_link(&scenario, &bits)?;
    ensure_dir(&args.out)?;
    let ext = extension(format);
    export_waveform(&out.received, &args.out.join(format!("received.{ext}")), format)?;
    export_waveform(&out.reference, &args.out.join(format!("reference.{ext}")), format)?;
    write_json_report(&out.report, &args.out.join("link_report.json"))?;
    let render = |bits: &[i8]| -> String {
        bits.iter().map(|&b| if b > 0 { '+' } else { '-' }).collect()
    };
    println!("sent    {}", render(&out.report.sent));
    println!("decoded {}", render(&out.report.decoded));
    println!(
        "{} of {} symbols correct at noise fraction {} (seed {})",
        out.report.n_correct,
        out.report.n_symbols,
        out.report.noise_rms_fraction,
        out.report.seed
    );
    Ok(())
}

fn cmd_export(input: &Path, format: FormatArg, out: &Path) -> Result<(), AppError> {
    let target = waveform_format(format)?;
    let source = infer_format(input)?;
    let w = import_waveform(input, source)?;
    ensure_dir(out)?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("waveform");
    let path = out.join(format!("{stem}.{}", extension(target)));
    export_waveform(&w, &path, target)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(serde::Serialize)]
struct WaveformInfo {
    path: String,
    n_samples: usize,
    sample_rate_hz: f64,
    start_time_s: f64,
    duration_s: f64,
    rms: f64,
    peak_abs: f64,
}

fn cmd_import(
    input: &Path,
    format: Option<FormatArg>,
    out: Option<&Path>,
) -> Result<(), AppError> {
    let source = match format {
        Some(arg) => waveform_format(arg)?,
        None => infer_format(input)?,
    };
    let w = import_waveform(input, source)?;
    let info = WaveformInfo {
        path: input.display().to_string(),
        n_samples: w.len(),
        sample_rate_hz: w.sample_rate_hz,
        start_time_s: w.start_time_s,
        duration_s: w.duration_s(),
        rms: dsp::rms(&w, None)?,
        peak_abs: w.samples.iter().fold(0f64, |m, v| m.max(v.abs())),
    };
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_json_report(&info, &dir.join("waveform_info.json"))?;
    }
    println!("{}", input.display());
    println!("  samples      {}", info.n_samples);
    println!("  sample rate  {} Hz", info.sample_rate_hz);
    println!("  start        {:.6e} s", info.start_time_s);
    println!("  duration     {:.6e} s", info.duration_s);
    println!("  rms          {:.6e}", info.rms);
    println!("  peak         {:.6e}", info.peak_abs);
    Ok(())
}
