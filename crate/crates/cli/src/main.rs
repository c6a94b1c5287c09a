use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sdi_duality::dataio::{ExtremumMode, DEFAULT_MEAN_TOTAL, DEFAULT_PHI_X_SETTINGS};
use sdi_duality::interferometer::PHI_S_RANGE;
use sdi_duality_cli::{
    cmd_analyze, cmd_bounds, cmd_optimize_quantum, cmd_scan, cmd_synthesize, cmd_verify_classical, cmd_witness,
    BoundsInput, CliError, CliResult, CommandOutput, Format,
};

#[derive(Parser)]
#[command(
    name = "sdi-duality",
    version,
    about = "Dimension-witness certification from visibility and distinguishability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    MaxMin,
    Fit,
}

impl From<ModeArg> for ExtremumMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::MaxMin => ExtremumMode::MaxMin,
            ModeArg::Fit => ExtremumMode::SinusoidFit,
        }
    }
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Write the output here; the manifest goes to `<out>.manifest.json`.
    /// Without it, output goes to stdout and the manifest to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// D, V and S/2 = D + V over a TBS range, with threshold lines.
    Scan {
        #[arg(long, default_value_t = PHI_S_RANGE.0, allow_negative_numbers = true)]
        phi_s_min: f64,
        #[arg(long, default_value_t = PHI_S_RANGE.1, allow_negative_numbers = true)]
        phi_s_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustive classical maximum of the witness (must be 2).
    VerifyClassical {
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// See-saw maximization of the witness over qubit strategies.
    OptimizeQuantum {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = sdi_duality::bounds::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Security verdict from P_B or from (D, V).
    Bounds {
        #[arg(long = "pb")]
        pb: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Estimates D, V and S/2 with Poisson errors from a scan CSV.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "max-min")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// S and P_B at (phi_s, phi_x); maximizes over phi_x when omitted.
    Witness {
        #[arg(long, allow_negative_numbers = true)]
        phi_s: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi_x: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Poisson-sampled scan CSV for testing the analysis pipeline.
    Synthesize {
        #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
        phi_s: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_PHI_X_SETTINGS)]
        settings: usize,
        #[arg(long, default_value_t = DEFAULT_MEAN_TOTAL)]
        mean_total: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn emit(out: &CommandOutput, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => {
            fs::write(p, &out.body)?;
            let mut manifest_path = p.as_os_str().to_owned();
            manifest_path.push(".manifest.json");
            fs::write(manifest_path, out.manifest.to_json() + "\n")?;
        }
        None => {
            io::stdout().write_all(out.body.as_bytes())?;
            writeln!(io::stderr(), "{}", out.manifest.to_json())?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Scan { phi_s_min, phi_s_max, steps, format, output } => {
            emit(&cmd_scan(phi_s_min, phi_s_max, steps, format.into())?, output.out.as_deref())
        }
        Command::VerifyClassical { format, output } => {
            if matches!(format, FormatArg::Csv) {
                return Err(CliError::Usage(
                    "verify-classical emits a JSON report; --format csv is not supported".into(),
                ));
            }
            let (out, status) = cmd_verify_classical(format.into());
            emit(&out, output.out.as_deref())?;
            status
        }
        Command::OptimizeQuantum { seed, restarts, format, output } => {
            let (out, status) = cmd_optimize_quantum(seed, restarts, format.into())?;
            emit(&out, output.out.as_deref())?;
            status
        }
        Command::Bounds { pb, d, v, format, output } => {
            let input = BoundsInput::from_flags(pb, d, v)?;
            emit(&cmd_bounds(input, format.into())?, output.out.as_deref())
        }
        Command::Analyze { file, mode, format, output } => {
            let reader = fs::File::open(&file)?;
            let out = cmd_analyze(reader, &file.display().to_string(), mode.into(), format.into())?;
            emit(&out, output.out.as_deref())
        }
        Command::Witness { phi_s, phi_x, format, output } => {
            emit(&cmd_witness(phi_s, phi_x, format.into())?, output.out.as_deref())
        }
        Command::Synthesize { phi_s, settings, mean_total, seed, output } => {
            emit(&cmd_synthesize(&phi_s, settings, mean_total, seed)?, output.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
