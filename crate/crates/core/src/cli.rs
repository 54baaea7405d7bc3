//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or computation failure, 2 usage error,
//! 3 verification failure. Payloads go to standard output as JSON or CSV;
//! the run manifest and diagnostics go to standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgAction, Args, ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::{json, Value};

use crate::channel::{ChannelKind, NoiseKind, QuantumChannel};
use crate::error::Error;
use crate::fidelity::{commutator_defect, KrausIndex};
use crate::harness::{
    default_sweep_grid, linspace, render, sweep, verify_formulas, ExportFormat, RunManifest,
    SweepMode, SweepSpec, VerifyGrids, XI_COMPUTATIONAL, XI_DIAGONAL,
};
use crate::protocol::{
    decode_bit, encode_bit, run_protocol, transmit_message, Bit, ProtocolConfig, StagePolicy,
};
use crate::quadrature::QuadratureSpec;
use crate::qubit::{fidelity, Mat2};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "threestage",
    version,
    about = "Noisy three-stage protocol simulator"
)]
struct Cli {
    /// Read every angle flag in degrees instead of radians.
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    degrees: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the protocol once and report fidelity and decoding probabilities.
    Run(RunArgs),
    /// Sweep a noise parameter and export closed-form and/or oracle fidelities.
    Sweep(SweepArgs),
    /// Compare closed-form fidelities with the numeric oracle.
    Verify(VerifyArgs),
    /// Print the amplitude-damping Kraus/rotation commutators.
    Commutators(CommutatorArgs),
    /// Send a bit string and report the decoded string and QBER.
    Message(MessageArgs),
}

#[derive(Args, Debug)]
struct ProtocolArgs {
    /// Noise kind: ad, pd, cd, cr or none.
    #[arg(long)]
    noise: String,
    /// Noise parameter: η for ad/pd, Φ for cd, Θ for cr.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    param: f64,
    /// State angle ξ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    xi: f64,
    /// Alice's rotation angle θ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alice_angle: f64,
    /// Bob's rotation angle φ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bob_angle: f64,
    /// Resample the parameter per pass with this spread (independent noise per pass).
    #[arg(long, allow_negative_numbers = true)]
    resample_spread: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, default_value_t = 0)]
    bit: u8,
}

#[derive(Args, Debug)]
struct MessageArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Message as a string of 0/1 characters.
    #[arg(long)]
    bits: String,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Noise kind: ad, pd, cd or cr.
    #[arg(long)]
    noise: String,
    /// Parameter grid: `start:end:count` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// State angles: comma list, `start:end:count`, or the names
    /// `computational` and `diagonal`.
    #[arg(long, allow_hyphen_values = true)]
    xi_grid: Option<String>,
    /// Add a ξ-averaged row per parameter.
    #[arg(long, action = ArgAction::SetTrue)]
    xi_avg: bool,
    /// closed_form, oracle or both.
    #[arg(long, default_value = "closed_form")]
    mode: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Oracle nodes per rotation axis.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Nodes for ξ averages.
    #[arg(long, default_value_t = 1024)]
    xi_resolution: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated subset of ad,pd,cd,cr.
    #[arg(long, default_value = "ad,pd,cd,cr")]
    kinds: String,
    #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
    tolerance: f64,
    /// Oracle nodes per rotation axis.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
}

#[derive(Args, Debug)]
struct CommutatorArgs {
    #[arg(long, allow_negative_numbers = true)]
    eta: f64,
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => Failure::Usage(m),
            other => Failure::Io(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{flag}: {msg}"))
}

struct Angles {
    degrees: bool,
}

impl Angles {
    fn convert(&self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }
}

/// Parses `start:end:count` or a comma-separated list of numbers.
pub fn parse_grid(flag: &str, text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err(format!("{flag}: grid is empty"));
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => single
            .split(',')
            .map(|v| {
                let v = v.trim();
                v.parse::<f64>()
                    .map_err(|_| format!("{flag}: '{v}' is not a number"))
            })
            .collect(),
        [start, end, count] => {
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("{flag}: '{s}' is not a number"))
            };
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("{flag}: point count '{count}' is not a positive integer"))?;
            if n == 0 {
                return Err(format!("{flag}: point count must be positive"));
            }
            Ok(linspace(num(start)?, num(end)?, n))
        }
        _ => Err(format!(
            "{flag}: expected start:end:count or a comma list, got '{text}'"
        )),
    }
}

fn parse_xi_grid(text: &str, angles: &Angles) -> Result<Vec<f64>, String> {
    let named = |s: &str| match s.trim() {
        "computational" => Some(XI_COMPUTATIONAL),
        "diagonal" => Some(XI_DIAGONAL),
        _ => None,
    };
    if !text.contains(':') && text.split(',').any(|p| named(p).is_some()) {
        return text
            .split(',')
            .map(|p| match named(p) {
                Some(v) => Ok(v),
                None => parse_grid("--xi-grid", p).map(|g| angles.convert(g[0])),
            })
            .collect();
    }
    Ok(parse_grid("--xi-grid", text)?
        .into_iter()
        .map(|x| angles.convert(x))
        .collect())
}

fn parse_noise(text: &str) -> CliResult<NoiseKind> {
    text.parse().map_err(|e| usage("--noise", e))
}

fn channel_from(args: &ProtocolArgs, angles: &Angles) -> CliResult<QuantumChannel<f64>> {
    let kind: ChannelKind = args.noise.parse().map_err(|e| usage("--noise", e))?;
    let param = match kind.noise() {
        Some(k) if !k.is_probabilistic() => angles.convert(args.param),
        _ => args.param,
    };
    QuantumChannel::from_kind(kind, param).map_err(|e| usage("--param", e))
}

fn config_from(args: &ProtocolArgs, angles: &Angles) -> CliResult<ProtocolConfig<f64>> {
    let channel = channel_from(args, angles)?;
    let mut config = ProtocolConfig::new(
        angles.convert(args.xi),
        angles.convert(args.alice_angle),
        angles.convert(args.bob_angle),
        channel,
    )?;
    if let Some(spread) = args.resample_spread {
        config = config
            .with_stage_policy(StagePolicy::ResamplePerStage {
                seed: args.seed,
                spread,
            })
            .map_err(|e| usage("--resample-spread", e))?;
    }
    Ok(config)
}

fn print_json(out: &mut dyn Write, value: &Value) -> CliResult<()> {
    writeln!(out, "{value}").map_err(|e| Failure::Io(format!("standard output: {e}")))
}

fn matrix_json(m: &Mat2<f64>) -> Value {
    let cell = |r, c| {
        let z = m.get(r, c);
        json!([z.re, z.im])
    };
    json!([[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]])
}

fn cmd_run(args: &RunArgs, angles: &Angles, out: &mut dyn Write) -> CliResult<RunManifest> {
    let bit = Bit::try_from(args.bit).map_err(|e| usage("--bit", e))?;
    let config = config_from(&args.protocol, angles)?;
    let (rho, _) = run_protocol(&config, bit)?;
    let f = fidelity(&encode_bit(bit, config.xi), &rho)?;
    let (p0, p1) = decode_bit(&rho, config.xi)?;
    print_json(
        out,
        &json!({
            "noise": config.channel.kind().as_str(),
            "param": config.channel.parameter(),
            "xi": config.xi,
            "alice_angle": config.alice_angle,
            "bob_angle": config.bob_angle,
            "bit": bit.as_u8(),
            "fidelity": f,
            "p0": p0,
            "p1": p1,
        }),
    )?;
    let mut manifest = RunManifest::new(args.protocol.seed, &QuadratureSpec::default());
    manifest.stage_policy = Some(config.stage_policy.label().to_string());
    Ok(manifest)
}

fn cmd_message(args: &MessageArgs, angles: &Angles, out: &mut dyn Write) -> CliResult<RunManifest> {
    let bits = Bit::parse_string(&args.bits).map_err(|e| usage("--bits", e))?;
    let config = config_from(&args.protocol, angles)?;
    let outcome = transmit_message(&bits, &config, args.protocol.seed)?;
    print_json(
        out,
        &json!({
            "sent": Bit::format_bits(&bits),
            "decoded": Bit::format_bits(&outcome.decoded),
            "qber": outcome.qber,
        }),
    )?;
    let mut manifest = RunManifest::new(args.protocol.seed, &QuadratureSpec::default());
    manifest.stage_policy = Some(config.stage_policy.label().to_string());
    Ok(manifest)
}

fn cmd_sweep(args: &SweepArgs, angles: &Angles, out: &mut dyn Write) -> CliResult<RunManifest> {
    let kind = parse_noise(&args.noise)?;
    let mode: SweepMode = args.mode.parse().map_err(|e| usage("--mode", e))?;
    let format: ExportFormat = args.format.parse().map_err(|e| usage("--format", e))?;
    let param_grid = match &args.grid {
        Some(text) => {
            let grid = parse_grid("--grid", text).map_err(Failure::Usage)?;
            if kind.is_probabilistic() {
                grid
            } else {
                grid.into_iter().map(|x| angles.convert(x)).collect()
            }
        }
        None => default_sweep_grid(kind),
    };
    let xi_grid = match &args.xi_grid {
        Some(text) => parse_xi_grid(text, angles).map_err(Failure::Usage)?,
        None if args.xi_avg => Vec::new(),
        None => vec![XI_COMPUTATIONAL, XI_DIAGONAL],
    };
    let quad = QuadratureSpec::new(args.resolution, args.xi_resolution)
        .map_err(|e| usage("--resolution/--xi-resolution", e))?;
    let spec = SweepSpec {
        kind,
        param_grid,
        xi_grid,
        include_average: args.xi_avg,
        mode,
        quad,
        seed: args.seed,
    };
    spec.validate().map_err(|e| usage("--grid/--xi-grid", e))?;
    let output = sweep(&spec)?;
    let text = render(&output.rows, &output.manifest, format)?;
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("standard output: {e}")))?,
    }
    Ok(output.manifest)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult<(RunManifest, bool)> {
    let started = Instant::now();
    let mut kinds = Vec::new();
    for k in args.kinds.split(',') {
        let kind: NoiseKind = k.parse().map_err(|e| usage("--kinds", e))?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return Err(usage("--tolerance", "must be a finite non-negative number"));
    }
    let quad = QuadratureSpec::new(args.resolution, QuadratureSpec::default().xi_points)
        .map_err(|e| usage("--resolution", e))?;
    let reports = verify_formulas(&kinds, &VerifyGrids::default(), &quad)?;

    let mut manifest = RunManifest::new(0, &quad);
    let mut all_pass = true;
    let entries: Vec<Value> = reports
        .iter()
        .map(|r| {
            let pass = r.passes(args.tolerance);
            all_pass &= pass;
            manifest
                .max_abs_deviation
                .insert(r.kind.to_string(), r.max_abs_deviation);
            json!({
                "kind": r.kind.as_str(),
                "points": r.params.len() * r.xis.len(),
                "max_abs_deviation": r.max_abs_deviation,
                "worst_point": {
                    r.kind.parameter_name(): r.worst_point.0,
                    "xi": r.worst_point.1,
                },
                "pass": pass,
            })
        })
        .collect();
    print_json(
        out,
        &json!({
            "tolerance": args.tolerance,
            "resolution": args.resolution,
            "pass": all_pass,
            "reports": entries,
        }),
    )?;
    manifest.duration_ms = u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX);
    Ok((manifest, all_pass))
}

fn cmd_commutators(
    args: &CommutatorArgs,
    angles: &Angles,
    out: &mut dyn Write,
) -> CliResult<RunManifest> {
    let theta = angles.convert(args.theta);
    if !theta.is_finite() {
        return Err(usage("--theta", "must be finite"));
    }
    let mut entries = Vec::new();
    for which in [KrausIndex::E0, KrausIndex::E1] {
        let check = commutator_defect(which, args.eta, theta).map_err(|e| usage("--eta", e))?;
        entries.push(json!({
            "operator": format!("{which:?}"),
            "computed": matrix_json(&check.computed),
            "closed_form": matrix_json(&check.closed_form),
            "residual": check.residual,
            "vanishes": check.computed.max_abs() == 0.0,
        }));
    }
    print_json(
        out,
        &json!({ "eta": args.eta, "theta": theta, "commutators": entries }),
    )?;
    Ok(RunManifest::new(0, &QuadratureSpec::default()))
}

fn write_manifest(err: &mut dyn Write, manifest: &RunManifest) {
    if let Ok(text) = serde_json::to_string(manifest) {
        let _ = writeln!(err, "manifest: {text}");
    }
}

/// Runs the CLI against explicit output streams and returns the exit code.
pub fn run_with_io<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let color = if std::env::var_os("NO_COLOR").is_some() {
        ColorChoice::Never
    } else {
        ColorChoice::Auto
    };
    let matches = match Cli::command().color(color).try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let rendered = if code == 0 {
                e.to_string()
            } else {
                e.render().to_string()
            };
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return EXIT_USAGE;
        }
    };
    let angles = Angles {
        degrees: cli.degrees,
    };
    let started = Instant::now();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, &angles, out).map(|m| (m, true)),
        Command::Sweep(a) => cmd_sweep(a, &angles, out).map(|m| (m, true)),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Commutators(a) => cmd_commutators(a, &angles, out).map(|m| (m, true)),
        Command::Message(a) => cmd_message(a, &angles, out).map(|m| (m, true)),
    };
    match result {
        Ok((mut manifest, pass)) => {
            if manifest.duration_ms == 0 {
                manifest.duration_ms =
                    u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX);
            }
            write_manifest(err, &manifest);
            if pass {
                EXIT_OK
            } else {
                let _ = writeln!(err, "error: verification failed");
                EXIT_VERIFY
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_IO
        }
    }
}

/// Entry point used by the binary.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run_with_io(args, &mut out, &mut err);
    let _ = out.flush();
    code
}
