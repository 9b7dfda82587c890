//! `qds`: batch front end for the qds library. Every command reads JSON inputs and
//! writes one JSON report. Exit status is 0 on success, 1 when a numerical
//! check fails and 2 on input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use qds::dilation::{self, Cyclicity, DilationCheck, DilationOptions};
use qds::io::{self, ChannelJson, LindbladJson, MatrixJson, TensorJson};
use qds::spinchain::{self, PopescuTensor, WordEntry};
use qds::sweep::{self, SweepReport};
use qds::{
    classify, invariant_states, kms_dual, kms_residual, lindblad_channel, stationary_states, CPMap,
    CheckRecord, Classification, DensityState, Error, SpectralData, Tolerances, C64,
};

const DIM_CAP_ENV: &str = "QDS_DIM_CAP";
const DEFAULT_DILATION_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(
    name = "qds",
    version,
    about = "Ergodic analysis of quantum Markov semigroups and spin chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Check tolerance (dilation residuals, otherwise the verification tolerance).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomised checks and sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct MapInput {
    /// Channel JSON `{dim, kraus}`.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Lindblad generator JSON `{dim, hamiltonian, jumps}`; analysed at `--time`.
    #[arg(long)]
    lindblad: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ergodicity, strong mixing and Kolmogorov verdicts.
    Analyze {
        #[command(flatten)]
        input: MapInput,
        /// Invariant state JSON; defaults to the mean invariant state.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Time at which a Lindblad semigroup is sampled.
        #[arg(long, default_value_t = 1.0)]
        time: f64,
    },
    /// KMS-dual channel with respect to a faithful invariant state.
    Dual {
        /// Channel JSON `{dim, kraus}`.
        #[arg(long)]
        channel: PathBuf,
        /// Invariant state JSON; defaults to the mean invariant state.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Eigenvalues and peripheral spectrum of the superoperator.
    Spectrum {
        #[command(flatten)]
        input: MapInput,
        /// Time at which a Lindblad semigroup is sampled.
        #[arg(long, default_value_t = 1.0)]
        time: f64,
    },
    /// Finite-horizon Markov dilation and its residual checks.
    Dilate {
        /// Channel JSON `{dim, kraus}`.
        #[arg(long)]
        channel: PathBuf,
        /// Invariant state JSON; defaults to the mean invariant state.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Number of time steps in the dilation.
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        /// Comma-separated residual checks.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [CheckArg::Markov, CheckArg::Compression, CheckArg::Cyclicity])]
        checks: Vec<CheckArg>,
        /// Keep the Kraus family as given instead of a minimal one.
        #[arg(long)]
        keep_kraus: bool,
    },
    /// Translation-invariant spin-chain states from a Popescu tensor.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Randomised property sweeps.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Largest matrix dimension sampled.
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ChainCommand {
    Purity {
        /// Popescu tensor JSON `{d, k, ops}`.
        #[arg(long)]
        tensor: PathBuf,
    },
    Marginal {
        /// Popescu tensor JSON `{d, k, ops}`.
        #[arg(long)]
        tensor: PathBuf,
        /// Number of consecutive sites.
        #[arg(long)]
        sites: usize,
    },
    Words {
        /// Popescu tensor JSON `{d, k, ops}`.
        #[arg(long)]
        tensor: PathBuf,
        /// Longest word length, at most 6.
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckArg {
    Markov,
    Compression,
    Cyclicity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepKind {
    Lindblad,
    Channel,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    tool_version: &'static str,
    command: &'static str,
    seed: u64,
    tolerances: Tolerances,
    residuals: Vec<CheckRecord>,
    pass: bool,
    #[serde(flatten)]
    body: T,
}

enum Failure {
    Input(String),
    Check {
        command: &'static str,
        message: String,
        residuals: Vec<CheckRecord>,
    },
}

impl Failure {
    fn from_core(command: &'static str, e: Error) -> Self {
        match e {
            Error::Verification {
                ref check,
                residual,
                tolerance,
            } => Failure::Check {
                command,
                message: e.to_string(),
                residuals: vec![CheckRecord::new(check.clone(), residual, tolerance)],
            },
            Error::VerdictMismatch { witness, .. } => Failure::Check {
                command,
                message: e.to_string(),
                residuals: vec![CheckRecord::new("correlation_witness", witness, f64::NAN)],
            },
            Error::EigenFailure
            | Error::NotAnAlgebra { .. }
            | Error::NotModularInvariant { .. } => Failure::Check {
                command,
                message: e.to_string(),
                residuals: Vec::new(),
            },
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = Result<(String, bool), Failure>;

struct Ctx {
    seed: u64,
    tol: Tolerances,
    check_tol: Option<f64>,
}

impl Ctx {
    fn report<T: Serialize>(
        &self,
        command: &'static str,
        residuals: Vec<CheckRecord>,
        extra_pass: bool,
        body: T,
    ) -> (String, bool) {
        let pass = extra_pass && residuals.iter().all(|r| r.pass);
        let report = Report {
            tool_version: qds::VERSION,
            command,
            seed: self.seed,
            tolerances: self.tol,
            residuals,
            pass,
            body,
        };
        (io::to_stable_json(&report), pass)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        Failure::Input(format!(
            "{}: at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })
}

fn load_channel(path: &Path, tol: &Tolerances) -> Result<CPMap, Failure> {
    read_json::<ChannelJson>(path)?
        .to_map(tol)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_state(path: &Path, tol: &Tolerances) -> Result<DensityState, Failure> {
    read_json::<MatrixJson>(path)?
        .to_state(tol)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_tensor(path: &Path) -> Result<PopescuTensor, Failure> {
    let ops = read_json::<TensorJson>(path)?
        .to_ops()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    PopescuTensor::new(ops).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// The channel to analyse, with an invariant state when the input provides a
/// natural one (stationary state of a generator).
fn load_map(
    command: &'static str,
    input: &MapInput,
    time: f64,
    tol: &Tolerances,
) -> Result<(CPMap, Option<DensityState>, &'static str), Failure> {
    let core = |e| Failure::from_core(command, e);
    if let Some(path) = &input.channel {
        return Ok((load_channel(path, tol)?, None, "channel"));
    }
    let path = input.lindblad.as_ref().expect("clap enforces one input");
    let gen = read_json::<LindbladJson>(path)?
        .to_generator()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let map = lindblad_channel(&gen, time, tol).map_err(core)?;
    let stationary = stationary_states(&gen, tol).map_err(core)?;
    Ok((map, Some(stationary.mean().clone()), "lindblad"))
}

fn default_state(
    command: &'static str,
    map: &CPMap,
    tol: &Tolerances,
) -> Result<DensityState, Failure> {
    Ok(invariant_states(map, tol)
        .map_err(|e| Failure::from_core(command, e))?
        .mean()
        .clone())
}

#[derive(Serialize)]
struct AnalyzeBody {
    source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
    dim: usize,
    kraus_rank: usize,
    #[serde(flatten)]
    classification: Classification,
}

fn analyze(ctx: &Ctx, input: &MapInput, state: Option<&Path>, time: f64) -> Outcome {
    const CMD: &str = "analyze";
    let tol = &ctx.tol;
    let (map, natural, source) = load_map(CMD, input, time, tol)?;
    let state = match (state, natural) {
        (Some(p), _) => load_state(p, tol)?,
        (None, Some(s)) => s,
        (None, None) => default_state(CMD, &map, tol)?,
    };
    let residuals = vec![
        CheckRecord::new("unitality", map.unitality_residual(), tol.verify),
        CheckRecord::new(
            "state_invariance",
            map.invariance_residual(&state),
            tol.invariance,
        ),
    ];
    let classification =
        classify(&map, Some(&state), tol).map_err(|e| Failure::from_core(CMD, e))?;
    let body = AnalyzeBody {
        source,
        time: (source == "lindblad").then_some(time),
        dim: map.dim(),
        kraus_rank: map.kraus_rank(),
        classification,
    };
    Ok(ctx.report(CMD, residuals, true, body))
}

#[derive(Serialize)]
struct DualBody {
    state: MatrixJson,
    dual: ChannelJson,
}

fn dual(ctx: &Ctx, channel: &Path, state: Option<&Path>) -> Outcome {
    const CMD: &str = "dual";
    let tol = &ctx.tol;
    let core = |e| Failure::from_core(CMD, e);
    let map = load_channel(channel, tol)?;
    let state = match state {
        Some(p) => load_state(p, tol)?,
        None => default_state(CMD, &map, tol)?,
    };
    let dual = kms_dual(&map, &state, tol).map_err(core)?;
    let back = kms_dual(&dual, &state, tol).map_err(core)?;
    let involution = (back.superop().matrix() - map.superop().matrix()).norm();
    let residuals = vec![
        CheckRecord::new(
            "kms_relation",
            kms_residual(&map, &dual, &state),
            tol.verify,
        ),
        CheckRecord::new("involution", involution, tol.verify),
        CheckRecord::new("dual_unitality", dual.unitality_residual(), tol.verify),
    ];
    let body = DualBody {
        state: MatrixJson::from_state(&state),
        dual: ChannelJson::from_map(&dual),
    };
    Ok(ctx.report(CMD, residuals, true, body))
}

#[derive(Serialize)]
struct SpectrumBody {
    source: &'static str,
    dim: usize,
    #[serde(serialize_with = "io::ser_complex_slice")]
    eigenvalues: Vec<C64>,
    #[serde(serialize_with = "io::ser_complex_slice")]
    peripheral: Vec<C64>,
    #[serde(serialize_with = "io::ser_complex_slice")]
    peripheral_clusters: Vec<C64>,
    second_modulus: f64,
    gap: f64,
}

fn spectrum(ctx: &Ctx, input: &MapInput, time: f64) -> Outcome {
    const CMD: &str = "spectrum";
    let tol = &ctx.tol;
    let (map, _, source) = load_map(CMD, input, time, tol)?;
    let s = SpectralData::from_matrix(map.superop().matrix(), tol)
        .map_err(|e| Failure::from_core(CMD, e))?;
    let mut eigenvalues = s.eigenvalues.clone();
    eigenvalues.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(a.arg().total_cmp(&b.arg()))
    });
    let body = SpectrumBody {
        source,
        dim: map.dim(),
        eigenvalues,
        gap: s.gap(),
        peripheral: s.peripheral,
        peripheral_clusters: s.clusters,
        second_modulus: s.second_modulus,
    };
    Ok(ctx.report(CMD, Vec::new(), true, body))
}

#[derive(Serialize)]
struct DilateBody {
    total_dim: usize,
    base_dim: usize,
    noise_dim: usize,
    horizon: usize,
    ranks: Vec<usize>,
    reduced_to_support: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    cyclicity: Option<Cyclicity>,
}

fn dim_cap() -> Result<usize, Failure> {
    match std::env::var(DIM_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::Input(format!(
                "{DIM_CAP_ENV} must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(dilation::DEFAULT_DIM_CAP),
    }
}

fn dilate(
    ctx: &Ctx,
    channel: &Path,
    state: Option<&Path>,
    horizon: usize,
    checks: &[CheckArg],
    keep_kraus: bool,
) -> Outcome {
    const CMD: &str = "dilate";
    let tol = &ctx.tol;
    let core = |e| Failure::from_core(CMD, e);
    let map = load_channel(channel, tol)?;
    let state = match state {
        Some(p) => load_state(p, tol)?,
        None => default_state(CMD, &map, tol)?,
    };
    let opts = DilationOptions {
        cap: dim_cap()?,
        minimize_kraus: !keep_kraus,
    };
    let d = dilation::build_dilation(&map, &state, horizon, &opts, tol).map_err(core)?;
    let checks: Vec<DilationCheck> = checks
        .iter()
        .map(|c| match c {
            CheckArg::Markov => DilationCheck::Markov,
            CheckArg::Compression => DilationCheck::Compression,
            CheckArg::Cyclicity => DilationCheck::Cyclicity,
        })
        .collect();
    let check_tol = ctx.check_tol.unwrap_or(DEFAULT_DILATION_TOL);
    let r = dilation::dilation_report(&d, &checks, ctx.seed, check_tol).map_err(core)?;
    let body = DilateBody {
        total_dim: r.total_dim,
        base_dim: r.base_dim,
        noise_dim: r.noise_dim,
        horizon: r.horizon,
        ranks: r.ranks,
        reduced_to_support: r.reduced_to_support,
        cyclicity: r.cyclicity,
    };
    Ok(ctx.report(CMD, r.residuals, r.pass, body))
}

#[derive(Serialize)]
struct MarginalBody {
    sites: usize,
    d: usize,
    marginal: MatrixJson,
}

#[derive(Serialize)]
struct WordsBody {
    max_len: usize,
    d: usize,
    entries: Vec<WordEntry>,
}

fn chain(ctx: &Ctx, cmd: &ChainCommand) -> Outcome {
    let tol = &ctx.tol;
    match cmd {
        ChainCommand::Purity { tensor } => {
            const CMD: &str = "chain-purity";
            let t = load_tensor(tensor)?;
            let residuals = vec![CheckRecord::new(
                "row_isometry",
                t.row_isometry_residual(),
                tol.verify,
            )];
            let r = spinchain::purity_check(&t, tol).map_err(|e| Failure::from_core(CMD, e))?;
            Ok(ctx.report(CMD, residuals, true, r))
        }
        ChainCommand::Marginal { tensor, sites } => {
            const CMD: &str = "chain-marginal";
            let core = |e| Failure::from_core(CMD, e);
            let t = load_tensor(tensor)?;
            let eta = spinchain::eta_map(&t, tol).map_err(core)?;
            let state = default_state(CMD, &eta, tol)?;
            let rho = spinchain::marginal_density(
                &t,
                &state,
                *sites,
                spinchain::DEFAULT_MARGINAL_CAP,
                tol,
            )
            .map_err(core)?;
            let residuals = vec![
                CheckRecord::new("row_isometry", t.row_isometry_residual(), tol.verify),
                CheckRecord::new(
                    "marginal_consistency",
                    spinchain::marginal_consistency(&t, &state, *sites),
                    tol.verify,
                ),
            ];
            let body = MarginalBody {
                sites: *sites,
                d: t.d(),
                marginal: MatrixJson::from_state(&rho),
            };
            Ok(ctx.report(CMD, residuals, true, body))
        }
        ChainCommand::Words { tensor, max_len } => {
            const CMD: &str = "chain-words";
            if *max_len > spinchain::DEFAULT_MAX_WORD_LEN {
                return Err(Failure::Input(format!(
                    "--max-len {max_len} exceeds the limit {}",
                    spinchain::DEFAULT_MAX_WORD_LEN
                )));
            }
            let core = |e| Failure::from_core(CMD, e);
            let t = load_tensor(tensor)?;
            let eta = spinchain::eta_map(&t, tol).map_err(core)?;
            let state = default_state(CMD, &eta, tol)?;
            let residuals = vec![
                CheckRecord::new("row_isometry", t.row_isometry_residual(), tol.verify),
                CheckRecord::new(
                    "compatibility",
                    spinchain::compatibility_residual(&t, &state, *max_len),
                    tol.verify,
                ),
            ];
            let body = WordsBody {
                max_len: *max_len,
                d: t.d(),
                entries: spinchain::word_table(&t, &state, *max_len),
            };
            Ok(ctx.report(CMD, residuals, true, body))
        }
    }
}

/// Sweep report without its own `seed`, which the envelope already carries.
#[derive(Serialize)]
struct SweepBody<T: Serialize> {
    kind: &'static str,
    count: usize,
    max_dim: usize,
    counterexamples: usize,
    skipped: usize,
    errors: usize,
    instances: Vec<T>,
}

impl<T: Serialize> From<SweepReport<T>> for SweepBody<T> {
    fn from(r: SweepReport<T>) -> Self {
        SweepBody {
            kind: r.kind,
            count: r.count,
            max_dim: r.max_dim,
            counterexamples: r.counterexamples,
            skipped: r.skipped,
            errors: r.errors,
            instances: r.instances,
        }
    }
}

fn run_sweep(ctx: &Ctx, kind: SweepKind, count: usize, dim: usize) -> Outcome {
    const CMD: &str = "sweep";
    if dim < 2 {
        return Err(Failure::Input("--dim must be at least 2".into()));
    }
    let tol = &ctx.tol;
    match kind {
        SweepKind::Lindblad => {
            let r = sweep::lindblad_sweep(count, dim, ctx.seed, tol);
            let ok = r.counterexamples == 0 && r.errors == 0;
            Ok(ctx.report(CMD, Vec::new(), ok, SweepBody::from(r)))
        }
        SweepKind::Channel => {
            let r = sweep::channel_sweep(count, dim, ctx.seed, tol);
            let worst = |f: fn(&sweep::ChannelInstance) -> f64| {
                r.instances
                    .iter()
                    .map(f)
                    .filter(|v| v.is_finite())
                    .fold(0.0, f64::max)
            };
            let residuals = vec![
                CheckRecord::new("max_kms_relation", worst(|i| i.kms_residual), 1e-9),
                CheckRecord::new("max_involution", worst(|i| i.involution_residual), 1e-9),
            ];
            let ok = r.counterexamples == 0 && r.errors == 0;
            Ok(ctx.report(CMD, residuals, ok, SweepBody::from(r)))
        }
    }
}

fn dispatch(cli: &Cli, ctx: &Ctx) -> Outcome {
    match &cli.command {
        Command::Analyze { input, state, time } => analyze(ctx, input, state.as_deref(), *time),
        Command::Dual { channel, state } => dual(ctx, channel, state.as_deref()),
        Command::Spectrum { input, time } => spectrum(ctx, input, *time),
        Command::Dilate {
            channel,
            state,
            horizon,
            checks,
            keep_kraus,
        } => dilate(
            ctx,
            channel,
            state.as_deref(),
            *horizon,
            checks,
            *keep_kraus,
        ),
        Command::Chain(c) => chain(ctx, c),
        Command::Sweep { kind, count, dim } => run_sweep(ctx, *kind, *count, *dim),
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("stdout: {e}")),
                _ => Ok(()),
            }
        }
    }
}

/// Run a parsed command: `Ok((report, exit code))`, or the message of an
/// input error (exit code 2).
fn execute(cli: &Cli) -> Result<(String, u8), String> {
    let Format::Json = cli.format;
    let mut tol = Tolerances::default();
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err("--tol must be a positive number".into());
        }
        if !matches!(cli.command, Command::Dilate { .. }) {
            tol.verify = t;
        }
    }
    let ctx = Ctx {
        seed: cli.seed,
        tol,
        check_tol: cli.tol,
    };
    match dispatch(cli, &ctx) {
        Ok((text, pass)) => Ok((text, if pass { 0 } else { 1 })),
        Err(Failure::Input(msg)) => Err(msg),
        Err(Failure::Check {
            command,
            message,
            residuals,
        }) => {
            eprintln!("check failed: {message}");
            let (text, _) = ctx.report(command, residuals, false, ErrorBody { error: message });
            Ok((text, 1))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match execute(&cli) {
        Ok(done) => done,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(cli.out.as_deref(), &text) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn data(name: &str) -> String {
        format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn run(args: &[&str]) -> Result<(Value, u8), String> {
        let cli = Cli::try_parse_from(std::iter::once("qds").chain(args.iter().copied()))
            .map_err(|e| e.to_string())?;
        let (text, code) = execute(&cli)?;
        Ok((serde_json::from_str(&text).unwrap(), code))
    }

    #[test]
    fn analyze_examples() {
        let (v, code) = run(&["analyze", "--channel", &data("depolarizing.json")]).unwrap();
        assert_eq!(code, 0);
        assert_eq!(v["ergodic"], true);
        assert_eq!(v["strong_mixing"], true);
        assert!((v["gap"].as_f64().unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(v["tool_version"], qds::VERSION);
        assert!(v["tolerances"]["verify"].is_f64());
        assert!(v["residuals"].is_array());

        let (v, code) = run(&["analyze", "--channel", &data("identity.json")]).unwrap();
        assert_eq!(code, 0);
        assert_eq!(v["ergodic"], false);
        assert_eq!(v["fixed_algebra_dim"], 4);

        let (v, _) = run(&["analyze", "--channel", &data("dephase_flip.json")]).unwrap();
        assert_eq!(v["ergodic"], true);
        assert_eq!(v["strong_mixing"], false);
        assert_eq!(v["peripheral_eigenvalues"].as_array().unwrap().len(), 2);

        let (v, _) = run(&[
            "analyze",
            "--lindblad",
            &data("lindblad_decay.json"),
            "--time",
            "2",
        ])
        .unwrap();
        assert_eq!(v["source"], "lindblad");
        assert_eq!(v["strong_mixing"], true);
    }

    #[test]
    fn input_errors_are_reported_with_a_pointer() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        fs::write(&bad, r#"{"dim": 2, "kraus": [{"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [1, "x"]]]}]}"#).unwrap();
        let msg = run(&["analyze", "--channel", bad.to_str().unwrap()]).unwrap_err();
        assert!(msg.contains("kraus[0].entries[1][1][1]"), "{msg}");

        let msg = run(&["analyze", "--channel", &data("tensor_diagonal.json")]).unwrap_err();
        assert!(msg.contains("unknown field"), "{msg}");

        fs::write(
            &bad,
            r#"{"dim": 1, "kraus": [{"dim": 1, "entries": [[[2, 0]]]}]}"#,
        )
        .unwrap();
        let msg = run(&["analyze", "--channel", bad.to_str().unwrap()]).unwrap_err();
        assert!(msg.contains("not unital"), "{msg}");

        assert!(run(&["analyze", "--channel", &data("identity.json"), "--bogus"]).is_err());
        assert!(run(&["analyze", "--channel", "missing.json"]).is_err());
        assert!(run(&[
            "analyze",
            "--tol",
            "-1",
            "--channel",
            &data("identity.json")
        ])
        .is_err());
    }

    #[test]
    fn failing_checks_exit_with_one() {
        let (v, code) = run(&[
            "dilate",
            "--channel",
            &data("depolarizing.json"),
            "--horizon",
            "2",
            "--tol",
            "1e-300",
        ])
        .unwrap();
        assert_eq!(code, 1);
        assert_eq!(v["pass"], false);
        let (v, code) = run(&[
            "dilate",
            "--channel",
            &data("depolarizing.json"),
            "--horizon",
            "2",
        ])
        .unwrap();
        assert_eq!(code, 0);
        assert_eq!(v["cyclicity"]["cyclic"], true);
    }

    #[test]
    fn emitted_objects_round_trip() {
        let tol = Tolerances::default();
        let (v, _) = run(&["dual", "--channel", &data("depolarizing.json")]).unwrap();
        let dual: ChannelJson = serde_json::from_value(v["dual"].clone()).unwrap();
        let text = io::to_stable_json(&dual);
        assert_eq!(serde_json::from_str::<ChannelJson>(&text).unwrap(), dual);
        dual.to_map(&tol).unwrap();
        let state: MatrixJson = serde_json::from_value(v["state"].clone()).unwrap();
        state.to_state(&tol).unwrap();

        let (v, _) = run(&[
            "chain",
            "marginal",
            "--tensor",
            &data("tensor_diagonal.json"),
            "--sites",
            "2",
        ])
        .unwrap();
        let m: MatrixJson = serde_json::from_value(v["marginal"].clone()).unwrap();
        assert_eq!(m.to_state(&tol).unwrap().dim(), 4);
    }

    #[test]
    fn chain_commands() {
        let (v, code) =
            run(&["chain", "purity", "--tensor", &data("tensor_product.json")]).unwrap();
        assert_eq!(code, 0);
        assert_eq!(v["pure"], true);
        let (v, _) = run(&["chain", "purity", "--tensor", &data("tensor_diagonal.json")]).unwrap();
        assert_eq!(v["pure"], false);
        assert_eq!(v["fixed_algebra_dim"], 2);
        let (v, _) = run(&[
            "chain",
            "words",
            "--tensor",
            &data("tensor_diagonal.json"),
            "--max-len",
            "2",
        ])
        .unwrap();
        // 7 words of length <= 2 over two letters
        assert_eq!(v["entries"].as_array().unwrap().len(), 49);
        assert!(run(&[
            "chain",
            "words",
            "--tensor",
            &data("tensor_diagonal.json"),
            "--max-len",
            "9"
        ])
        .is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let args = [
            "sweep", "--kind", "channel", "--count", "8", "--dim", "3", "--seed", "5",
        ];
        let cli = Cli::try_parse_from(std::iter::once("qds").chain(args)).unwrap();
        let a = execute(&cli).unwrap();
        let b = execute(&cli).unwrap();
        assert_eq!(a, b);
        let (v, code) = run(&args).unwrap();
        assert_eq!(code, 0);
        assert_eq!(v["counterexamples"], 0);
        assert_eq!(v["seed"], 5);
    }
}
