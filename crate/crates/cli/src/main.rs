mod error;
mod render;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cde_core::analysis::{self, DEFAULT_DEGREE_BUDGET};
use cde_core::decoder::{self, DecodeStatus, HeldPackets};
use cde_core::format::{self, ProblemSpec};
use cde_core::sim::{self, MonteCarloStats, Verdict};
use cde_core::{
    CdeProblem, ConstructOptions, EncodingMatrix, FieldVector, PrimeField, SearchStrategy, DEFAULT_BUDGET,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "cde", version, about = "Error-correcting cooperative data exchange")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// More log output on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    /// JSON
    Structured,
}

#[derive(Args)]
struct Common {
    /// Problem file (TOML).
    #[arg(long)]
    problem: PathBuf,
    /// Field size q (prime). Overrides the problem file.
    #[arg(long)]
    field: Option<u64>,
    /// Cap on enumeration work per step.
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Write the report here instead of stdout. For `construct`, the matrix
    /// file goes here and the report stays on stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    /// Random encodings from consecutive seeds until one verifies.
    Sweep,
    /// Backtracking over every encoding (small fields only).
    Exhaustive,
}

#[derive(Subcommand)]
enum Command {
    /// Per-client diameters, the global diameter and the error capability.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Build an encoding matrix that corrects the full capability.
    Construct {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Strategy::Sweep)]
        strategy: Strategy,
        /// Shorthand for `--strategy exhaustive`.
        #[arg(long)]
        exhaustive: bool,
        /// First seed for the sweep.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seeds to try, or search nodes for the exhaustive strategy.
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        attempts: u64,
    },
    /// Check that every local code of a matrix corrects `delta` errors.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: PathBuf,
        /// Defaults to the problem's capability.
        #[arg(long)]
        delta: Option<usize>,
    },
    /// Minimum-distance decode at one client.
    Decode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: PathBuf,
        /// Decoding client, 1-based.
        #[arg(long)]
        client: usize,
        /// Received broadcasts, comma separated, one per client.
        #[arg(long)]
        broadcast: String,
        /// Held packet values as `packet=value` pairs, comma separated.
        #[arg(long, default_value = "")]
        held: String,
    },
    /// Exhaustive adversary sweep and/or Monte Carlo over random encodings.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Encoding to attack; needed for `--exhaustive`.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Liars tolerated; defaults to the problem's capability.
        #[arg(long)]
        delta: Option<usize>,
        /// Try every plan with at most `delta` liars against `--matrix`.
        #[arg(long)]
        exhaustive: bool,
        /// Random encodings to verify. Defaults to 500 unless `--exhaustive` is given.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Packet contents for the sweep, comma separated; random from `--seed` otherwise.
        #[arg(long)]
        packets: Option<String>,
        /// Write one JSON line per adversary plan.
        #[arg(long)]
        trace_log: Option<PathBuf>,
    },
}

/// A rendered report plus the exit code it implies.
struct Outcome {
    report: Value,
    code: u8,
}

impl Outcome {
    fn ok(report: impl Serialize) -> Self {
        Self {
            report: serde_json::to_value(report).expect("reports serialize"),
            code: 0,
        }
    }
}

fn one_based(v: impl IntoIterator<Item = usize>) -> Vec<usize> {
    v.into_iter().map(|j| j + 1).collect()
}

fn load_problem(common: &Common) -> Result<ProblemSpec, CliError> {
    let mut spec = format::read_problem(&common.problem)?;
    if let Some(q) = common.field {
        spec.field = Some(PrimeField::new(q)?);
    }
    Ok(spec)
}

fn require_field(spec: &ProblemSpec) -> Result<PrimeField, CliError> {
    spec.field
        .ok_or_else(|| CliError::input("no field given: pass --field or set q in the problem file"))
}

fn load_encoding(common: &Common, problem: &CdeProblem, path: &Path) -> Result<EncodingMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let encoding = format::parse_encoding(&text, problem)?;
    if let Some(q) = common.field {
        if q != encoding.field().modulus() as u64 {
            return Err(CliError::input(format!(
                "--field {q} disagrees with the matrix file (q = {})",
                encoding.field().modulus()
            )));
        }
    }
    Ok(encoding)
}

fn parse_values(text: &str, field: PrimeField, what: &str) -> Result<Vec<u32>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v: u64 = s
                .parse()
                .map_err(|_| CliError::input(format!("{what}: `{s}` is not a nonnegative integer")))?;
            Ok(field.element(v)?.value())
        })
        .collect()
}

fn analyze(common: &Common) -> Result<Outcome, CliError> {
    let spec = load_problem(common)?;
    let p = &spec.problem;
    let report = analysis::analyze(p, DEFAULT_DEGREE_BUDGET.max(common.budget))?;
    let clients: Vec<Value> = (0..p.n())
        .map(|j| json!({"client": j + 1, "missing": p.missing(j).len(), "rho": report.rho_per_client[j]}))
        .collect();
    let note = if report.clients_missing_nothing.len() == p.n() {
        Some("every client already holds every packet; no decoding is needed")
    } else if !report.clients_missing_nothing.is_empty() {
        Some("clients missing nothing have diameter 0 and do not decode")
    } else {
        None
    };
    Ok(Outcome::ok(json!({
        "k": p.k(),
        "n": p.n(),
        "clients": clients,
        "rho_per_client": report.rho_per_client,
        "rho": report.rho,
        "delta": report.delta,
        "degree_bound": report.degree_bound.to_string(),
        "clients_missing_nothing": one_based(report.clients_missing_nothing),
        "note": note,
    })))
}

fn verification_json(r: &cde_core::VerificationReport, q: u32) -> Value {
    json!({
        "q": q,
        "delta": r.delta,
        "required_distance": r.required_distance,
        "distances": r.distances,
        "binding_client": r.binding_client.map(|j| j + 1),
        "passed": r.passed,
    })
}

/// Without `--output` the matrix text is embedded in the report.
fn construct(
    common: &Common,
    strategy: Strategy,
    seed: u64,
    attempts: u64,
) -> Result<Outcome, CliError> {
    let spec = load_problem(common)?;
    let field = require_field(&spec)?;
    let opts = ConstructOptions {
        strategy: match strategy {
            Strategy::Sweep => SearchStrategy::SeedSweep,
            Strategy::Exhaustive => SearchStrategy::Exhaustive,
        },
        first_seed: seed,
        max_attempts: attempts,
        budget: common.budget,
        ..Default::default()
    };
    let c = cde_core::deterministic_encoding(&spec.problem, field, &opts)?;
    info!("found an encoding after {} attempts", c.attempts);
    let text = format::render_matrix(c.encoding.matrix());
    let mut report = verification_json(&c.report, field.modulus());
    report["strategy"] = json!(match strategy {
        Strategy::Sweep => "sweep",
        Strategy::Exhaustive => "exhaustive",
    });
    report["seed"] = json!(c.seed);
    report["attempts"] = json!(c.attempts);
    match &common.output {
        Some(path) => {
            format::write_text(path, &text)?;
            report["matrix_file"] = json!(path.display().to_string());
        }
        None => report["matrix"] = json!(text),
    }
    Ok(Outcome::ok(report))
}

fn verify(common: &Common, matrix: &Path, delta: Option<usize>) -> Result<Outcome, CliError> {
    let spec = format::read_problem(&common.problem)?;
    let e = load_encoding(common, &spec.problem, matrix)?;
    let delta = match delta {
        Some(d) => d,
        None => analysis::capability(&spec.problem)?,
    };
    let r = cde_core::verify_error_correction(&e, delta, common.budget)?;
    Ok(Outcome {
        report: verification_json(&r, e.field().modulus()),
        code: if r.passed { 0 } else { error::VERIFY_FAILED },
    })
}

fn decode(common: &Common, matrix: &Path, client: usize, broadcast: &str, held: &str) -> Result<Outcome, CliError> {
    let spec = format::read_problem(&common.problem)?;
    let p = &spec.problem;
    let e = load_encoding(common, p, matrix)?;
    let f = e.field();
    if client == 0 || client > p.n() {
        return Err(CliError::input(format!("--client must be in 1..={}", p.n())));
    }
    let j = client - 1;
    let y = FieldVector::new(f, parse_values(broadcast, f, "--broadcast")?)?;
    let mut packets = HeldPackets::new();
    for pair in held.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (i, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--held: expected packet=value, got `{pair}`")))?;
        let i: usize = i
            .trim()
            .parse()
            .ok()
            .filter(|&i| (1..=p.k()).contains(&i))
            .ok_or_else(|| CliError::input(format!("--held: packet `{i}` is not in 1..={}", p.k())))?;
        let v = parse_values(v, f, "--held")?;
        let [v] = v[..] else {
            return Err(CliError::input(format!("--held: `{pair}` needs exactly one value")));
        };
        packets.insert(i - 1, f.element(v as u64)?);
    }
    let r = decoder::decode_all(&e, j, &y, &packets, common.budget)?;
    let (status, minimizers) = match r.status {
        DecodeStatus::Unique => ("unique", 1),
        DecodeStatus::Ambiguous { minimizers } => ("ambiguous", minimizers),
    };
    let recovered: BTreeMap<usize, u32> = r.recovered.iter().map(|(&i, v)| (i + 1, v.value())).collect();
    Ok(Outcome::ok(json!({
        "client": client,
        "q": f.modulus(),
        "status": status,
        "minimizers": minimizers,
        "recovered": recovered,
        "estimate": r.estimate.values(),
        "distance": r.distance,
    })))
}

fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::AllRecovered => json!([]),
        Verdict::Violations(bad) => json!(one_based(bad.iter().copied())),
    }
}

fn plan_json(plan: &sim::AdversaryPlan) -> Value {
    let liars: BTreeMap<usize, u32> = plan.substitutions().iter().map(|(&j, &v)| (j + 1, v)).collect();
    json!(liars)
}

struct SimulateArgs<'a> {
    matrix: Option<&'a Path>,
    delta: Option<usize>,
    exhaustive: bool,
    trials: Option<u64>,
    seed: u64,
    packets: Option<&'a str>,
    trace_log: Option<&'a Path>,
}

fn simulate(common: &Common, args: SimulateArgs) -> Result<Outcome, CliError> {
    let spec = load_problem(common)?;
    let p = &spec.problem;
    let trials = match (args.trials, args.exhaustive) {
        (Some(0), _) => return Err(CliError::input("--trials must be at least 1")),
        (Some(t), _) => Some(t),
        (None, true) => None,
        (None, false) => Some(500),
    };
    let delta = match args.delta {
        Some(d) => d,
        None => analysis::capability(p)?,
    };
    let encoding = args.matrix.map(|m| load_encoding(common, p, m)).transpose()?;
    let field = match (&encoding, spec.field) {
        (Some(e), _) => e.field(),
        (None, Some(f)) => f,
        (None, None) => return Err(CliError::input("no field given: pass --field, --matrix, or set q")),
    };
    let mut report = json!({"q": field.modulus(), "delta": delta});
    let mut code = 0;
    let mut log_lines = Vec::new();

    if args.exhaustive {
        let e = encoding
            .as_ref()
            .ok_or_else(|| CliError::input("--exhaustive needs --matrix"))?;
        let x = match args.packets {
            Some(text) => FieldVector::new(field, parse_values(text, field, "--packets")?)?,
            None => sim::random_packets(p.k(), field, args.seed),
        };
        if x.len() != p.k() {
            return Err(CliError::input(format!("--packets needs {} values, got {}", p.k(), x.len())));
        }
        let check = sim::exhaustive_adversary_check(e, delta, &x, common.budget)?;
        for o in &check.outcomes {
            log_lines.push(json!({"liars": plan_json(&o.plan), "failing_clients": verdict_json(&o.verdict)}));
        }
        if !check.passed {
            code = error::VERIFY_FAILED;
        }
        report["exhaustive"] = json!({
            "packets": x.values(),
            "plans_checked": check.plans_checked,
            "violating_plans": check.violating_plans,
            "passed": check.passed,
            "witness": check.witness.as_ref().map(|w| json!({
                "liars": plan_json(&w.plan),
                "failing_clients": verdict_json(&w.verdict),
            })),
        });
    }

    if let Some(trials) = trials {
        let stats: MonteCarloStats = sim::monte_carlo_success_rate(p, field, delta, trials, args.seed, common.budget)?;
        if !stats.consistent_with_floor {
            code = error::VERIFY_FAILED;
        }
        log_lines.push(json!({"monte_carlo": &stats}));
        report["monte_carlo"] = serde_json::to_value(&stats).expect("stats serialize");
    }

    if let Some(path) = args.trace_log {
        let mut body = String::new();
        for line in &log_lines {
            body.push_str(&line.to_string());
            body.push('\n');
        }
        format::write_text(path, &body)?;
    }
    Ok(Outcome { report, code })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Analyze { common } => analyze(common),
        Command::Construct {
            common,
            strategy,
            exhaustive,
            seed,
            attempts,
        } => {
            let strategy = if *exhaustive { Strategy::Exhaustive } else { *strategy };
            construct(common, strategy, *seed, *attempts)
        }
        Command::Verify { common, matrix, delta } => verify(common, matrix, *delta),
        Command::Decode {
            common,
            matrix,
            client,
            broadcast,
            held,
        } => decode(common, matrix, *client, broadcast, held),
        Command::Simulate {
            common,
            matrix,
            delta,
            exhaustive,
            trials,
            seed,
            packets,
            trace_log,
        } => simulate(
            common,
            SimulateArgs {
                matrix: matrix.as_deref(),
                delta: *delta,
                exhaustive: *exhaustive,
                trials: *trials,
                seed: *seed,
                packets: packets.as_deref(),
                trace_log: trace_log.as_deref(),
            },
        ),
    }
}

fn common(cli: &Cli) -> &Common {
    match &cli.command {
        Command::Analyze { common }
        | Command::Construct { common, .. }
        | Command::Verify { common, .. }
        | Command::Decode { common, .. }
        | Command::Simulate { common, .. } => common,
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    let body = match cli.format {
        Format::Text => render::text(&outcome.report),
        Format::Structured => format!("{:#}\n", outcome.report),
    };
    match (&cli.command, &common(cli).output) {
        (Command::Construct { .. }, _) | (_, None) => std::io::stdout().write_all(body.as_bytes())?,
        (_, Some(path)) => format::write_text(path, &body)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; help and version are not errors.
            return ExitCode::from(if e.use_stderr() { error::INPUT } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = run(&cli).and_then(|outcome| emit(&cli, &outcome).map(|()| outcome.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
