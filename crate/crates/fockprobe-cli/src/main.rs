//! Command-line front end: scans, protocol runs, state dumps, and the
//! invariant suite, emitting machine-readable CSV or JSON tables.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fockprobe::error::Error as CoreError;
use fockprobe::optics::quantum_scissors;
use fockprobe::probe::{
    jc_estimator_from_rates, jc_probabilities, jc_sample, ndpa_probabilities, ndpa_sample,
    JcConfig, JcMode, NdpaConfig, NdpaMode,
};
use fockprobe::verify::{run_invariant_suite, CheckOutcome, SCISSORS_NBAR_GRID, SCISSORS_T2_GRID};

mod states;
mod table;

use states::{
    build_state, indistinguishability_closed_form, moment_closed_form, parse_profile,
    parse_state_specs, BuildError, BuildPolicy, StateSpec,
};
use table::{Cell, OutputFormat, Table};

#[derive(Parser)]
#[command(
    name = "fockprobe",
    version,
    about = "Indistinguishability measures and counting protocols on truncated Fock spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Indistinguishability degree across a grid of states.
    IdScan(IdScanArgs),
    /// Antinormally ordered moments of one state, with closed forms.
    Moments(MomentsArgs),
    /// Quantum-scissors mixing probability against its closed form.
    Scissors(ScissorsArgs),
    /// Sampled idler counting with a parametric amplifier.
    Ndpa(NdpaArgs),
    /// Sampled atomic-state detection after a cavity crossing.
    Jc(JcArgs),
    /// Serialize a factory state to JSON.
    Dump(DumpArgs),
    /// Run every invariant check and exit nonzero on failure.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct StateArgs {
    /// Descriptor: number:M, number:A..B, coherent, thermal, mixed01,
    /// custom-json:PATH. Repeatable where a grid makes sense.
    #[arg(long = "state", required = true)]
    state: Vec<String>,
    /// Coherent amplitude(s) for `--state coherent`.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Thermal mean photon number(s) for `--state thermal`.
    #[arg(long, value_delimiter = ',')]
    nbar: Vec<f64>,
    /// Mixing probability(ies) for `--state mixed01`.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Explicit cutoff; overrides the automatic choice.
    #[arg(long)]
    cutoff: Option<usize>,
}

impl StateArgs {
    fn specs(&self) -> Result<Vec<StateSpec>, AppError> {
        parse_state_specs(&self.state, &self.alpha, &self.nbar, &self.p).map_err(AppError::Usage)
    }

    fn single_spec(&self, command: &str) -> Result<StateSpec, AppError> {
        let mut specs = self.specs()?;
        if specs.len() != 1 {
            return Err(AppError::Usage(format!(
                "{command} takes exactly one state, got {}",
                specs.len()
            )));
        }
        Ok(specs.remove(0))
    }
}

#[derive(Args)]
struct IdScanArgs {
    #[command(flatten)]
    state: StateArgs,
    /// classical | bosonic | fermionic | custom:<w1,w2,...>
    #[arg(long)]
    profile: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Largest moment order to evaluate.
    #[arg(long, default_value_t = 4)]
    order: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScissorsArgs {
    /// Transmitted intensity fraction(s) of the first splitter.
    #[arg(long, value_delimiter = ',')]
    t2: Vec<f64>,
    /// Thermal mean photon number(s).
    #[arg(long, value_delimiter = ',')]
    nbar: Vec<f64>,
    /// Thermal cutoff; automatic (tail below 1e-10) when omitted.
    #[arg(long)]
    cutoff: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct NdpaArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Coupling strength of the amplifier.
    #[arg(long)]
    s: f64,
    /// On-off detector efficiency.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = NdpaModeArg::FirstOrder)]
    mode: NdpaModeArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NdpaModeArg {
    FirstOrder,
    Exact,
}

#[derive(Args)]
struct JcArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Atom-field coupling.
    #[arg(long)]
    g: f64,
    /// Interaction time.
    #[arg(long)]
    tau: f64,
    /// Shared detector efficiency; cancels in the estimator.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = JcModeArg::Linearized)]
    mode: JcModeArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum JcModeArg {
    Linearized,
    Exact,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum AppError {
    Core(CoreError),
    Usage(String),
    Io(std::io::Error),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(CoreError::Truncation(_)) => 3,
            AppError::Core(CoreError::DegenerateStatistics(_))
            | AppError::Core(CoreError::DegeneratePostSelection) => 4,
            AppError::Core(_) | AppError::Usage(_) => 2,
            AppError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Core(e) => e.fmt(f),
            AppError::Usage(msg) => f.write_str(msg),
            AppError::Io(e) => e.fmt(f),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Core(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

impl From<BuildError> for AppError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Core(e) => AppError::Core(e),
            BuildError::Usage(msg) => AppError::Usage(msg),
            BuildError::Io(e) => AppError::Io(e),
        }
    }
}

fn write_text(text: &str, out: &Option<PathBuf>) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn emit(table: &Table, output: &OutputArgs) -> Result<(), AppError> {
    write_text(&table.render(output.format.into()), &output.out)
}

fn id_scan_table(args: &IdScanArgs) -> Result<Table, AppError> {
    let profile = parse_profile(&args.profile).map_err(AppError::Usage)?;
    let policy = BuildPolicy {
        cutoff: args.state.cutoff,
        ..Default::default()
    };
    let mut table = Table::new(vec!["descriptor", "i_d", "closed_form", "abs_diff"]);
    for spec in args.state.specs()? {
        let state = build_state(&spec, &policy)?;
        let value = state.indistinguishability(&profile)?;
        let closed = indistinguishability_closed_form(&spec, &profile);
        table.push_row(vec![
            spec.descriptor().into(),
            value.into(),
            closed.into(),
            closed.map(|c| (value - c).abs()).into(),
        ]);
    }
    Ok(table)
}

fn moments_table(args: &MomentsArgs) -> Result<Table, AppError> {
    let spec = args.state.single_spec("moments")?;
    let policy = BuildPolicy {
        cutoff: args.state.cutoff,
        headroom: args.order as usize + 6,
        thermal_tail: 1e-18,
    };
    let state = build_state(&spec, &policy)?;
    let mut table = Table::new(vec!["order", "moment", "closed_form", "rel_diff", "q_moment"]);
    for order in 0..=args.order {
        // Order zero is the norm of a normalized state.
        let moment = if order == 0 {
            1.0
        } else {
            state.higher_moment(order)?
        };
        let closed = moment_closed_form(&spec, order);
        let q_moment = match state.q_moment(order) {
            Some(result) => Some(result?.value),
            None => None,
        };
        table.push_row(vec![
            u64::from(order).into(),
            moment.into(),
            closed.into(),
            closed.map(|c| (moment - c).abs() / c.abs()).into(),
            q_moment.into(),
        ]);
    }
    Ok(table)
}

fn scissors_table(args: &ScissorsArgs) -> Result<Table, AppError> {
    let t2_grid: Vec<f64> = if args.t2.is_empty() {
        SCISSORS_T2_GRID.to_vec()
    } else {
        args.t2.clone()
    };
    let nbar_grid: Vec<f64> = if args.nbar.is_empty() {
        SCISSORS_NBAR_GRID.to_vec()
    } else {
        args.nbar.clone()
    };
    let mut table = Table::new(vec!["t2", "nbar", "p_sim", "p_closed", "success_prob"]);
    for &nbar in &nbar_grid {
        let cutoff = args
            .cutoff
            .unwrap_or_else(|| fockprobe::fock::thermal_cutoff_with(nbar, 1e-10));
        for &t2 in &t2_grid {
            if !(0.0..=1.0).contains(&t2) {
                return Err(AppError::Usage(format!("t2 = {t2} outside [0, 1]")));
            }
            let result = quantum_scissors(nbar, t2.sqrt(), cutoff)?;
            table.push_row(vec![
                t2.into(),
                nbar.into(),
                result.p.into(),
                result.p_closed_form.into(),
                result.success_probability.into(),
            ]);
        }
    }
    Ok(table)
}

fn ndpa_table(args: &NdpaArgs) -> Result<Table, AppError> {
    let spec = args.state.single_spec("ndpa")?;
    let mode = match args.mode {
        NdpaModeArg::FirstOrder => NdpaMode::FirstOrder,
        NdpaModeArg::Exact => NdpaMode::Exact,
    };
    let policy = BuildPolicy {
        cutoff: args.state.cutoff,
        headroom: if mode == NdpaMode::Exact { 6 } else { 0 },
        ..Default::default()
    };
    let built = build_state(&spec, &policy)?;
    let state = built.pure().ok_or_else(|| {
        AppError::Usage("ndpa requires a pure state descriptor".into())
    })?;
    let cfg = NdpaConfig {
        s: args.s,
        eta: args.eta,
        trials: args.trials,
        seed: args.seed,
        mode,
    };
    let record = ndpa_sample(state, &cfg)?;
    // Infinite-trial expectation through the same probability path, for the
    // approximation bias with sampling noise removed.
    let probs = ndpa_probabilities(state, &cfg)?;
    let click = cfg.eta * probs.p_click;
    let limit = click / (cfg.eta * cfg.s * cfg.s * (1.0 - click));
    let bias = (limit - record.exact_expectation).abs();

    let mut table = Table::new(vec![
        "protocol",
        "state_descriptor",
        "param",
        "eta",
        "trials",
        "seed",
        "n0",
        "n1",
        "estimator",
        "estimator_paper_literal",
        "exact_expectation",
        "std_err",
        "bias",
    ]);
    table.push_row(vec![
        "ndpa".into(),
        spec.descriptor().into(),
        args.s.into(),
        args.eta.into(),
        args.trials.into(),
        args.seed.into(),
        record.label_zero_count.into(),
        record.label_one_count.into(),
        record.estimator.into(),
        record.estimator_literal.into(),
        record.exact_expectation.into(),
        record.standard_error.into(),
        bias.into(),
    ]);
    Ok(table)
}

fn jc_table(args: &JcArgs) -> Result<Table, AppError> {
    let spec = args.state.single_spec("jc")?;
    let policy = BuildPolicy {
        cutoff: args.state.cutoff,
        ..Default::default()
    };
    let built = build_state(&spec, &policy)?;
    let state = built
        .pure()
        .ok_or_else(|| AppError::Usage("jc requires a pure state descriptor".into()))?;
    let cfg = JcConfig {
        g: args.g,
        tau: args.tau,
        trials: args.trials,
        seed: args.seed,
        mode: match args.mode {
            JcModeArg::Linearized => JcMode::Linearized,
            JcModeArg::Exact => JcMode::Exact,
        },
        detector_efficiency: args.eta,
    };
    let record = jc_sample(state, &cfg)?;
    let (p_e, p_g) = jc_probabilities(state, &cfg)?;
    let limit = jc_estimator_from_rates(
        cfg.detector_efficiency * p_e,
        cfg.detector_efficiency * p_g,
        cfg.gtau(),
    );
    let bias = (limit - record.exact_expectation).abs();

    let mut table = Table::new(vec![
        "protocol",
        "state_descriptor",
        "param",
        "eta",
        "trials",
        "seed",
        "n0",
        "n1",
        "estimator",
        "exact_expectation",
        "std_err",
        "bias",
    ]);
    table.push_row(vec![
        "jc".into(),
        spec.descriptor().into(),
        cfg.gtau().into(),
        args.eta.into(),
        args.trials.into(),
        args.seed.into(),
        record.label_zero_count.into(),
        record.label_one_count.into(),
        record.estimator.into(),
        record.exact_expectation.into(),
        record.standard_error.into(),
        bias.into(),
    ]);
    Ok(table)
}

fn check_line(outcome: &CheckOutcome) -> String {
    format!(
        "{} {:<45} tolerance={:<12.3e} measured={:.6e}\n",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.name,
        outcome.tolerance,
        outcome.measured,
    )
}

/// Schema stability of the CLI's own output: render, parse, render again,
/// and require identical bytes for both formats.
fn cli_round_trip_check() -> CheckOutcome {
    let mut sample = Table::new(vec!["descriptor", "value", "count", "note"]);
    sample.push_row(vec![
        "coherent:1".into(),
        2.0000000000000004f64.into(),
        7u64.into(),
        Cell::Empty,
    ]);
    sample.push_row(vec![
        "thermal:0.5".into(),
        Cell::Float(-3.5e-12),
        0u64.into(),
        "flag".into(),
    ]);
    let csv_ok = Table::parse_csv(&sample.to_csv())
        .map(|parsed| parsed.to_csv() == sample.to_csv())
        .unwrap_or(false);
    let json_ok = Table::parse_json(&sample.to_json())
        .map(|parsed| {
            Table {
                columns: sample.columns.clone(),
                rows: parsed.rows,
            }
            .to_json()
                == sample.to_json()
        })
        .unwrap_or(false);
    CheckOutcome {
        name: "cli.table_round_trip",
        tolerance: 0.0,
        measured: if csv_ok && json_ok { 0.0 } else { 1.0 },
        passed: csv_ok && json_ok,
    }
}

/// Identical run configuration must produce byte-identical output.
fn cli_determinism_check() -> CheckOutcome {
    let args = NdpaArgs {
        state: StateArgs {
            state: vec!["coherent".into()],
            alpha: vec![1.0],
            nbar: vec![],
            p: vec![],
            cutoff: None,
        },
        s: 0.1,
        eta: 0.75,
        trials: 200_000,
        seed: 31_337,
        mode: NdpaModeArg::FirstOrder,
        output: OutputArgs {
            out: None,
            format: FormatArg::Csv,
        },
    };
    let first = ndpa_table(&args).map(|t| t.to_csv());
    let second = ndpa_table(&args).map(|t| t.to_csv());
    let passed = matches!((&first, &second), (Ok(a), Ok(b)) if a == b);
    CheckOutcome {
        name: "cli.output_determinism",
        tolerance: 0.0,
        measured: if passed { 0.0 } else { 1.0 },
        passed,
    }
}

fn cmd_verify() -> Result<ExitCode, AppError> {
    let mut outcomes = run_invariant_suite();
    outcomes.push(cli_round_trip_check());
    outcomes.push(cli_determinism_check());
    let mut stdout = std::io::stdout();
    let mut failures = 0;
    for outcome in &outcomes {
        stdout.write_all(check_line(outcome).as_bytes())?;
        if !outcome.passed {
            failures += 1;
        }
    }
    writeln!(stdout, "verify: {} checks, {failures} failed", outcomes.len())?;
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(command: Command) -> Result<ExitCode, AppError> {
    match command {
        Command::IdScan(args) => {
            emit(&id_scan_table(&args)?, &args.output)?;
        }
        Command::Moments(args) => {
            emit(&moments_table(&args)?, &args.output)?;
        }
        Command::Scissors(args) => {
            emit(&scissors_table(&args)?, &args.output)?;
        }
        Command::Ndpa(args) => {
            emit(&ndpa_table(&args)?, &args.output)?;
        }
        Command::Jc(args) => {
            emit(&jc_table(&args)?, &args.output)?;
        }
        Command::Dump(args) => {
            let spec = args.state.single_spec("dump")?;
            let policy = BuildPolicy {
                cutoff: args.state.cutoff,
                ..Default::default()
            };
            let state = build_state(&spec, &policy)?;
            write_text(&state.state_json(), &args.out)?;
        }
        Command::Verify => return cmd_verify(),
    }
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() {
    if let Ok(value) = std::env::var("FOCKPROBE_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
