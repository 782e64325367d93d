//! Command-line driver for the hybrid answer set programming engine.
//!
//! Subcommands: `solve` (one incremental run with named selectors),
//! `enumerate` (every answer set, via exhaustive selector enumeration),
//! `check-splitting` (the split and sequence decompositions against the
//! oracle, printed PASS/FAIL per direction), and `verify` (layered
//! enumeration vs. brute force).
//!
//! Exit codes: 0 success, 1 input error, 2 resource guard exceeded, 3 the
//! selector path produced a non-answer-set, 4 a decomposition check failed.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hasp::frontend;
use hasp::incremental::{self, AdvancingSelector, LayerTrace, StationarySelector};
use hasp::model::{InitialCondition, Interpretation};
use hasp::oracle;
use hasp::registry::{Env, Registry};
use hasp::semantics;
use hasp::splitting;
use hasp::{EngineError, Program};

#[derive(Parser)]
#[command(name = "hasp", version, about = "Hybrid answer set programming engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the incremental solver once and validate the result.
    Solve(SolveArgs),
    /// Print every answer set reachable within the horizon.
    Enumerate(CommonArgs),
    /// Check the split and sequence decompositions against the oracle.
    CheckSplitting(CheckArgs),
    /// Compare layered enumeration with the brute-force oracle.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Rule program (.hasp).
    #[arg(long)]
    program: PathBuf,
    /// Initial condition (.init).
    #[arg(long)]
    init: PathBuf,
    /// Maximum time step to explore.
    #[arg(long)]
    horizon: u32,
    /// Override the brute-force enumeration guard.
    #[arg(long)]
    max_facts: Option<usize>,
    /// Override the selector-enumeration branch guard.
    #[arg(long)]
    max_branches: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Advancing selector: select_all, select_none, or seeded_random[(p)].
    #[arg(long = "f", default_value = "select_all")]
    advancing: String,
    /// Stationary selector: first or seeded_random.
    #[arg(long = "d", default_value = "first")]
    stationary: String,
    /// Seed for the seeded selectors.
    #[arg(long)]
    seed: Option<u64>,
    /// Emit the per-layer trace blocks.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Test hook: drop one rule from each computed bottom so the FAIL
    /// paths are exercisable.
    #[arg(long)]
    corrupt_bottom: bool,
}

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_GUARD: u8 = 2;
const EXIT_NOT_ANSWER_SET: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::CheckSplitting(args) => cmd_check_splitting(args),
        Command::Verify(args) => cmd_verify(args),
    };
    ExitCode::from(code.unwrap_or_else(|failure| {
        eprintln!("error: {}", failure.message);
        failure.code
    }))
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn engine_failure(e: EngineError) -> Failure {
    Failure {
        code: if e.is_guard() { EXIT_GUARD } else { EXIT_INPUT },
        message: e.to_string(),
    }
}

struct Loaded {
    program: Program,
    init: InitialCondition,
    registry: Registry,
    horizon: u32,
    out: Option<PathBuf>,
}

impl Loaded {
    fn env(&self, args: &CommonArgs) -> Env<'_> {
        let mut env = Env::new(&self.registry, self.program.delta_t());
        if let Some(n) = args.max_facts {
            env.limits.max_enum_facts = n;
        }
        if let Some(n) = args.max_branches {
            env.limits.max_branches = n;
        }
        env
    }

    /// Writes the report to the chosen sink and returns the exit code.
    fn finish(&self, report: String, code: u8) -> Result<u8, Failure> {
        match &self.out {
            Some(path) => fs::write(path, report)
                .map_err(|e| input_error(format!("{}: {e}", path.display())))?,
            None => print!("{report}"),
        }
        Ok(code)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load(args: &CommonArgs) -> Result<Loaded, Failure> {
    let registry = Registry::with_builtins();
    let program_text = read(&args.program)?;
    let init_text = read(&args.init)?;
    let env = Env::new(&registry, hasp::Rational::ONE);
    let program = frontend::parse_program(&program_text, &env).map_err(|errors| {
        let rendered: Vec<String> = errors
            .into_iter()
            .map(|e| e.with_file(&args.program.display().to_string()).to_string())
            .collect();
        input_error(rendered.join("\n"))
    })?;
    let init = frontend::parse_init(&init_text).map_err(|errors| {
        let rendered: Vec<String> = errors
            .into_iter()
            .map(|e| e.with_file(&args.init.display().to_string()).to_string())
            .collect();
        input_error(rendered.join("\n"))
    })?;
    Ok(Loaded {
        program,
        init,
        registry,
        horizon: args.horizon,
        out: args.out.clone(),
    })
}

fn literal_set(set: &BTreeSet<hasp::Literal>) -> String {
    let mut out = String::from("{");
    for (i, l) in set.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&l.to_string());
    }
    out.push('}');
    out
}

fn write_trace(report: &mut String, layers: &[LayerTrace]) {
    for trace in layers {
        let _ = writeln!(report, "trace layer {}", trace.step);
        for solve in &trace.solves {
            let _ = writeln!(report, "  position {}", solve.position);
            let _ = writeln!(report, "    program:");
            for rule in solve.program.rules() {
                let _ = writeln!(report, "      {rule}");
            }
            match &solve.chosen {
                Some(set) => {
                    let _ = writeln!(report, "    chosen: {}", literal_set(set));
                }
                None => {
                    let _ = writeln!(report, "    chosen: none (no answer set)");
                }
            }
        }
        let _ = writeln!(report, "  facts:");
        for fact in trace.layer.facts() {
            let _ = writeln!(report, "    fact {} @ {}", fact.literal, fact.position);
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let loaded = load(&args.common)?;
    let advancing = AdvancingSelector::parse(&args.advancing, args.seed).map_err(engine_failure)?;
    let stationary =
        StationarySelector::parse(&args.stationary, args.seed).map_err(engine_failure)?;
    let env = loaded.env(&args.common);
    let outcome = incremental::run(
        &env,
        &loaded.program,
        &loaded.init,
        &advancing,
        &stationary,
        loaded.horizon,
    )
    .map_err(engine_failure)?;

    let mut report = frontend::serialize_interpretation(&outcome.result);
    for trace in &outcome.layers {
        let _ = writeln!(
            report,
            "layer {}: positions={} facts={}",
            trace.step,
            trace.positions.len(),
            trace.layer.len()
        );
    }
    if args.trace {
        write_trace(&mut report, &outcome.layers);
    }
    let _ = writeln!(report, "validated: {}", outcome.validated);
    loaded.finish(
        report,
        if outcome.validated {
            EXIT_OK
        } else {
            EXIT_NOT_ANSWER_SET
        },
    )
}

fn cmd_enumerate(args: CommonArgs) -> Result<u8, Failure> {
    let loaded = load(&args)?;
    let env = loaded.env(&args);
    let sets = incremental::enumerate_all(&env, &loaded.program, &loaded.init, loaded.horizon)
        .map_err(engine_failure)?;
    let mut report = String::new();
    for (i, m) in sets.iter().enumerate() {
        let _ = writeln!(report, "answer set {}:", i + 1);
        report.push_str(&frontend::serialize_interpretation(m));
    }
    let _ = writeln!(report, "answer sets: {}", sets.len());
    loaded.finish(report, EXIT_OK)
}

fn cmd_verify(args: CommonArgs) -> Result<u8, Failure> {
    let loaded = load(&args)?;
    let env = loaded.env(&args);
    let incremental_sets =
        incremental::enumerate_all(&env, &loaded.program, &loaded.init, loaded.horizon)
            .map_err(engine_failure)?;
    let oracle_sets =
        oracle::brute_force_answer_sets(&env, &loaded.program, &loaded.init, loaded.horizon)
            .map_err(engine_failure)?;
    let only_incremental: Vec<&Interpretation> = incremental_sets
        .iter()
        .filter(|m| !oracle_sets.contains(m))
        .collect();
    let only_oracle: Vec<&Interpretation> = oracle_sets
        .iter()
        .filter(|m| !incremental_sets.contains(m))
        .collect();
    let mut report = String::new();
    let _ = writeln!(report, "incremental: {}", incremental_sets.len());
    let _ = writeln!(report, "oracle: {}", oracle_sets.len());
    let _ = writeln!(
        report,
        "diff: {}",
        only_incremental.len() + only_oracle.len()
    );
    for m in &only_incremental {
        let _ = writeln!(report, "only-incremental: {m}");
    }
    for m in &only_oracle {
        let _ = writeln!(report, "only-oracle: {m}");
    }
    let ok = only_incremental.is_empty() && only_oracle.is_empty();
    loaded.finish(report, if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_check_splitting(args: CheckArgs) -> Result<u8, Failure> {
    let loaded = load(&args.common)?;
    let env = loaded.env(&args.common);
    let universe = oracle::reachable_universe(&env, &loaded.program, &loaded.init, loaded.horizon)
        .map_err(engine_failure)?;
    let expected =
        oracle::brute_force_answer_sets(&env, &loaded.program, &loaded.init, loaded.horizon)
            .map_err(engine_failure)?;
    let sequence = splitting::prefix_sequence(&universe);
    let rules = loaded.program.rules();
    let positions = universe.positions();

    let mut report = String::new();
    let mut checks = 0usize;
    let mut failures = 0usize;
    let mut record = |report: &mut String, label: String, ok: bool| {
        checks += 1;
        if !ok {
            failures += 1;
        }
        let _ = writeln!(report, "{label}: {}", if ok { "PASS" } else { "FAIL" });
    };

    for (prefix_index, u) in sequence.iter().enumerate() {
        let mut bottom_rules =
            splitting::bottom(&env, u, rules, positions).map_err(engine_failure)?;
        if args.corrupt_bottom {
            bottom_rules.pop();
        }
        for (m_index, m) in expected.iter().enumerate() {
            let (inside, outside) = u.partition(m);
            let bottom_ok = semantics::is_answer_set(&env, &bottom_rules, &loaded.init, &inside)
                .map_err(engine_failure)?;
            let top = splitting::top_program(&env, u, rules, &inside, positions)
                .map_err(engine_failure)?;
            let top_init = InitialCondition::new(semantics::gp_with_initial(&inside, &loaded.init));
            let top_ok = semantics::is_answer_set(&env, &top, &top_init, &outside)
                .map_err(engine_failure)?;
            record(
                &mut report,
                format!("theorem1 prefix={prefix_index} m={} decompose", m_index + 1),
                bottom_ok && top_ok,
            );
        }
        // Assembly direction: every consistent bottom/top union must be an
        // oracle answer set, and together they must cover all of them.
        let mut assembled: Vec<Interpretation> = Vec::new();
        for x in oracle::answer_sets_over(&env, &bottom_rules, &loaded.init, positions)
            .map_err(engine_failure)?
        {
            let top =
                splitting::top_program(&env, u, rules, &x, positions).map_err(engine_failure)?;
            let top_init = InitialCondition::new(semantics::gp_with_initial(&x, &loaded.init));
            for y in oracle::answer_sets_over(&env, &top, &top_init, positions)
                .map_err(engine_failure)?
            {
                let union = x.union(&y);
                if union.is_consistent() && !assembled.contains(&union) {
                    assembled.push(union);
                }
            }
        }
        assembled.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        record(
            &mut report,
            format!("theorem1 prefix={prefix_index} assemble"),
            assembled == expected,
        );
    }

    for (m_index, m) in expected.iter().enumerate() {
        let layers =
            splitting::theorem2_decompose(&env, &sequence, rules, &loaded.init, positions, m)
                .map_err(engine_failure)?;
        record(
            &mut report,
            format!("theorem2 sequence m={} layers", m_index + 1),
            layers.iter().all(|l| l.verdict),
        );
    }
    let assembled = splitting::theorem2_assemble(&env, &sequence, rules, &loaded.init, positions)
        .map_err(engine_failure)?;
    record(
        &mut report,
        "theorem2 sequence assemble".to_string(),
        assembled == expected,
    );

    if failures == 0 {
        let _ = writeln!(report, "result: all {checks} checks passed");
    } else {
        let _ = writeln!(report, "result: {failures} of {checks} checks failed");
    }
    loaded.finish(
        report,
        if failures == 0 {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
    )
}
