//! Command-line front end. `exec` parses arguments, runs one subcommand and
//! returns the process exit code: 0 on success, 1 when a checked invariant
//! fails, 2 on bad input.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use anchorlab::breaker::{
    breaking_gap, conditioned_state, mismatch_closed_form, mismatch_probability, repair_unitaries,
    verify_marginal, BreakerJoint,
};
use anchorlab::games::{
    anchor_game, classical_value_exact, entangled_value_seesaw, repeat_game, AnchorSide, AnchorSpec, SeesawConfig,
    DEFAULT_ANCHOR,
};
use anchorlab::lab::{run_battery, BatteryConfig, Suite};
use anchorlab::Game;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub mod decay;

pub use decay::{decay_experiment, DecayRow, CSV_HEADER};

/// Joint and mismatch checks of the `breaker` command.
const MARGINAL_TOL: f64 = 1e-12;
const BREAKING_TOL: f64 = 1e-10;
const MISMATCH_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input, or parameters out of range.
    Input(String),
    /// A computed invariant failed.
    Violation(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Violation(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Violation(m) => write!(f, "violation: {m}"),
        }
    }
}

fn input<E: Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "anchorlab", version, about = "Anchored games, repetition and a numerical fact battery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classical value by enumeration or entangled lower bound by see-saw.
    Value(ValueArgs),
    /// Anchor a game on one or both sides.
    Anchor(AnchorArgs),
    /// k-fold parallel repetition of a game.
    Repeat(RepeatArgs),
    /// Correlation-breaking checks and the repair demonstration.
    Breaker(BreakerArgs),
    /// Run the seeded fact battery.
    Verify(VerifyArgs),
    /// Classical and entangled values of G^k for k = 1..kmax, as CSV.
    Decay(DecayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Classical,
    Entangled,
}

#[derive(Debug, Args)]
struct SeesawArgs {
    /// Local dimension of each player.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Iteration cap per restart.
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Stop when a round improves the value by less than this.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl SeesawArgs {
    fn config(&self) -> SeesawConfig {
        SeesawConfig {
            dim: self.dim,
            restarts: self.restarts,
            max_iters: self.iters,
            tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct ValueArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Classical)]
    mode: Mode,
    #[command(flatten)]
    seesaw: SeesawArgs,
    /// JSON report with the optimal strategy.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnchorArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, default_value = "y")]
    side: AnchorSide,
    #[arg(long)]
    zeta: f64,
    /// Output game; printed to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RepeatArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(short = 'k')]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BreakerArgs {
    #[arg(long)]
    game: PathBuf,
    /// Anchor the game on the Y side first; otherwise it must already carry
    /// a Y anchor.
    #[arg(long)]
    zeta: Option<f64>,
    /// Repetitions for the repair demonstration; coordinates 1..k are
    /// conditioned on and coordinate 0 is repaired.
    #[arg(short = 'k')]
    k: Option<usize>,
    #[command(flatten)]
    seesaw: SeesawArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Overrides both the classical and the quantum tolerance.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Battery report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecayArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    kmax: usize,
    #[command(flatten)]
    seesaw: SeesawArgs,
    /// Exponent constant of the repetition bound column.
    #[arg(long, default_value_t = 1.0)]
    constant: f64,
    /// CSV output; printed to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command, writing the
/// human summary to standard output.
pub fn exec<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    exec_with(argv, &mut std::io::stdout().lock())
}

/// As [`exec`] with the summary written to `out`.
pub fn exec_with<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Value(a) => value(a, out),
        Command::Anchor(a) => anchor(a, out),
        Command::Repeat(a) => repeat(a, out),
        Command::Breaker(a) => breaker(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Decay(a) => decay_cmd(a, out),
    }
}

pub fn load_game(path: &Path) -> Result<Game> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Game::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: impl Display) -> Result<()> {
    writeln!(out, "{text}").map_err(input)
}

/// Writes `text` to `path`, or to the summary stream when there is no path.
fn deliver(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_file(p, &format!("{text}\n")),
        None => emit(out, text),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn value(a: ValueArgs, out: &mut dyn Write) -> Result<()> {
    let game = load_game(&a.game)?;
    let report = match a.mode {
        Mode::Classical => {
            let (v, strat) = classical_value_exact(&game).map_err(input)?;
            emit(out, v)?;
            json!({ "mode": "classical", "value": v, "strategy": strat })
        }
        Mode::Entangled => {
            let cfg = a.seesaw.config();
            let r = entangled_value_seesaw(&game, &cfg).map_err(input)?;
            emit(out, r.value)?;
            if !r.converged {
                emit(out, "note: best restart stopped at the iteration cap")?;
            }
            json!({
                "mode": "entangled",
                "lower_bound": r.value,
                "config": cfg,
                "converged": r.converged,
                "best_restart": r.best_restart,
                "trace": r.trace,
                "strategy": r.strategy,
            })
        }
    };
    if let Some(p) = &a.out {
        write_file(p, &format!("{}\n", pretty(&report)))?;
    }
    Ok(())
}

fn anchor(a: AnchorArgs, out: &mut dyn Write) -> Result<()> {
    let game = load_game(&a.game)?;
    let anchored = anchor_game(&game, &AnchorSpec::new(a.side, a.zeta)).map_err(input)?;
    let (nx, ny, _, _) = anchored.sizes();
    if a.out.is_some() {
        emit(out, format!("anchored with zeta {}: |X| = {nx}, |Y| = {ny}", a.zeta))?;
    }
    deliver(a.out.as_deref(), &anchored.to_json(), out)
}

fn repeat(a: RepeatArgs, out: &mut dyn Write) -> Result<()> {
    let game = load_game(&a.game)?;
    let rep = repeat_game(&game, a.k).map_err(input)?;
    let (nx, ny, na, nb) = rep.sizes();
    if a.out.is_some() {
        emit(out, format!("{}-fold repetition: |X| = {nx}, |Y| = {ny}, |A| = {na}, |B| = {nb}", a.k))?;
    }
    deliver(a.out.as_deref(), &rep.to_json(), out)
}

fn breaker(a: BreakerArgs, out: &mut dyn Write) -> Result<()> {
    let base = load_game(&a.game)?;
    let game = match a.zeta {
        Some(z) => anchor_game(&base, &AnchorSpec::new(AnchorSide::Y, z)).map_err(input)?,
        None => base,
    };
    let joint = BreakerJoint::from_anchored_game(&game, DEFAULT_ANCHOR).map_err(input)?;
    let marginal = verify_marginal(&joint).map_err(input)?;
    let breaking = breaking_gap(&joint).map_err(input)?;
    let mismatch = mismatch_probability(&joint);
    let closed = mismatch_closed_form(joint.zeta);
    emit(out, format!("zeta                      {:.10}", joint.zeta))?;
    emit(out, format!("marginal gap              {marginal:.3e}"))?;
    emit(out, format!("I(X:Y | D, G)             {breaking:.3e}"))?;
    emit(out, format!("Pr[G = Y]                 {mismatch:.12} (closed form {closed:.12})"))?;
    emit(out, format!("Pr[G = y* | D = 1]        {:.12}", joint.anchor_probability()))?;
    let mut failures = Vec::new();
    if !(marginal <= MARGINAL_TOL) {
        failures.push(format!("marginal gap {marginal:e}"));
    }
    if !(breaking <= BREAKING_TOL) {
        failures.push(format!("conditional dependence {breaking:e}"));
    }
    if !((mismatch - closed).abs() <= MISMATCH_TOL) {
        failures.push(format!("mismatch {mismatch} vs {closed}"));
    }
    let mut report = json!({
        "zeta": joint.zeta,
        "marginal_gap": marginal,
        "breaking_gap": breaking,
        "mismatch_probability": mismatch,
        "mismatch_closed_form": closed,
        "anchor_probability": joint.anchor_probability(),
        "joint": joint,
    });
    if let Some(k) = a.k {
        let cfg = a.seesaw.config();
        let rep = repeat_game(&game, k).map_err(input)?;
        let seesaw = entangled_value_seesaw(&rep, &cfg).map_err(input)?;
        let coords: Vec<usize> = (1..k).collect();
        let analysis = conditioned_state(&game, &seesaw.strategy, &coords, k).map_err(input)?;
        let repair = repair_unitaries(&analysis, 0).map_err(input)?;
        emit(out, format!("see-saw value of G^{k}      {:.10}", seesaw.value))?;
        emit(out, format!("Pr[win coordinates {coords:?}] {:.10}", analysis.pr_success))?;
        emit(out, format!("repair distance           {:.10}", repair.distance))?;
        report["repair"] = json!({
            "seesaw": { "config": cfg, "value": seesaw.value, "converged": seesaw.converged },
            "analysis": analysis.summary(),
            "repair": repair,
        });
    }
    if let Some(p) = &a.out {
        write_file(p, &format!("{}\n", pretty(&report)))?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(failures.join("; ")))
    }
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = BatteryConfig { seed: a.seed, trials: a.trials, suite: a.suite, ..Default::default() };
    if let Some(t) = a.tol {
        cfg.classical_tolerance = t;
        cfg.quantum_tolerance = t;
    }
    let report = run_battery(&cfg).map_err(input)?;
    for (id, f) in &report.facts {
        let margin = f.min_margin.map_or("-".to_string(), |m| format!("{m:.3e}"));
        let mut line = format!("{id:<22} trials {:>6}  violations {:>4}  min margin {margin}", f.trials, f.violations);
        if let Some(d) = &f.discrepancy {
            line.push_str(&format!("  [report only: {} discrepancies, worst {:.3e}]", d.count, d.min));
        }
        emit(out, line)?;
    }
    if let Some(p) = &a.out {
        write_file(p, &format!("{}\n", report.to_json()))?;
    }
    let total = report.violations();
    emit(out, if total == 0 { "PASS".to_string() } else { format!("FAIL ({total} violations)") })?;
    if total == 0 {
        Ok(())
    } else {
        Err(CliError::Violation(format!("{total} battery violations")))
    }
}

fn decay_cmd(a: DecayArgs, out: &mut dyn Write) -> Result<()> {
    let game = load_game(&a.game)?;
    let rows = decay_experiment(&game, a.kmax, &a.seesaw.config(), a.constant)?;
    let csv = decay::to_csv(&rows);
    if let Some(p) = &a.out {
        write_file(p, &csv)?;
        for r in &rows {
            emit(out, format!("k = {}: classical {:.10}, entangled >= {:.10}", r.k, r.classical_value, r.entangled_lb))?;
        }
        Ok(())
    } else {
        write!(out, "{csv}").map_err(input)
    }
}
