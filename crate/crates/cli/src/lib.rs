//! The `levelta` command line.

use clap::{Args, Parser, Subcommand, ValueEnum};
use levelta_core::abstraction::{abstract_system, has_critical_point, SliceStatus};
use levelta_core::dynsys::{find_equilibria, flow, EquilibriumKind};
use levelta_core::io::{
    export_ta_json, import_ta_json, load_model, ta_to_dot, write_flow, write_membership, write_run,
    Model,
};
use levelta_core::partition::{build_cells, level_set_points, validate_nonincreasing, Grid};
use levelta_core::ta::{simulate_run, TimedAutomaton};
use levelta_core::verify::{
    check_completeness, check_critical_points, check_levelset_sync, check_positive_invariance,
    check_soundness, check_unstable_manifold_containment, Verdict, VerdictKind, VerifyError,
};
use serde_json::json;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "levelta",
    version,
    about = "Level-set abstraction of dynamical systems into timed automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nonincreasing test and regular-value diagnostics for every family.
    Validate { model: PathBuf },
    /// Cell census, adjacency and warnings.
    Partition {
        model: PathBuf,
        /// Write lattice-point cell membership as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Transit-time tables and the generated automaton.
    Abstract {
        model: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the transit-time tables as JSON.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Trajectory of the system or a run of an automaton, as CSV.
    Simulate(SimulateArgs),
    /// Run checks and print a JSON report.
    Verify {
        model: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        check: Vec<Check>,
        /// Also write the report to a file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convert an automaton JSON file to GraphViz.
    Export {
        ta: PathBuf,
        #[arg(long)]
        dot: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// A model file, or an automaton JSON file with `--ta`.
    input: PathBuf,
    /// Integrate the vector field (default).
    #[arg(long, conflicts_with = "ta")]
    ode: bool,
    /// Simulate a random run of the automaton.
    #[arg(long)]
    ta: bool,
    /// Start point `x1,x2,...` for `--ode`, or a location id for `--ta`.
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    #[arg(short = 't', long = "time")]
    time: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Write CSV here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Check {
    Sound,
    Complete,
    /// Level-set synchronization of psi.
    Prop2,
    /// Equilibria are critical points.
    Lemma1,
    /// Unstable manifolds lie in level sets.
    Theorem1,
    /// Sublevel sets are positively invariant.
    Invariance,
    All,
}

/// Failure with the exit code to report.
struct Failure {
    code: i32,
    message: String,
}

fn input_error(e: impl Display) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    }
}

/// Numerical failures during a run are not input errors but still stop it.
fn run_error(e: impl Display) -> Failure {
    Failure {
        code: EXIT_FAIL,
        message: e.to_string(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<std::fs::File, Failure> {
    std::fs::File::create(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Reports go to `out`, diagnostics to stderr.
pub fn run<I, S>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("levelta: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { model } => validate(&load_model(&model).map_err(input_error)?, out),
        Command::Partition { model, csv } => partition(
            &load_model(&model).map_err(input_error)?,
            csv.as_deref(),
            out,
        ),
        Command::Abstract {
            model,
            output,
            tables,
        } => abstract_cmd(
            &load_model(&model).map_err(input_error)?,
            &output,
            tables.as_deref(),
            out,
        ),
        Command::Simulate(args) => simulate(args, out),
        Command::Verify {
            model,
            check,
            output,
        } => {
            let m = load_model(&model).map_err(input_error)?;
            let report = verify_report(&m, &check).map_err(run_error)?;
            let pass = report["pass"].as_bool().unwrap_or(false);
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            if let Some(p) = output {
                write_file(&p, &text)?;
            }
            out.write_all(text.as_bytes()).map_err(run_error)?;
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Export { ta, dot } => {
            let ta = import_ta_json(&ta).map_err(input_error)?;
            write_file(&dot, &ta_to_dot(&ta))?;
            Ok(EXIT_PASS)
        }
    }
}

fn grid_for(m: &Model) -> Result<Grid, Failure> {
    Grid::new(m.system.domain(), m.options.grid).map_err(input_error)
}

fn validate(m: &Model, out: &mut dyn Write) -> Result<i32, Failure> {
    let grid = grid_for(m)?;
    let mut code = EXIT_PASS;
    for pf in &m.families {
        let v = validate_nonincreasing(pf, &grid, m.options.tol_psi);
        if v.failed() {
            code = EXIT_FAIL;
        }
        let _ = writeln!(out, "{v}");
        for w in &v.witnesses {
            let _ = writeln!(out, "  {}: {:?} value {:?}", w.label, w.point, w.value);
        }
        let values = grid.sample(pf.phi()).map_err(run_error)?;
        for &a in pf.levels() {
            let kind = if !a.is_finite() {
                "infinite".to_string()
            } else {
                let pts =
                    level_set_points(&grid, pf.phi(), &values, a, m.options.samples_per_level)
                        .map_err(run_error)?;
                if pts.is_empty() {
                    "empty on the lattice".to_string()
                } else if has_critical_point(pf, &pts, m.options.tol_grad) {
                    "critical".to_string()
                } else {
                    format!("regular ({} points)", pts.len())
                }
            };
            let _ = writeln!(out, "  level {a}: {kind}");
        }
    }
    if m.families.is_empty() {
        let _ = writeln!(out, "no partition blocks");
    }
    Ok(code)
}

fn partition(m: &Model, csv: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = build_cells(m.families.clone(), grid_for(m)?).map_err(input_error)?;
    let _ = writeln!(
        out,
        "{} cells in {} extended cells, {} adjacencies",
        p.cells().len(),
        p.extended_cell_count(),
        p.adjacency().len()
    );
    for c in p.cells() {
        let _ = writeln!(out, "{}\t{} points", c.label(), c.points.len());
    }
    for w in p.warnings() {
        let _ = writeln!(out, "warning: {w:?}");
    }
    if let Some(path) = csv {
        write_membership(create(path)?, &p).map_err(run_error)?;
    }
    Ok(EXIT_PASS)
}

fn abstract_cmd(
    m: &Model,
    output: &Path,
    tables: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let a = abstract_system(&m.system, m.families.clone(), &m.options).map_err(input_error)?;
    for t in &a.tables {
        for s in &t.slices {
            let _ = writeln!(
                out,
                "{}[{}] [{}, {}] {:?}: t_low = {}, t_high = {}",
                t.family,
                s.slice,
                s.stats.lower,
                s.stats.upper,
                s.status,
                s.stats.t_low,
                s.stats.t_high
            );
        }
    }
    let _ = writeln!(
        out,
        "{} locations, {} edges, {} initial",
        a.ta.locations().len(),
        a.ta.edges().len(),
        a.ta.initial().len()
    );
    export_ta_json(&a.ta, output).map_err(input_error)?;
    if let Some(path) = tables {
        let text = serde_json::to_string_pretty(&a.tables).expect("tables serialize") + "\n";
        write_file(path, &text)?;
    }
    Ok(EXIT_PASS)
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>, Failure> {
    let x: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| input_error(format!("malformed point `{s}`")))?;
    if x.len() != dim {
        return Err(input_error(format!(
            "point `{s}` has {} coordinates, expected {dim}",
            x.len()
        )));
    }
    Ok(x)
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if !(args.time >= 0.0 && args.time.is_finite()) {
        return Err(input_error(format!(
            "time must be nonnegative, got {}",
            args.time
        )));
    }
    let mut buf = Vec::new();
    if args.ta {
        let is_json = args.input.extension().is_some_and(|e| e == "json");
        let (ta, seed): (TimedAutomaton, u64) = if is_json {
            (
                import_ta_json(&args.input).map_err(input_error)?,
                args.seed.unwrap_or(42),
            )
        } else {
            let m = load_model(&args.input).map_err(input_error)?;
            let a =
                abstract_system(&m.system, m.families.clone(), &m.options).map_err(input_error)?;
            (a.ta, args.seed.unwrap_or(m.options.seed))
        };
        let start = match &args.from {
            Some(id) => ta
                .location_index(id)
                .ok_or_else(|| input_error(format!("unknown location `{id}`")))?,
            None => *ta
                .initial()
                .first()
                .ok_or_else(|| input_error("the automaton has no initial location"))?,
        };
        let run = simulate_run(&ta, start, seed, args.time).map_err(input_error)?;
        write_run(&mut buf, &ta, &run).map_err(run_error)?;
    } else {
        let m = load_model(&args.input).map_err(input_error)?;
        let from = args
            .from
            .as_deref()
            .ok_or_else(|| input_error("--from is required with --ode"))?;
        let x0 = parse_point(from, m.system.dim())?;
        let sample = flow(&m.system, &x0, args.time, m.options.rk4_step).map_err(input_error)?;
        write_flow(&mut buf, &sample).map_err(run_error)?;
        if let Some(t) = sample.exit_time {
            eprintln!("levelta: trajectory left the domain at t = {t}");
        }
    }
    match args.output {
        Some(p) => create(&p)?.write_all(&buf).map_err(run_error)?,
        None => out.write_all(&buf).map_err(run_error)?,
    }
    Ok(EXIT_PASS)
}

fn wants(checks: &[Check], c: Check) -> bool {
    checks.contains(&c) || checks.contains(&Check::All)
}

/// Runs the requested checks. The report is a pure function of the model,
/// so equal seeds give identical reports.
pub fn verify_model(m: &Model, checks: &[&str]) -> Result<serde_json::Value, String> {
    let checks = checks
        .iter()
        .map(|c| Check::from_str(c, true))
        .collect::<Result<Vec<_>, _>>()?;
    verify_report(m, &checks).map_err(|e| e.to_string())
}

fn verify_report(m: &Model, checks: &[Check]) -> Result<serde_json::Value, VerifyError> {
    let verdicts = run_checks(m, checks)?;
    let pass = verdicts.iter().all(|v| !v.failed());
    let summary: Vec<String> = verdicts.iter().map(Verdict::to_string).collect();
    Ok(json!({
        "pass": pass,
        "failed": verdicts.iter().filter(|v| v.failed()).count(),
        "not_applicable": verdicts.iter().filter(|v| !v.is_applicable()).count(),
        "summary": summary,
        "verdicts": verdicts,
        "options": m.options,
    }))
}

fn run_checks(m: &Model, checks: &[Check]) -> Result<Vec<Verdict>, VerifyError> {
    let sys = &m.system;
    let o = &m.options;
    let grid = Grid::new(sys.domain(), o.grid)?;
    let mut verdicts = Vec::new();
    if wants(checks, Check::Sound) || wants(checks, Check::Complete) {
        let a = abstract_system(sys, m.families.clone(), o)?;
        if wants(checks, Check::Sound) {
            verdicts.push(check_soundness(
                sys,
                &a.partition,
                &a.ta,
                o.n_traj,
                &o.t_grid(),
                o.seed,
                o.rk4_step,
            )?);
        }
        if wants(checks, Check::Complete) {
            let mut v = check_completeness(sys, a.partition.families(), &a.tables, &grid, o)?;
            let excluded = a
                .tables
                .iter()
                .flat_map(|t| &t.slices)
                .filter(|s| s.status != SliceStatus::Regular)
                .count();
            if excluded > 0 {
                v.note(format!("{excluded} slices excluded as non-regular"));
            }
            verdicts.push(v);
        }
    }
    if wants(checks, Check::Prop2) {
        for pf in &m.families {
            for &a in pf.levels() {
                if !a.is_finite() {
                    continue;
                }
                match check_levelset_sync(pf, &grid, a, o.sync_samples, o.tol_grad) {
                    Ok(v) => verdicts.push(v),
                    Err(VerifyError::EmptyLevel { .. }) => verdicts.push(
                        Verdict::new(
                            VerdictKind::LevelsetSync,
                            format!("{} level {a}", pf.name()),
                        )
                        .not_applicable("level set is empty on the lattice"),
                    ),
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let needs_eq = wants(checks, Check::Lemma1) || wants(checks, Check::Theorem1);
    let equilibria = if needs_eq {
        find_equilibria(sys, o.equilibrium_seeds)?
    } else {
        Vec::new()
    };
    if wants(checks, Check::Lemma1) {
        for pf in &m.families {
            verdicts.push(check_critical_points(pf, &equilibria, o.tol_grad)?);
        }
    }
    if wants(checks, Check::Theorem1) {
        let saddles: Vec<_> = equilibria
            .iter()
            .filter(|e| e.kind == EquilibriumKind::Saddle)
            .collect();
        if saddles.is_empty() || sys.dim() != 2 {
            let reason = if sys.dim() != 2 {
                "manifold shooting needs a planar system"
            } else {
                "no saddle equilibria"
            };
            verdicts.push(
                Verdict::new(VerdictKind::ManifoldContainment, "system").not_applicable(reason),
            );
        }
        for eq in saddles.iter().filter(|_| sys.dim() == 2) {
            for pf in &m.families {
                verdicts.push(check_unstable_manifold_containment(sys, pf, eq, &grid, o)?);
            }
        }
    }
    if wants(checks, Check::Invariance) {
        for pf in &m.families {
            for &a in pf.levels().iter().filter(|a| a.is_finite()) {
                let mut v = check_positive_invariance(
                    sys,
                    pf.phi(),
                    a,
                    &grid,
                    o.invariance_samples,
                    o.invariance_t_probe,
                    o.rk4_step,
                )?;
                v.subject = format!("{} <= {a}", pf.name());
                verdicts.push(v);
            }
        }
    }
    Ok(verdicts)
}
