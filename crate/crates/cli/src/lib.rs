//! The `usol` command line. [`run_cli`] is the whole program minus process
//! plumbing, so tests can drive it with in-memory output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use usol::certify::{self, CertVerdict, Certificate, CertifyConfig, Direction};
use usol::divergence::{analyze_divergences, syntactic_criterion, DivergenceClass, DivergenceConfig, Lasso};
use usol::equations::{check_guardedness, syntactic_solution, unfold, Capture};
use usol::equiv::{decide, Relation, Verdict};
use usol::lts::{explore, to_dot, to_json, DEFAULT_MAX_STATES};
use usol::model::Model;
use usol::syntax::{desugar_values, parse_program, pretty_print};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "usol", about = "Certify that systems of CCS equations have unique solutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a program and print it with values compiled away.
    Parse { file: PathBuf },
    /// Explore the LTS of a term.
    Lts {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, env = "USOL_MAX_STATES", default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Decide a relation between two terms.
    Equiv {
        file: PathBuf,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        /// bisim, sim, trace-incl or trace-eq
        #[arg(long, default_value = "bisim")]
        rel: String,
        #[arg(long, env = "USOL_MAX_STATES", default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Print the n-th unfolding of a system.
    Unfold {
        file: PathBuf,
        #[arg(long)]
        system: String,
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
    },
    /// Classify the divergences of a system's syntactic solution.
    Diverge {
        file: PathBuf,
        #[arg(long)]
        system: String,
        #[arg(long, env = "USOL_MAX_STATES", default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[arg(long, default_value_t = 8)]
        max_unfold: usize,
    },
    /// Certify candidate solutions of a system.
    Check {
        file: PathBuf,
        #[arg(long)]
        system: String,
        /// One or two candidate sets, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        candidates: Vec<String>,
        /// bisim or trace-eq; sim or trace-incl need --direction
        #[arg(long, default_value = "bisim")]
        rel: String,
        #[arg(long)]
        direction: Option<String>,
        #[arg(long, env = "USOL_MAX_STATES", default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[arg(long, default_value_t = 8)]
        max_unfold: usize,
        /// Write the certificate here (`-` for standard output).
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Re-execute the premises recorded in a certificate.
    Replay {
        file: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
}

/// Input problems: reported on standard error, exit code 3.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<i32, InputError>;

/// Runs one command. `argv[0]` is the program name.
pub fn run_cli<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn read(file: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(file).map_err(|e| InputError(format!("{}: {e}", file.display())))
}

fn load(file: &Path) -> Result<Model, InputError> {
    let src = read(file)?;
    Model::from_source(&src).map_err(|d| located(file, &d))
}

fn located(file: &Path, d: &usol::syntax::Diagnostics) -> InputError {
    let lines: Vec<String> = d.0.iter().map(|d| format!("{}:{d}", file.display())).collect();
    InputError(lines.join("\n"))
}

fn warn_captures(captures: &[Capture], err: &mut dyn Write) -> Result<(), InputError> {
    for c in captures {
        writeln!(err, "warning: {}", c.to_diagnostic().message)?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str, out: &mut dyn Write) -> Result<(), InputError> {
    if path == Path::new("-") {
        writeln!(out, "{text}")?;
    } else {
        std::fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Parse { file } => {
            let src = read(&file)?;
            let program = parse_program(&src).map_err(|d| located(&file, &d))?;
            let pure = desugar_values(&program).map_err(|d| located(&file, &d))?;
            Model::from_program(&program).map_err(|d| located(&file, &d))?;
            write!(out, "{}", pretty_print(&pure))?;
            Ok(EXIT_OK)
        }
        Command::Lts { file, term, dot, json, max_states } => {
            let m = load(&file)?;
            let p = m.parse_term(&term).map_err(|d| located(Path::new("--term"), &d))?;
            let l = explore(&p, &m.env, max_states)?;
            writeln!(
                out,
                "{} states, {} transitions, {}",
                l.num_states(),
                l.num_transitions(),
                if l.is_complete() { "complete".to_string() } else { format!("truncated at {max_states} states") }
            )?;
            if let Some(path) = dot {
                write_file(&path, &to_dot(&l), out)?;
            }
            if let Some(path) = json {
                write_file(&path, &to_json(&l), out)?;
            }
            Ok(if l.is_complete() { EXIT_OK } else { EXIT_UNKNOWN })
        }
        Command::Equiv { file, lhs, rhs, rel, max_states } => {
            let relation: Relation = rel.parse()?;
            let m = load(&file)?;
            let p = m.parse_term(&lhs).map_err(|d| located(Path::new("--lhs"), &d))?;
            let q = m.parse_term(&rhs).map_err(|d| located(Path::new("--rhs"), &d))?;
            let r = decide(relation, &p, &q, &m.env, max_states)?;
            let verdict = match r.verdict {
                Verdict::Holds => "holds",
                Verdict::Fails => "fails",
                Verdict::UnknownTruncated => "unknown (state bound reached)",
            };
            writeln!(out, "{p} {relation} {q}: {verdict}")?;
            writeln!(out, "states: {} / {}", r.stats.lhs_states, r.stats.rhs_states)?;
            if let Some(w) = &r.witness {
                writeln!(out, "witness: {w}")?;
            }
            Ok(verdict_code(r.verdict))
        }
        Command::Unfold { file, system, n } => {
            let m = load(&file)?;
            let s = m.system(&system).ok_or_else(|| InputError(format!("no system named `{system}`")))?;
            if n == 0 {
                return Err(InputError("unfolding depth starts at 1".into()));
            }
            if n >= 2 {
                warn_captures(&s.captures(&s.bodies, &m.env), err)?;
            }
            let u = unfold(s, n);
            writeln!(out, "system {} {{", u.name)?;
            for (x, e) in u.variables.iter().zip(&u.bodies) {
                writeln!(out, "  {x} = {e};")?;
            }
            writeln!(out, "}}")?;
            Ok(EXIT_OK)
        }
        Command::Diverge { file, system, max_states, max_unfold } => {
            diverge(&file, &system, max_states, max_unfold, out)
        }
        Command::Check { file, system, candidates, rel, direction, max_states, max_unfold, cert } => {
            let relation: Relation = rel.parse()?;
            let m = load(&file)?;
            let config = CertifyConfig { max_states, max_unfold, ..CertifyConfig::default() };
            let names: Vec<&str> = candidates.iter().map(String::as_str).collect();
            if let Some(s) = m.system(&system) {
                for set in names.iter().filter_map(|n| m.candidate_set(n)) {
                    warn_captures(&s.captures(&set.tuple, &m.env), err)?;
                }
            }
            let c = if relation.is_preorder() {
                let direction: Direction = direction
                    .as_deref()
                    .ok_or_else(|| InputError(format!("--rel {rel} needs --direction max or min")))?
                    .parse()?;
                let [one] = names.as_slice() else {
                    return Err(InputError("pre-equations take a single candidate set".into()));
                };
                certify::certify_preorder(&m, &system, one, direction, relation, &config)?
            } else {
                if direction.is_some() {
                    return Err(InputError(format!("--direction applies to sim and trace-incl, not {rel}")));
                }
                certify::certify_unique_solution(&m, &system, &names, relation, &config)?
            };
            write!(out, "{}", render(&c))?;
            if let Some(path) = cert {
                write_file(&path, &c.to_json(), out)?;
            }
            Ok(match c.verdict {
                v if v.is_certified() => EXIT_OK,
                CertVerdict::Refused { .. } => EXIT_FAILED,
                _ => EXIT_UNKNOWN,
            })
        }
        Command::Replay { file, cert } => {
            let m = load(&file)?;
            let c = Certificate::from_json(&read(&cert)?)?;
            let report = certify::replay(&m, &c)?;
            for item in &report.items {
                writeln!(out, "{} {}: {}", if item.ok { "ok  " } else { "FAIL" }, item.premise, item.detail)?;
            }
            Ok(if report.all_ok() { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Holds => EXIT_OK,
        Verdict::Fails => EXIT_FAILED,
        Verdict::UnknownTruncated => EXIT_UNKNOWN,
    }
}

fn diverge(file: &Path, system: &str, max_states: usize, max_unfold: usize, out: &mut dyn Write) -> Outcome {
    let m = load(file)?;
    let s = m.system(system).ok_or_else(|| InputError(format!("no system named `{system}`")))?;
    let guard = check_guardedness(s, max_unfold);
    let Some(depth) = guard.depth else {
        writeln!(
            out,
            "system {system} is not guarded up to unfolding depth {max_unfold}; its solution has no LTS here"
        )?;
        return Ok(EXIT_FAILED);
    };
    let analysed = if depth == 0 { s.clone() } else { unfold(s, depth) };
    let sol = syntactic_solution(&analysed, &m.env)?;
    let env = m.env.extend(sol.defs.iter().cloned());
    // As in `check`: once the criterion settles the question, exploration
    // only looks for a witness cycle, so a short probe is enough.
    let criterion = syntactic_criterion(&analysed, &env, max_unfold);
    let bound = if criterion.satisfied { max_states.min(CertifyConfig::default().probe_states) } else { max_states };
    let report = analyze_divergences(&sol, &env, &DivergenceConfig { max_states: bound, max_unfold })?;
    if depth > 0 {
        writeln!(out, "analysed unfolding {} (depth {depth})", analysed.name)?;
    }
    if criterion.satisfied {
        writeln!(out, "syntactic criterion holds; exploring at most {bound} states")?;
    }
    for e in &report.explored {
        writeln!(out, "explored {}: {} states{}", e.constant, e.states, if e.complete { "" } else { " (truncated)" })?;
    }
    let class = match report.class {
        DivergenceClass::DivergenceFree => "divergence-free",
        DivergenceClass::AllInnocuous => "all divergences innocuous",
        DivergenceClass::NonInnocuous => "non-innocuous divergence",
        DivergenceClass::UnknownTruncated => "unknown (state bound reached)",
    };
    match report.basis {
        Some(b) => writeln!(out, "class: {class} ({})", basis_name(b))?,
        None => writeln!(out, "class: {class}")?,
    }
    if let Some(w) = &report.witness {
        write!(out, "{}", render_lasso(w))?;
    }
    Ok(match report.class {
        DivergenceClass::DivergenceFree | DivergenceClass::AllInnocuous => EXIT_OK,
        DivergenceClass::NonInnocuous => EXIT_FAILED,
        DivergenceClass::UnknownTruncated => EXIT_UNKNOWN,
    })
}

fn basis_name(b: usol::divergence::Basis) -> &'static str {
    match b {
        usol::divergence::Basis::CompleteExploration => "complete exploration",
        usol::divergence::Basis::WitnessFound => "witness found",
        usol::divergence::Basis::SyntacticCriterion => "syntactic criterion",
    }
}

fn render_lasso(w: &Lasso) -> String {
    let mut s = String::new();
    let step = |s: &mut String, st: &usol::divergence::LassoStep| {
        let count = if st.count > 0 { format!(" [{}]", st.count) } else { String::new() };
        s.push_str(&format!("  {} --{}{count}--> {}\n", st.from, st.label, st.to));
    };
    let steps = |n: usize| if n == 1 { "1 step".to_string() } else { format!("{n} steps") };
    s.push_str(&format!("witness prefix ({}):\n", steps(w.prefix.len())));
    for st in &w.prefix {
        step(&mut s, st);
    }
    s.push_str(&format!("witness cycle ({}):\n", steps(w.cycle.len())));
    for st in &w.cycle {
        step(&mut s, st);
    }
    s
}

/// Human-readable summary of a certificate.
pub fn render(c: &Certificate) -> String {
    let mut s = String::new();
    let mut line = |t: String| {
        s.push_str(&t);
        s.push('\n');
    };
    line(format!("system {}: {}", c.system, c.equations.join("; ")));
    match c.direction {
        Some(d) => {
            line(format!("relation: {} ({} direction)", c.relation, if d == Direction::Max { "max" } else { "min" }))
        }
        None => line(format!("relation: {}", c.relation)),
    }
    let g = &c.guard;
    let route = match g.route {
        Some(certify::GuardRoute::Syntactic) => "syntactic".to_string(),
        Some(certify::GuardRoute::Unfolded { depth }) => {
            format!("unfolded (depth {depth}, analysing {})", g.analysed_system)
        }
        Some(certify::GuardRoute::MilnerSequential) => "milner-sequential".to_string(),
        None => format!("none up to depth {}", g.max_unfold),
    };
    line(format!(
        "guard: {route}; strongly guarded {}, sequential {}{}",
        yes(g.strongly_guarded),
        yes(g.sequential),
        if g.milner_applicable { "; Milner route available" } else { "" }
    ));
    if let Some(d) = &c.divergence {
        let route = match d.route {
            Some(certify::DivergenceRoute::DivergenceFree) => "divergence-free",
            Some(certify::DivergenceRoute::InnocuousOnly) => "innocuous-only",
            Some(certify::DivergenceRoute::SyntacticCriterion) => "syntactic-criterion",
            None => "not established",
        };
        line(format!(
            "divergence: {route}; class {:?}, criterion {}",
            d.class,
            if d.criterion_satisfied { "satisfied" } else { "not satisfied" }
        ));
    }
    for sc in &c.solution_checks {
        line(format!(
            "solution {}[{}]: {} {} {}: {}",
            sc.candidates,
            sc.variable,
            sc.check.lhs,
            sc.check.relation,
            sc.check.rhs,
            verdict_name(sc.check.verdict)
        ));
    }
    for cc in &c.cross_checks {
        line(format!("cross-check: {} {} {}: {}", cc.lhs, cc.relation, cc.rhs, verdict_name(cc.verdict)));
    }
    match &c.verdict {
        CertVerdict::Refused { premise, reason, witness } => {
            line(format!("verdict: refused at {premise:?}: {reason}"));
            if !witness.is_null() {
                line(format!("witness: {witness}"));
            }
        }
        CertVerdict::Unknown { reason } => line(format!("verdict: unknown: {reason}")),
        v => line(format!("verdict: {}", v.name())),
    }
    if let Some(k) = &c.conclusion {
        line(format!("claim: {}", k.claim));
        line(format!("theorem: {}", k.theorem));
    }
    s
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::UnknownTruncated => "unknown",
    }
}
