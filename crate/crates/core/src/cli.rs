//! Command-line front end. Exit codes: 0 on success, 1 when a query has no
//! answer or `check` finds a disagreement, 2 on usage, input or validation
//! errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::check::check_program;
use crate::fixpoint::minimal_model;
use crate::grammar::{parse_sentence, tokenize_sentence, Grammar};
use crate::program::{has_errors, parse_goal, parse_program, validate, Diagnostic, Program};
use crate::solver::{
    best_proof_deepening, enumerate_answers_deepening, expand_minmax, Answer, ProofNode, SearchOptions, SearchStats,
    Strategy, DEFAULT_DEPTH_LIMIT,
};
use crate::value::{CombinationMode, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_ANSWER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qclp", version, about = "Weighted constraint logic programs: answers, best proofs, minimal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print all answers of a query, best first
    Solve(SolveArgs),
    /// Print the best answer of a query and search statistics
    Best(SolveArgs),
    /// Print the minimal model of a function-free program
    Oracle(OracleArgs),
    /// Compare alpha-beta, exhaustive search and the oracle on every ground goal
    Check(CheckArgs),
    /// Rank the analyses of a sentence under a weighted grammar
    Parse(ParseArgs),
    /// Report diagnostics for a program or grammar file
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct SearchFlags {
    /// Depth limit in max-node to max-node steps
    #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
    depth: usize,
    /// Prune branches whose bound falls below this value (decimal or P/Q)
    #[arg(long, default_value = "0")]
    epsilon: String,
    /// Aggregation over clause bodies
    #[arg(long, default_value = "min", value_parser = parse_mode)]
    mode: CombinationMode,
    #[arg(long, default_value = "alphabeta", value_parser = parse_strategy)]
    strategy: Strategy,
    /// Include proof trees
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn parse_mode(s: &str) -> Result<CombinationMode, String> {
    s.parse()
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Program file
    program: PathBuf,
    /// Query in clause-body syntax, e.g. "p(X) & X = phi"
    #[arg(short, long)]
    query: String,
    #[command(flatten)]
    search: SearchFlags,
    /// Print every answer (default for solve)
    #[arg(long, conflicts_with = "best")]
    all: bool,
    /// Print only the best answer
    #[arg(long)]
    best: bool,
    /// Also print the full min/max tree of the query
    #[arg(long)]
    tree: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    program: PathBuf,
    #[arg(long, default_value = "min", value_parser = parse_mode)]
    mode: CombinationMode,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct CheckArgs {
    program: PathBuf,
    #[arg(long, default_value = "min", value_parser = parse_mode)]
    mode: CombinationMode,
    #[arg(long, default_value = "0")]
    epsilon: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct ParseArgs {
    /// Grammar file
    grammar: PathBuf,
    /// Whitespace-separated tokens
    #[arg(long)]
    sentence: String,
    #[command(flatten)]
    search: SearchFlags,
    #[arg(long, conflicts_with = "best")]
    all: bool,
    #[arg(long)]
    best: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Program file, or grammar file when the extension is `.wclg`
    file: PathBuf,
}

/// One answer in structured output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerReport {
    pub constraint: String,
    pub value: Value,
    pub decimal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof: Option<ProofNode>,
}

impl AnswerReport {
    fn new(a: &Answer, trace: bool) -> AnswerReport {
        AnswerReport {
            constraint: a.constraint.to_string(),
            value: a.value.clone(),
            decimal: a.value.to_decimal(6),
            proof: trace.then(|| a.proof.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub answers: Vec<AnswerReport>,
    pub stats: SearchStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<ProofNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestReport {
    pub answer: Option<AnswerReport>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub atom: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub stabilized_at: usize,
    pub model: Vec<ModelEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub goal: String,
    pub passed: bool,
    pub oracle: Value,
    pub alphabeta: Value,
    pub exhaustive: Value,
    pub alphabeta_nodes: usize,
    pub exhaustive_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub depth_bound: usize,
    pub goals: Vec<CheckEntry>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub value: Value,
    pub decimal: String,
    pub tree: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof: Option<ProofNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub tokens: Vec<String>,
    pub analyses: Vec<AnalysisReport>,
}

/// Runs with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs with explicit output streams; `args[0]` is the program name.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(&a, false, out),
        Command::Best(a) => solve(&a, true, out),
        Command::Oracle(a) => oracle(&a, out),
        Command::Check(a) => check(&a, out),
        Command::Parse(a) => parse(&a, out),
        Command::Validate(a) => validate_file(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(messages)) => {
            for m in messages {
                let _ = writeln!(err, "{m}");
            }
            EXIT_USAGE
        }
    }
}

/// Messages for stderr; always exit code 2.
struct Failure(Vec<String>);

impl Failure {
    fn one(message: impl Into<String>) -> Failure {
        Failure(vec![message.into()])
    }
}

type CmdResult = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::one(format!("error: cannot read {}: {e}", path.display())))
}

fn diagnostics_failure(path: &Path, diags: &[Diagnostic]) -> Failure {
    Failure(diags.iter().map(|d| d.render(&path.display().to_string())).collect())
}

fn load_program(path: &Path, mode: CombinationMode) -> Result<Program, Failure> {
    let text = read(path)?;
    parse_program(&text)
        .map(|p| p.with_mode(mode))
        .map_err(|d| diagnostics_failure(path, &d))
}

fn epsilon(text: &str) -> Result<Value, Failure> {
    let v = Value::parse(text).map_err(|e| Failure::one(format!("error: invalid --epsilon `{text}`: {e}")))?;
    if v >= Value::one() {
        return Err(Failure::one(format!("error: --epsilon must be below 1, got {text}")));
    }
    Ok(v)
}

fn options(flags: &SearchFlags) -> Result<SearchOptions, Failure> {
    Ok(SearchOptions {
        depth_limit: flags.depth,
        epsilon: epsilon(&flags.epsilon)?,
        strategy: flags.strategy,
        mode: flags.mode,
    })
}

fn answer_line(constraint: &str, value: &Value) -> String {
    format!("{constraint} @ {value} ({})", value.to_decimal(6))
}

fn indent(text: &str, by: usize) -> String {
    text.lines().map(|l| format!("{:by$}{l}\n", "")).collect()
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) {
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn solve(args: &SolveArgs, best_only: bool, out: &mut dyn Write) -> CmdResult {
    let prog = load_program(&args.program, args.search.mode)?;
    let opts = options(&args.search)?;
    let (prog, goal) = parse_goal(&args.query, &prog).map_err(|e| Failure::one(format!("error: invalid query: {e}")))?;
    let tree = args.tree.then(|| expand_minmax(&goal, &prog, &opts));
    let trace = args.search.trace;
    let format = args.search.format;
    if best_only {
        let (answer, stats) = best_proof_deepening(&goal, &prog, &opts);
        let report = BestReport {
            answer: answer.as_ref().map(|a| AnswerReport::new(a, trace)),
            stats,
        };
        match format {
            Format::Json => emit_json(out, &report),
            Format::Text => {
                match &answer {
                    Some(a) => {
                        let _ = writeln!(out, "{}", answer_line(&report.answer.as_ref().unwrap().constraint, &a.value));
                        if trace {
                            let _ = write!(out, "{}", indent(&a.proof.to_text(), 2));
                        }
                    }
                    None => {
                        let _ = writeln!(out, "no answer");
                    }
                }
                let _ = writeln!(out, "stats: {}", report.stats);
                if let Some(t) = &tree {
                    let _ = write!(out, "min/max tree:\n{}", indent(&t.to_text(), 2));
                }
            }
        }
        return Ok(if answer.is_some() { EXIT_OK } else { EXIT_NO_ANSWER });
    }
    let result = enumerate_answers_deepening(&goal, &prog, &opts);
    let shown: Vec<&Answer> = if args.best && !args.all {
        result.answers.iter().take(1).collect()
    } else {
        result.answers.iter().collect()
    };
    let report = SolveReport {
        answers: shown.iter().map(|a| AnswerReport::new(a, trace)).collect(),
        stats: result.stats.clone(),
        tree,
    };
    match format {
        Format::Json => emit_json(out, &report),
        Format::Text => {
            if shown.is_empty() {
                let _ = writeln!(out, "no answers");
            }
            for (a, r) in shown.iter().zip(&report.answers) {
                let _ = writeln!(out, "{}", answer_line(&r.constraint, &r.value));
                if trace {
                    let _ = write!(out, "{}", indent(&a.proof.to_text(), 2));
                }
            }
            if result.truncated() {
                let _ = writeln!(out, "% depth limit {} reached; deeper answers may exist", result.stats.depth_limit);
            }
            if let Some(t) = &report.tree {
                let _ = write!(out, "min/max tree:\n{}", indent(&t.to_text(), 2));
            }
        }
    }
    Ok(if shown.is_empty() { EXIT_NO_ANSWER } else { EXIT_OK })
}

fn oracle(args: &OracleArgs, out: &mut dyn Write) -> CmdResult {
    let prog = load_program(&args.program, args.mode)?;
    let (model, trace) = minimal_model(&prog).map_err(|e| Failure::one(format!("error: {e}")))?;
    let report = OracleReport {
        stabilized_at: trace.stabilized_at,
        model: model
            .iter()
            .map(|(a, v)| ModelEntry {
                atom: a.to_string(),
                value: v.clone(),
            })
            .collect(),
    };
    match args.format {
        Format::Json => emit_json(out, &report),
        Format::Text => {
            let _ = write!(out, "{}", model.export());
        }
    }
    Ok(EXIT_OK)
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let prog = load_program(&args.program, args.mode)?;
    let opts = SearchOptions {
        epsilon: epsilon(&args.epsilon)?,
        mode: args.mode,
        ..SearchOptions::default()
    };
    let report = check_program(&prog, &opts).map_err(|e| Failure::one(format!("error: {e}")))?;
    let summary = CheckSummary {
        depth_bound: report.depth_bound,
        failures: report.failures().count(),
        goals: report
            .goals
            .iter()
            .map(|g| CheckEntry {
                goal: g.atom.to_string(),
                passed: g.passed(),
                oracle: g.oracle.clone(),
                alphabeta: g.alphabeta.clone(),
                exhaustive: g.exhaustive.clone(),
                alphabeta_nodes: g.alphabeta_nodes,
                exhaustive_nodes: g.exhaustive_nodes,
            })
            .collect(),
    };
    match args.format {
        Format::Json => emit_json(out, &summary),
        Format::Text => {
            for g in &summary.goals {
                let _ = writeln!(
                    out,
                    "{} {}: oracle {} alphabeta {} exhaustive {} nodes {}/{}",
                    if g.passed { "pass" } else { "FAIL" },
                    g.goal,
                    g.oracle,
                    g.alphabeta,
                    g.exhaustive,
                    g.alphabeta_nodes,
                    g.exhaustive_nodes
                );
            }
            let _ = writeln!(
                out,
                "{} goals, {} failures, depth bound {}",
                summary.goals.len(),
                summary.failures,
                summary.depth_bound
            );
        }
    }
    Ok(if summary.failures == 0 { EXIT_OK } else { EXIT_NO_ANSWER })
}

fn parse(args: &ParseArgs, out: &mut dyn Write) -> CmdResult {
    let text = read(&args.grammar)?;
    let grammar = Grammar::parse(&text)
        .map_err(|d| diagnostics_failure(&args.grammar, &d))?
        .with_mode(args.search.mode);
    let opts = options(&args.search)?;
    let tokens = tokenize_sentence(&args.sentence);
    if tokens.is_empty() {
        return Err(Failure::one("error: --sentence has no tokens"));
    }
    let mut analyses = parse_sentence(&grammar, &tokens, &opts);
    if args.best && !args.all {
        analyses.truncate(1);
    }
    let report = ParseReport {
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
        analyses: analyses
            .iter()
            .map(|a| AnalysisReport {
                value: a.value.clone(),
                decimal: a.value.to_decimal(6),
                tree: a.tree.to_string(),
                proof: args.search.trace.then(|| a.proof.clone()),
            })
            .collect(),
    };
    match args.search.format {
        Format::Json => emit_json(out, &report),
        Format::Text => {
            if analyses.is_empty() {
                let _ = writeln!(out, "no parse");
            }
            for a in &report.analyses {
                let _ = writeln!(out, "{} ({}) {}", a.value, a.decimal, a.tree);
                if let Some(p) = &a.proof {
                    let _ = write!(out, "{}", indent(&p.to_text(), 2));
                }
            }
        }
    }
    Ok(if analyses.is_empty() { EXIT_NO_ANSWER } else { EXIT_OK })
}

fn validate_file(args: &ValidateArgs, out: &mut dyn Write) -> CmdResult {
    let text = read(&args.file)?;
    let is_grammar = args.file.extension().is_some_and(|e| e == "wclg");
    let diags = if is_grammar {
        match Grammar::parse(&text) {
            Ok(g) => validate(g.program()),
            Err(d) => d,
        }
    } else {
        match parse_program(&text) {
            Ok(p) => validate(&p),
            Err(d) => d,
        }
    };
    let name = args.file.display().to_string();
    for d in &diags {
        let _ = writeln!(out, "{}", d.render(&name));
    }
    if has_errors(&diags) {
        return Ok(EXIT_USAGE);
    }
    if diags.is_empty() {
        let _ = writeln!(out, "{name}: ok");
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_file(name: &str, text: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("qclp-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["qclp"];
        argv.extend_from_slice(args);
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    const EX1: &str = "p(X) <- 0.7 : X = phi.\np(X) <- 0.5 : X = phi.\np(X) <- 0.9 : X = psi.\n";

    #[test]
    fn best_example() {
        let f = temp_file("ex1.qclp", EX1);
        let (code, out, _) = call(&["best", f.to_str().unwrap(), "-q", "p(X) & X = phi"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("X = phi @ 7/10 (0.700000)\n"), "{out}");
    }

    #[test]
    fn oracle_example() {
        let f = temp_file("ex1o.qclp", EX1);
        let (code, out, _) = call(&["oracle", f.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(out, "p(phi) = 7/10\np(psi) = 9/10\n");
    }

    #[test]
    fn unsatisfiable_query_exits_one() {
        let f = temp_file("ex1u.qclp", EX1);
        let (code, out, _) = call(&["solve", f.to_str().unwrap(), "-q", "p(X) & X = psi & X = phi"]);
        assert_eq!(code, 1);
        assert_eq!(out, "no answers\n");
    }

    #[test]
    fn usage_errors_exit_two() {
        let f = temp_file("ex1e.qclp", EX1);
        assert_eq!(call(&["solve", f.to_str().unwrap()]).0, 2);
        assert_eq!(call(&["solve", f.to_str().unwrap(), "-q", "p(X,Y)"]).0, 2);
        assert_eq!(call(&["solve", f.to_str().unwrap(), "-q", "p(X", "--epsilon", "1"]).0, 2);
        assert_eq!(call(&["solve", "/nonexistent/x.qclp", "-q", "p(X)"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        let bad = temp_file("bad.qclp", "p(X) <- 1.5.\n");
        let (code, _, err) = call(&["validate", bad.to_str().unwrap()]);
        assert_eq!(code, 2);
        let (code2, out2, _) = call(&["oracle", bad.to_str().unwrap()]);
        assert_eq!((code2, out2.as_str()), (2, ""));
        assert!(err.is_empty());
    }

    #[test]
    fn json_matches_text_and_round_trips() {
        let f = temp_file("ex1j.qclp", EX1);
        let path = f.to_str().unwrap();
        let (_, text, _) = call(&["solve", path, "-q", "p(X) & X = phi"]);
        let (_, json, _) = call(&["solve", path, "-q", "p(X) & X = phi", "--format", "json", "--trace"]);
        let report: SolveReport = serde_json::from_str(&json).unwrap();
        let lines: Vec<String> = report.answers.iter().map(|a| answer_line(&a.constraint, &a.value)).collect();
        assert_eq!(text.lines().collect::<Vec<_>>(), lines);
        assert_eq!(report.answers[0].proof.as_ref().unwrap().value, report.answers[0].value);
        let again = serde_json::to_string_pretty(&report).unwrap();
        assert_eq!(serde_json::from_str::<SolveReport>(&again).unwrap(), report);
    }

    #[test]
    fn parse_command() {
        let g = temp_file("g.wclg", "s -> a b @ 0.8 .\na -> \"x\" .\nb -> \"y\" .\n");
        let (code, out, _) = call(&["parse", g.to_str().unwrap(), "--sentence", "x y"]);
        assert_eq!(code, 0);
        assert_eq!(out, "4/5 (0.800000) [s@4/5 [a@1/1 x] [b@1/1 y]]\n");
        let (code, out, _) = call(&["parse", g.to_str().unwrap(), "--sentence", "y x"]);
        assert_eq!((code, out.as_str()), (1, "no parse\n"));
        let (code, out, _) = call(&["validate", g.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.ends_with(": ok\n"));
    }

    #[test]
    fn check_command() {
        let f = temp_file("ex1c.qclp", EX1);
        let (code, out, _) = call(&["check", f.to_str().unwrap()]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("pass p(phi): oracle 7/10 alphabeta 7/10 exhaustive 7/10"));
        assert!(out.ends_with("2 goals, 0 failures, depth bound 2\n"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("oracle"));
    }
}
