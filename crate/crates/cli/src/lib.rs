//! Command implementations for the `stella` binary: `check`, `run` and the
//! corpus harness `test`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use stella_core::interp::{with_large_stack, Interpreter};
use stella_core::reconstruct::annotate;
use stella_core::typer::check_main_input;
use stella_core::{parse_expr, parse_program, typecheck_program, ErrorTag, Options, Program, Span};
use walkdir::WalkDir;

pub const DEFAULT_FUEL: u64 = 10_000_000;

/// Tag reported for syntax errors, which have no typer tag.
pub const PARSE_ERROR_TAG: &str = "PARSE_ERROR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flags {
    pub no_gate: bool,
    pub json: bool,
    pub fuel: u64,
    pub trace: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { no_gate: false, json: false, fuel: DEFAULT_FUEL, trace: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    TypeError,
    ParseError,
    Io,
    /// The program ran but did not produce a value.
    Runtime,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::TypeError => 1,
            Status::ParseError => 2,
            Status::Io => 3,
            Status::Runtime => 4,
        }
    }
}

/// Result of checking (and possibly running) one program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub status: Status,
    pub tag: Option<String>,
    pub message: String,
    pub span: Option<Span>,
    pub path: PathBuf,
}

#[derive(Serialize)]
struct JsonDiagnostic<'a> {
    tag: &'a str,
    message: &'a str,
    line: usize,
    column: usize,
    file: String,
}

impl Report {
    fn io(path: &Path, message: String) -> Report {
        Report { status: Status::Io, tag: None, message, span: None, path: path.to_path_buf() }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// `<TAG>: <message> at <file>:<line>:<col>`.
    pub fn diagnostic_line(&self) -> String {
        let location = match self.span {
            Some(span) => format!("{}:{}:{}", self.path.display(), span.line(), span.col()),
            None => self.path.display().to_string(),
        };
        match &self.tag {
            Some(tag) => format!("{tag}: {} at {location}", self.message),
            None => format!("error: {} at {location}", self.message),
        }
    }

    pub fn to_json(&self) -> String {
        let d = JsonDiagnostic {
            tag: self.tag.as_deref().unwrap_or("IO_ERROR"),
            message: &self.message,
            line: self.span.map_or(0, |s| s.line()),
            column: self.span.map_or(0, |s| s.col()),
            file: self.path.display().to_string(),
        };
        serde_json::to_string(&d).expect("diagnostics serialize")
    }
}

/// A program that parsed and typechecked.
pub struct Checked {
    pub program: Program,
    pub trace: Vec<String>,
}

/// Parses and typechecks `source`; on success returns the program with any
/// `auto` holes filled in.
pub fn check_source(source: &str, path: &Path, flags: &Flags) -> Result<Checked, Report> {
    let program = parse_program(source).map_err(|e| Report {
        status: Status::ParseError,
        tag: Some(PARSE_ERROR_TAG.to_string()),
        message: e.to_string(),
        span: Some(e.span),
        path: path.to_path_buf(),
    })?;
    let opts = Options { permissive: flags.no_gate, trace: flags.trace };
    match typecheck_program(&program, &opts) {
        Ok(checked) => {
            let program = match &checked.solution {
                Some(s) => annotate(&program, s),
                None => program,
            };
            Ok(Checked { program, trace: checked.trace })
        }
        Err(d) => Err(Report {
            status: Status::TypeError,
            tag: Some(d.tag.to_string()),
            message: d.message.clone(),
            span: Some(d.span),
            path: path.to_path_buf(),
        }),
    }
}

pub fn check_file(path: &Path, flags: &Flags) -> Result<Checked, Report> {
    let source = fs::read_to_string(path).map_err(|e| Report::io(path, format!("cannot read file: {e}")))?;
    check_source(&source, path, flags)
}

fn emit_failure(report: &Report, flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) {
    if flags.json {
        let _ = writeln!(out, "{}", report.to_json());
    } else {
        let _ = writeln!(err, "{}", report.diagnostic_line());
    }
}

fn emit_trace(trace: &[String], err: &mut dyn Write) {
    for line in trace {
        let _ = writeln!(err, "{line}");
    }
}

/// `stella check FILE`.
pub fn cmd_check(path: &Path, flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match check_file(path, flags) {
        Ok(checked) => {
            emit_trace(&checked.trace, err);
            let _ = writeln!(out, "OK");
            0
        }
        Err(report) => {
            emit_failure(&report, flags, out, err);
            report.exit_code()
        }
    }
}

/// What `stella run` printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub output: String,
    pub status: Status,
}

/// Evaluates a checked program's `main` on the input expression `input`.
pub fn run_program(program: &Program, input: &str, path: &Path, fuel: u64) -> Result<RunResult, Report> {
    let input_expr = parse_expr(input).map_err(|e| Report {
        status: Status::ParseError,
        tag: Some(PARSE_ERROR_TAG.to_string()),
        message: format!("in --input: {e}"),
        span: Some(e.span),
        path: path.to_path_buf(),
    })?;
    check_main_input(program, &input_expr).map_err(|d| Report {
        status: Status::TypeError,
        tag: Some(d.tag.to_string()),
        message: format!("in --input: {}", d.message),
        span: Some(d.span),
        path: path.to_path_buf(),
    })?;
    Ok(with_large_stack(|| {
        let mut interp = Interpreter::new(program).with_fuel(fuel);
        let outcome = interp.eval_expr(&input_expr).and_then(|arg| match arg {
            stella_core::Outcome::Normal(v) => interp.call_main(v),
            other => Ok(other),
        });
        match outcome {
            Ok(o) => {
                let status =
                    if matches!(o, stella_core::Outcome::Normal(_)) { Status::Ok } else { Status::Runtime };
                RunResult { output: o.to_string(), status }
            }
            Err(_) => RunResult { output: "fuel exhausted".to_string(), status: Status::Runtime },
        }
    }))
}

/// `stella run FILE --input VALUE`.
pub fn cmd_run(path: &Path, input: &str, flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = check_file(path, flags).and_then(|checked| {
        emit_trace(&checked.trace, err);
        run_program(&checked.program, input, path, flags.fuel)
    });
    match result {
        Ok(run) => {
            let _ = writeln!(out, "{}", run.output);
            run.status.exit_code()
        }
        Err(report) => {
            emit_failure(&report, flags, out, err);
            report.exit_code()
        }
    }
}

/// What a corpus case expects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    WellTyped,
    /// Expected tag plus alternatives that are also accepted.
    IllTyped { tag: ErrorTag, alternatives: Vec<ErrorTag> },
    /// `(input, expected output)` pairs.
    Run(Vec<(String, String)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusCase {
    pub path: PathBuf,
    pub expectation: Expectation,
}

#[derive(Debug)]
pub struct CorpusError(pub String);

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CorpusError {}

fn stella_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CorpusError(format!("cannot walk {}: {e}", dir.display())))?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "stella") {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

/// Reads `// alt-tags: A, B` from the leading comment lines.
fn alternative_tags(path: &Path) -> Result<Vec<ErrorTag>, CorpusError> {
    let source = fs::read_to_string(path).map_err(|e| CorpusError(format!("cannot read {}: {e}", path.display())))?;
    let mut tags = Vec::new();
    for line in source.lines().take_while(|l| l.trim_start().starts_with("//") || l.trim().is_empty()) {
        if let Some(rest) = line.trim_start().trim_start_matches("//").trim().strip_prefix("alt-tags:") {
            for name in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let tag = ErrorTag::from_str(name)
                    .map_err(|_| CorpusError(format!("{}: unknown alternative tag {name}", path.display())))?;
                tags.push(tag);
            }
        }
    }
    Ok(tags)
}

fn parse_expect(path: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError(format!("missing or unreadable {}: {e}", path.display())))?;
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with("//")).collect();
    if lines.is_empty() || lines.len() % 2 != 0 {
        return Err(CorpusError(format!("{}: expected `input`/`output` line pairs", path.display())));
    }
    lines
        .chunks(2)
        .map(|pair| match (pair[0].strip_prefix("input "), pair[1].strip_prefix("output ")) {
            (Some(i), Some(o)) => Ok((i.trim().to_string(), o.trim().to_string())),
            _ => Err(CorpusError(format!("{}: expected `input`/`output` line pairs", path.display()))),
        })
        .collect()
}

/// Collects the cases of a corpus directory, ordered by path.
pub fn discover(dir: &Path) -> Result<Vec<CorpusCase>, CorpusError> {
    if !dir.is_dir() {
        return Err(CorpusError(format!("{} is not a directory", dir.display())));
    }
    let well = dir.join("well-typed");
    let ill = dir.join("ill-typed");
    let run = dir.join("run");
    if !well.is_dir() && !ill.is_dir() && !run.is_dir() {
        return Err(CorpusError(format!(
            "{} has none of the subdirectories well-typed/, ill-typed/, run/",
            dir.display()
        )));
    }
    let mut cases = Vec::new();
    if well.is_dir() {
        for path in stella_files(&well)? {
            cases.push(CorpusCase { path, expectation: Expectation::WellTyped });
        }
    }
    if ill.is_dir() {
        for entry in fs::read_dir(&ill).map_err(|e| CorpusError(format!("cannot read {}: {e}", ill.display())))? {
            let entry = entry.map_err(|e| CorpusError(e.to_string()))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if !entry.path().is_dir() {
                return Err(CorpusError(format!("{}: ill-typed cases must live in a <TAG>/ directory", entry.path().display())));
            }
            let tag = ErrorTag::from_str(&name)
                .map_err(|_| CorpusError(format!("{}: `{name}` is not an error tag", entry.path().display())))?;
            for path in stella_files(&entry.path())? {
                let alternatives = alternative_tags(&path)?;
                cases.push(CorpusCase { path, expectation: Expectation::IllTyped { tag, alternatives } });
            }
        }
    }
    if run.is_dir() {
        for path in stella_files(&run)? {
            let pairs = parse_expect(&path.with_extension("expect"))?;
            cases.push(CorpusCase { path, expectation: Expectation::Run(pairs) });
        }
    }
    cases.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(cases)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResult {
    pub path: PathBuf,
    pub passed: bool,
    /// Explanation for failures.
    pub detail: String,
}

fn got_tag(result: &Result<Checked, Report>) -> String {
    match result {
        Ok(_) => "OK".to_string(),
        Err(r) => r.tag.clone().unwrap_or_else(|| format!("error ({})", r.message)),
    }
}

pub fn run_case(case: &CorpusCase, flags: &Flags) -> CaseResult {
    let checked = check_file(&case.path, flags);
    let (passed, detail) = match &case.expectation {
        Expectation::WellTyped => match &checked {
            Ok(_) => (true, String::new()),
            Err(r) => (false, format!("expected OK, got {}", r.diagnostic_line())),
        },
        Expectation::IllTyped { tag, alternatives } => {
            let got = got_tag(&checked);
            let ok = got == tag.as_str() || alternatives.iter().any(|a| a.as_str() == got);
            (ok, if ok { String::new() } else { format!("expected {tag}, got {got}") })
        }
        Expectation::Run(pairs) => match &checked {
            Err(r) => (false, format!("expected a runnable program, got {}", r.diagnostic_line())),
            Ok(c) => {
                let mut failures = Vec::new();
                for (input, expected) in pairs {
                    let got = match run_program(&c.program, input, &case.path, flags.fuel) {
                        Ok(run) => run.output,
                        Err(r) => r.diagnostic_line(),
                    };
                    if &got != expected {
                        failures.push(format!("input {input}: expected {expected}, got {got}"));
                    }
                }
                (failures.is_empty(), failures.join("; "))
            }
        },
    };
    CaseResult { path: case.path.clone(), passed, detail }
}

/// Totals of a corpus run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn total(&self) -> usize {
        self.passed + self.failed
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "passed {} / failed {} / total {}", self.passed, self.failed, self.total())
    }
}

/// Runs every case in parallel; results come back in path order.
pub fn run_corpus(cases: &[CorpusCase], flags: &Flags) -> (Vec<CaseResult>, Summary) {
    let results: Vec<CaseResult> = cases.par_iter().map(|c| run_case(c, flags)).collect();
    let passed = results.iter().filter(|r| r.passed).count();
    (results.clone(), Summary { passed, failed: results.len() - passed })
}

/// `stella test DIR`.
pub fn cmd_test(dir: &Path, flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cases = match discover(dir) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: malformed corpus: {e}");
            return Status::Io.exit_code();
        }
    };
    let (results, summary) = run_corpus(&cases, flags);
    for r in &results {
        let shown = r.path.strip_prefix(dir).unwrap_or(&r.path).display();
        if r.passed {
            let _ = writeln!(out, "PASS {shown}");
        } else {
            let _ = writeln!(out, "FAIL {shown}: {}", r.detail);
        }
    }
    let _ = writeln!(out, "{summary}");
    if summary.failed == 0 {
        0
    } else {
        1
    }
}
