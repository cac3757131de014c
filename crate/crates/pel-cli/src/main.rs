//! The `pel` binary: run programs, host the restartable REPL, export the
//! generation grammar, and drive agent org charts.
//!
//! Exit codes: 0 success, 1 a Pel error the session did not resolve,
//! 2 usage or configuration errors.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pel_core::agents;
use pel_core::grammar::{self, CapabilityConfig};
use pel_core::llm::HttpChat;
use pel_core::parser::parse_source;
use pel_core::repel::{render_error, Session};
use pel_core::scheduler::{self, TraceKind, TraceLog};
use pel_core::{Interp, LlmBackend, PelValue, ScriptedMock};

#[derive(Parser)]
#[command(name = "pel", version, about = "Pipe-oriented scripting with restartable errors and LLM-backed agents")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a .pel program file.
    Run(RunArgs),
    /// Read-eval-print loop with the five-option restart menu.
    Repl(ReplArgs),
    /// Inspect the constrained-generation grammar.
    Grammar {
        #[command(subcommand)]
        cmd: GrammarCmd,
    },
    /// Work with agent org charts.
    Agents {
        #[command(subcommand)]
        cmd: AgentsCmd,
    },
}

#[derive(Args)]
struct BackendArgs {
    /// Which backend answers model requests.
    #[arg(long, value_enum, default_value_t = LlmChoice::Mock)]
    llm: LlmChoice,
    /// Rule file for the scripted mock backend.
    #[arg(long, value_name = "FILE")]
    mock_script: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LlmChoice {
    /// Deterministic rule-driven mock; without --mock-script every request errors.
    Mock,
    /// Chat-completions endpoint configured by PEL_LLM_URL / PEL_LLM_MODEL / PEL_LLM_KEY.
    Http,
}

#[derive(Args)]
struct RunArgs {
    /// Program file (.pel, UTF-8).
    file: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
    /// Menu answers, one line each, so errors never block on a prompt.
    #[arg(long, value_name = "FILE")]
    answers: Option<PathBuf>,
    /// Ask the backend for a fix before falling back to the restart menu.
    #[arg(long)]
    auto_heal: bool,
    /// Schedule independent top-level forms concurrently.
    #[arg(long = "async")]
    async_mode: bool,
    /// Worker cap for concurrent evaluation (defaults to the CPU count).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Capability config (TOML) the program must validate against before it runs.
    #[arg(long, value_name = "FILE")]
    caps: Option<PathBuf>,
    /// Log scheduler start/finish events to standard error.
    #[arg(long)]
    trace_schedule: bool,
}

#[derive(Args)]
struct ReplArgs {
    #[command(flatten)]
    backend: BackendArgs,
    /// Menu answers, one line each, so errors never block on a prompt.
    #[arg(long, value_name = "FILE")]
    answers: Option<PathBuf>,
    /// Ask the backend for a fix before falling back to the restart menu.
    #[arg(long)]
    auto_heal: bool,
}

#[derive(Subcommand)]
enum GrammarCmd {
    /// Print the grammar under a capability config.
    Export {
        #[arg(long, value_enum, default_value_t = ExportFormat::Ebnf)]
        format: ExportFormat,
        /// Capability config (TOML); defaults to everything enabled.
        #[arg(long, value_name = "FILE")]
        caps: Option<PathBuf>,
        /// Nesting depth for the regex rendering.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Ebnf,
    Regex,
}

#[derive(Subcommand)]
enum AgentsCmd {
    /// Load an org chart and hand the root router a task.
    Run {
        /// Org chart file (JSON array of agent specs).
        org: PathBuf,
        /// The query the root router decomposes.
        #[arg(long)]
        task: String,
        #[command(flatten)]
        backend: BackendArgs,
        /// Schedule independent forms of router programs concurrently.
        #[arg(long = "async")]
        async_mode: bool,
        /// Worker cap for concurrent evaluation (defaults to the CPU count).
        #[arg(long, value_name = "N")]
        jobs: Option<usize>,
        /// Log scheduler start/finish events to standard error.
        #[arg(long)]
        trace_schedule: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Repl(args) => cmd_repl(args),
        Cmd::Grammar { cmd } => cmd_grammar(cmd),
        Cmd::Agents { cmd } => cmd_agents(cmd),
    };
    std::process::exit(code);
}

fn fail_usage(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    2
}

/// Print to stdout, treating a closed pipe as a normal end of output.
fn emit(s: &str) {
    use std::io::Write;
    if std::io::stdout().write_all(s.as_bytes()).is_err() {
        std::process::exit(0);
    }
}

fn make_backend(args: &BackendArgs) -> Result<Arc<dyn LlmBackend>, i32> {
    match args.llm {
        LlmChoice::Mock => match &args.mock_script {
            Some(path) => match ScriptedMock::load(path) {
                Ok(m) => Ok(m.shared()),
                Err(e) => Err(fail_usage(&format!("bad mock script {}: {}", path.display(), e.message))),
            },
            None => Ok(ScriptedMock::empty().shared()),
        },
        LlmChoice::Http => Ok(Arc::new(HttpChat::from_env())),
    }
}

/// One answer per line; blank lines are answers too (they end an input block).
fn load_answers(path: &Option<PathBuf>) -> Result<Option<Vec<String>>, i32> {
    match path {
        None => Ok(None),
        Some(p) => match fs::read_to_string(p) {
            Ok(text) => Ok(Some(text.lines().map(str::to_string).collect())),
            Err(e) => Err(fail_usage(&format!("cannot read {}: {e}", p.display()))),
        },
    }
}

fn load_caps(path: Option<&Path>) -> Result<CapabilityConfig, i32> {
    match path {
        None => Ok(CapabilityConfig::default()),
        Some(p) => CapabilityConfig::load(p)
            .map_err(|e| fail_usage(&format!("bad caps file {}: {}", p.display(), e.message))),
    }
}

fn dump_trace(trace: &TraceLog) {
    for e in trace.lock().unwrap().iter() {
        let what = match e.what {
            TraceKind::Start => "start",
            TraceKind::Finish => "finish",
        };
        eprintln!("{:>10}us  form {} {}", e.at_micros, e.form, what);
    }
}

fn cmd_run(args: RunArgs) -> i32 {
    let src = match fs::read_to_string(&args.file) {
        Ok(s) => s,
        Err(e) => return fail_usage(&format!("cannot read {}: {e}", args.file.display())),
    };
    let backend = match make_backend(&args.backend) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let mut interp = Interp::new(backend);
    if let Some(j) = args.jobs {
        interp.jobs = j.max(1);
    }
    interp.async_mode = args.async_mode;
    let trace = args.trace_schedule.then(scheduler::new_trace);
    interp.trace = trace.clone();

    if let Some(caps_path) = &args.caps {
        let caps = match load_caps(Some(caps_path)) {
            Ok(c) => c,
            Err(code) => return code,
        };
        let forms = match parse_source(&src) {
            Ok(f) => f,
            Err(e) => {
                print!("{}", render_error(&e, &src));
                return 1;
            }
        };
        let violations = grammar::validate(&forms, &caps);
        if !violations.is_empty() {
            for v in &violations {
                eprintln!("line {}, col {}-{}: {} [{}]", v.span.line, v.span.col, v.span.end_col, v.message, v.flag);
            }
            return 1;
        }
    }

    let code = if args.async_mode {
        run_async(&interp, &src)
    } else {
        let mut session = match load_answers(&args.answers) {
            Ok(Some(answers)) => Session::scripted(interp, answers),
            Ok(None) => Session::new(interp),
            Err(code) => return code,
        }
        .auto_heal(args.auto_heal)
        .print_values(false);
        let code = session.run_program(&src);
        if code == 0 && session.last != PelValue::Nil {
            println!("{}", session.last);
        }
        code
    };
    if let Some(t) = &trace {
        dump_trace(t);
    }
    code
}

/// Concurrent runs have no restart protocol: an error renders and fails.
fn run_async(interp: &Interp, src: &str) -> i32 {
    let forms = match parse_source(src) {
        Ok(f) => f,
        Err(e) => {
            print!("{}", render_error(&e, src));
            return 1;
        }
    };
    match scheduler::run_concurrent(interp, &forms, &interp.global) {
        Ok(v) => {
            if v != PelValue::Nil {
                println!("{v}");
            }
            0
        }
        Err(e) => {
            print!("{}", render_error(&e, src));
            1
        }
    }
}

fn cmd_repl(args: ReplArgs) -> i32 {
    let backend = match make_backend(&args.backend) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let interp = Interp::new(backend);
    let answers = match load_answers(&args.answers) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let mut session = match answers {
        Some(a) => Session::scripted(interp, a),
        None => Session::new(interp),
    }
    .auto_heal(args.auto_heal);

    use std::io::IsTerminal;
    if std::io::stdin().is_terminal() {
        session.run_interactive()
    } else {
        // piped input: the whole of stdin is the program, answers (if any)
        // feed the restart prompts, so nothing ever blocks
        let mut src = String::new();
        if let Err(e) = std::io::stdin().read_to_string(&mut src) {
            return fail_usage(&format!("cannot read stdin: {e}"));
        }
        session.run_program(&src)
    }
}

fn cmd_grammar(cmd: GrammarCmd) -> i32 {
    match cmd {
        GrammarCmd::Export { format, caps, depth } => {
            let caps = match load_caps(caps.as_deref()) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match format {
                ExportFormat::Ebnf => {
                    emit(&grammar::export_ebnf(&caps));
                    0
                }
                ExportFormat::Regex => match grammar::export_regex(&caps, depth) {
                    Ok(re) => {
                        emit(&format!("{re}\n"));
                        0
                    }
                    Err(e) => fail_usage(&e.message),
                },
            }
        }
    }
}

fn cmd_agents(cmd: AgentsCmd) -> i32 {
    match cmd {
        AgentsCmd::Run { org, task, backend, async_mode, jobs, trace_schedule } => {
            let text = match fs::read_to_string(&org) {
                Ok(t) => t,
                Err(e) => return fail_usage(&format!("cannot read {}: {e}", org.display())),
            };
            let registry = match agents::org_from_json(&text) {
                Ok(r) => r,
                Err(e) => return fail_usage(&e.message),
            };
            let root = match registry.root() {
                Some(spec) => spec.path.clone(),
                None => return fail_usage("org chart has no root agent"),
            };
            let backend = match make_backend(&backend) {
                Ok(b) => b,
                Err(code) => return code,
            };
            let mut interp = Interp::new(backend);
            if let Some(j) = jobs {
                interp.jobs = j.max(1);
            }
            interp.async_mode = async_mode;
            let trace = trace_schedule.then(scheduler::new_trace);
            interp.trace = trace.clone();
            agents::register_agents(&interp, registry);

            let code = match agents::run_router_task(&interp, &root, &task, &PelValue::Nil) {
                Ok(v) => {
                    if v != PelValue::Nil {
                        println!("{v}");
                    }
                    0
                }
                Err(e) => {
                    eprintln!("{e}");
                    1
                }
            };
            if let Some(t) = &trace {
                dump_trace(t);
            }
            code
        }
    }
}
