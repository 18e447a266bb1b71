use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::{json, Value as Json};

use effsess_core::effcalc::{infer, parse_program, parse_term, Program, TypeEnv};
use effsess_core::embedding::{compile_for_run, embed_top, embed_top_optimized};
use effsess_core::equivalence::{build_lts, default_value_domain, weak_bisimilar, LtsOptions, Verdict, DEFAULT_LTS_FUEL};
use effsess_core::semantics::{run, RunError, RunOptions, Schedule, DEFAULT_FUEL};
use effsess_core::sesscalc::{parse_process_file, session_check, ProcEnv, ProcessFile};
use effsess_core::{Endpoint, Process, SyntaxError, Value};

#[derive(Parser)]
#[command(name = "effsess", version, about = "Effect calculus to session-typed pi-calculus toolkit")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-and-effect check a program.
    Check { file: PathBuf },
    /// Translate a program into a process with its expected session environment.
    Translate {
        file: PathBuf,
        /// Run pure let-bound terms in parallel with their neighbours.
        #[arg(long)]
        optimize: bool,
    },
    /// Session-check a process file.
    PiCheck { file: PathBuf },
    /// Execute a program (against a store) or a closed process.
    Run {
        file: PathBuf,
        /// Explore every schedule instead of one.
        #[arg(long)]
        all_schedules: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Close the effect channel with `stop` when the program is done.
        #[arg(long)]
        send_stop: bool,
    },
    /// Decide weak bisimilarity of two programs or processes.
    Equiv {
        file1: PathBuf,
        file2: PathBuf,
        /// Values the environment may send, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_value)]
        values: Option<Vec<Value>>,
        #[arg(long, default_value_t = DEFAULT_LTS_FUEL)]
        fuel: usize,
    },
}

fn parse_value(s: &str) -> Result<Value, String> {
    match s.trim() {
        "unit" => Ok(Value::Unit),
        "zero" => Ok(Value::Nat(0)),
        n => n
            .parse()
            .map(Value::Nat)
            .map_err(|_| format!("`{n}` is neither a number nor `unit`")),
    }
}

/// What a command produced: its text and JSON renderings and exit code.
struct Report {
    text: String,
    json: Json,
    code: u8,
}

impl Report {
    fn ok(text: String, json: Json) -> Self {
        Report { text, json, code: 0 }
    }

    fn negative(text: String, json: Json) -> Self {
        Report { text, json, code: 1 }
    }
}

enum Input {
    Program(Program),
    Process(ProcessFile),
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn located(path: &Path, e: SyntaxError) -> anyhow::Error {
    anyhow::anyhow!("{}: {e}", path.display())
}

/// Whether the first line that is not blank or a comment opens a program header.
fn has_store_header(text: &str) -> bool {
    text.lines()
        .map(str::trim_start)
        .find(|l| !l.is_empty() && !l.starts_with("--"))
        .is_some_and(|l| l.starts_with("store"))
}

/// A program file, or a bare term run against a `nat` store starting at 0.
fn load_program(path: &Path) -> anyhow::Result<Program> {
    let text = read(path)?;
    if has_store_header(&text) {
        return parse_program(&text).map_err(|e| located(path, e));
    }
    parse_term(&text).map(|t| Program::nat(0, t)).map_err(|e| located(path, e))
}

fn load_any(path: &Path) -> anyhow::Result<Input> {
    let text = read(path)?;
    if has_store_header(&text) {
        return Ok(Input::Program(parse_program(&text).map_err(|e| located(path, e))?));
    }
    if let Ok(t) = parse_term(&text) {
        return Ok(Input::Program(Program::nat(0, t)));
    }
    Ok(Input::Process(parse_process_file(&text).map_err(|e| located(path, e))?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::Check { .. } => "check",
        Command::Translate { .. } => "translate",
        Command::PiCheck { .. } => "pi-check",
        Command::Run { .. } => "run",
        Command::Equiv { .. } => "equiv",
    };
    let (mut out, text, code) = match dispatch(cli.command) {
        Ok(r) => (r.json, r.text, r.code),
        Err(e) => (json!({ "error": format!("{e:#}") }), format!("error: {e:#}"), 2),
    };
    if cli.json {
        if let Json::Object(m) = &mut out {
            m.insert("schema".into(), json!(1));
            m.insert("command".into(), json!(name));
        }
        println!("{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
    } else if code == 2 {
        eprintln!("{text}");
    } else {
        println!("{text}");
    }
    ExitCode::from(code)
}

fn dispatch(cmd: Command) -> anyhow::Result<Report> {
    match cmd {
        Command::Check { file } => check(&file),
        Command::Translate { file, optimize } => translate(&file, optimize),
        Command::PiCheck { file } => pi_check(&file),
        Command::Run {
            file,
            all_schedules,
            seed,
            fuel,
            send_stop,
        } => {
            let schedule = if all_schedules { Schedule::All } else { Schedule::One { seed } };
            exec(&file, schedule, fuel, send_stop)
        }
        Command::Equiv {
            file1,
            file2,
            values,
            fuel,
        } => equiv(&file1, &file2, values.unwrap_or_else(default_value_domain), fuel),
    }
}

fn check(file: &Path) -> anyhow::Result<Report> {
    let prog = load_program(file)?;
    Ok(match infer(&TypeEnv::new(), prog.store_type, &prog.root) {
        Ok((ty, f)) => Report::ok(
            format!("{ty}, {f}"),
            json!({ "ok": true, "type": ty.to_string(), "effect": f.to_string() }),
        ),
        Err(e) => Report::negative(format!("type error: {e}"), json!({ "ok": false, "error": e.to_string() })),
    })
}

fn translate(file: &Path, optimize: bool) -> anyhow::Result<Report> {
    let prog = load_program(file)?;
    let (eff, r) = (Endpoint::plain("eff"), Endpoint::plain("r"));
    let res = if optimize {
        embed_top_optimized(&prog, &eff, &r)
    } else {
        embed_top(&prog, &eff, &r)
    };
    Ok(match res {
        Ok(res) => {
            let delta: serde_json::Map<String, Json> =
                res.delta.iter().map(|(e, s)| (e.to_string(), json!(s.to_string()))).collect();
            let text = res.to_file().to_string();
            Report::ok(
                text.trim_end().to_string(),
                json!({
                    "type": res.ty.to_string(),
                    "effect": res.effect.to_string(),
                    "delta": delta,
                    "process": res.process.to_string(),
                }),
            )
        }
        Err(e) => Report::negative(format!("cannot translate: {e}"), json!({ "error": e.to_string() })),
    })
}

fn pi_check(file: &Path) -> anyhow::Result<Report> {
    let pf = parse_process_file(&read(file)?).map_err(|e| located(file, e))?;
    let env = pf
        .shared
        .iter()
        .fold(ProcEnv::new(), |env, (k, s)| env.with_shared(k.clone(), s.clone()));
    Ok(match session_check(&env, &pf.delta, &pf.process) {
        Ok(()) => Report::ok("OK".into(), json!({ "ok": true })),
        Err(e) => Report::negative(format!("session error: {e}"), json!({ "ok": false, "error": e.to_string() })),
    })
}

fn exec(file: &Path, schedule: Schedule, fuel: usize, send_stop: bool) -> anyhow::Result<Report> {
    let process: Process = match load_any(file)? {
        Input::Program(prog) => match compile_for_run(&prog, send_stop) {
            Ok(p) => p,
            Err(e) => {
                return Ok(Report::negative(format!("cannot translate: {e}"), json!({ "error": e.to_string() })))
            }
        },
        Input::Process(pf) => pf.process,
    };
    let opts = RunOptions {
        schedule,
        fuel,
        ..RunOptions::default()
    };
    let render = |os: &[effsess_core::semantics::Outcome]| {
        os.iter()
            .map(|o| {
                let vals: Vec<String> = o.result_values.iter().map(|v| v.to_string()).collect();
                let store = o.store.as_ref().map_or("-".to_string(), |v| v.to_string());
                format!(
                    "result [{}] store {store} steps {}\n  residual {}",
                    vals.join(", "),
                    o.steps,
                    o.residual
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    Ok(match run(&process, &opts) {
        Ok(os) => Report::ok(render(&os), json!({ "outcomes": os })),
        Err(RunError::FuelExhausted { fuel, partial }) => Report::negative(
            format!("fuel exhausted after {fuel} steps\n{}", render(&partial)),
            json!({ "error": "fuel exhausted", "fuel": fuel, "partial": partial }),
        ),
        Err(e) => Report::negative(format!("run failed: {e}"), json!({ "error": e.to_string() })),
    })
}

/// A program becomes its top-level translation, observed on `r` and
/// `eff`; a process is observed on all of its free channels.
fn as_observed(input: Input) -> anyhow::Result<(Process, Vec<String>)> {
    match input {
        Input::Program(prog) => {
            let res = embed_top(&prog, &Endpoint::plain("eff"), &Endpoint::plain("r"))?;
            Ok((res.process, vec!["r".into(), "eff".into()]))
        }
        Input::Process(pf) => {
            let names = pf.process.free_channel_names().into_iter().collect();
            Ok((pf.process, names))
        }
    }
}

fn equiv(a: &Path, b: &Path, values: Vec<Value>, fuel: usize) -> anyhow::Result<Report> {
    let (pa, mut obs) = as_observed(load_any(a)?)?;
    let (pb, obs_b) = as_observed(load_any(b)?)?;
    obs.extend(obs_b);
    let opts = LtsOptions {
        value_domain: values,
        fuel,
        ..LtsOptions::observing(obs)
    };
    let la = build_lts(&pa, &opts)?;
    let lb = build_lts(&pb, &opts)?;
    let states = json!([la.len(), lb.len()]);
    Ok(match weak_bisimilar(&la, &lb)? {
        Verdict::Bisimilar => Report::ok("BISIMILAR".into(), json!({ "bisimilar": true, "states": states })),
        Verdict::NotBisimilar(d) => Report::negative(
            format!("NOT BISIMILAR\ntrace: {d}"),
            json!({
                "bisimilar": false,
                "states": states,
                "trace": d.trace.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "last_by": d.last_by.to_string(),
            }),
        ),
    })
}
