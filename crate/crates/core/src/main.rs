use std::error::Error;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use eoflow::bt::Extensions;
use eoflow::engine::Engine;
use eoflow::expr::Value;
use eoflow::harness::{
    bt_metrics, eo_metrics, hotload_test, replay_check, run_scenario, sweep, BtRun, EngineChoice,
    Scenario, DELIVERY, OPERATOR, ROBOT,
};

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "eoflow",
    version,
    about = "Executable-ontology engine and behavior tree harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and load BSL files into a fresh engine, in order.
    Load {
        files: Vec<PathBuf>,
        /// Bundled corpus blocks to load first (delivery, recharging, docking).
        #[arg(long, value_delimiter = ',')]
        corpus: Vec<String>,
        /// Write the resulting event log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a scenario file or a bundled scenario by name.
    Run {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_enum)]
        engine: Option<Arm>,
        /// Write the engine arm's event log here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write the tree arm's trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Replay a log and compare the regenerated log byte for byte.
    Replay { log: PathBuf },
    /// Recompute a metrics report from a stored log or tree trace.
    Metrics {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        idle_steps: usize,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "delivery,recharging,docking"
        )]
        corpus: Vec<String>,
        /// Robot, object and target locations written at start.
        #[arg(long, value_delimiter = ',', default_value = "Loc A,Loc B,Loc C")]
        initial: Vec<String>,
    },
    /// Run a scenario on the engine arm and print its log.
    Export {
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
        #[arg(long, default_value = "baseline")]
        scenario: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all 27 initial configurations on both arms.
    Sweep {
        #[arg(long)]
        recharge: bool,
        #[arg(long)]
        dock: bool,
    },
    /// Run the staged-load check.
    Hotload,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arm {
    Eo,
    Bt,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
}

fn scenario(arg: &str) -> Res<Scenario> {
    if let Some(s) = Scenario::builtin(arg) {
        return Ok(s);
    }
    Ok(Scenario::from_file(Path::new(arg))?)
}

fn corpus_engine(blocks: &[String]) -> Res<Engine> {
    let mut engine = Engine::new();
    for b in blocks {
        let text = eoflow::corpus::block(b).ok_or_else(|| format!("unknown corpus block `{b}`"))?;
        engine.load_source(text, OPERATOR)?;
    }
    Ok(engine)
}

fn print_json(v: &impl serde::Serialize) -> Res<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Res<ExitCode> {
    match cli.command {
        Command::Load { files, corpus, log } => {
            let mut engine = corpus_engine(&corpus)?;
            for f in &files {
                let report = engine.load_source(&fs::read_to_string(f)?, OPERATOR)?;
                println!(
                    "{}: {} event(s), created {:?}",
                    f.display(),
                    report.events.len(),
                    report.created
                );
                for w in &report.warnings {
                    println!("  warning: {w}");
                }
            }
            if let Some(path) = log {
                fs::write(path, engine.export_log())?;
            }
        }
        Command::Run {
            scenario: name,
            engine,
            log,
            trace,
        } => {
            let mut s = scenario(&name)?;
            if let Some(arm) = engine {
                s.engine = match arm {
                    Arm::Eo => EngineChoice::Eo,
                    Arm::Bt => EngineChoice::Bt,
                    Arm::Both => EngineChoice::Both,
                };
            }
            let out = run_scenario(&s)?;
            if let (Some(path), Some(eo)) = (log, &out.eo) {
                fs::write(path, &eo.log)?;
            }
            if let (Some(path), Some(bt)) = (trace, &out.bt) {
                fs::write(path, serde_json::to_string_pretty(bt)?)?;
            }
            print_json(&out.reports)?;
            if out.agree == Some(false) {
                eprintln!("final states differ between arms");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Replay { log } => {
            let outcome = replay_check(&fs::read_to_string(log)?);
            print_json(&outcome)?;
            if !outcome.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Metrics { file, idle_steps } => {
            let text = fs::read_to_string(&file)?;
            let name = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match serde_json::from_str::<BtRun>(&text) {
                Ok(run) => print_json(&bt_metrics(&run))?,
                Err(_) => print_json(&eo_metrics(&name, &text, idle_steps)?)?,
            }
        }
        Command::Serve {
            port,
            corpus,
            initial,
        } => {
            let mut engine = corpus_engine(&corpus)?;
            if let [robot, object, target] = initial.as_slice() {
                for (who, prop, to) in [
                    (ROBOT, "location", robot),
                    (DELIVERY, "objectLoc", object),
                    (DELIVERY, "targetLoc", target),
                ] {
                    engine.inject(OPERATOR, who, prop, Value::reference(to.as_str()))?;
                }
            } else if !initial.is_empty() {
                return Err("--initial takes robot,object,target".into());
            }
            let addr = SocketAddr::from(([127, 0, 0, 1], port));
            eprintln!("listening on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(eoflow::server::serve(engine, addr))?;
        }
        Command::Export {
            format: Format::Jsonl,
            scenario: name,
            out,
        } => {
            let mut s = scenario(&name)?;
            s.engine = EngineChoice::Eo;
            let run = run_scenario(&s)?;
            let log = &run.eo.expect("engine arm ran").log;
            match out {
                Some(path) => fs::write(path, log)?,
                None => print!("{log}"),
            }
        }
        Command::Sweep { recharge, dock } => {
            let rows = sweep(Extensions { recharge, dock })?;
            let mut ok = true;
            for r in &rows {
                ok &= r.agree() && r.eo.delivered;
                println!(
                    "{:<6} {:<6} {:<6} eo={} bt={} {}",
                    r.initial.robot,
                    r.initial.object,
                    r.initial.target,
                    r.eo_actions,
                    r.bt_ticks,
                    if r.agree() { "agree" } else { "DIFFER" }
                );
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Hotload => {
            let report = hotload_test()?;
            for (check, ok) in &report.checks {
                println!("{} {check}", if *ok { "pass" } else { "FAIL" });
            }
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
