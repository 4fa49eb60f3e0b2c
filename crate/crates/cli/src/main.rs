use std::fs::OpenOptions;
use std::io::{BufRead, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use voicepilot_core::clock::{Clock, SystemClock, VirtualClock};
use voicepilot_core::config::Config;
use voicepilot_core::dsl::{parse, validate, PauseConfig, Rejection, SafetyReport, VariableSpec};
use voicepilot_core::orchestrator::{
    parse_script, run_script, spawn_live, BackendChoice, CueSink, FeedbackCue, Input,
    OutboundBody, Session, SessionEvent,
};
use voicepilot_core::service::WireServer;
use voicepilot_core::wire::ServerMessage;

const DEFAULT_CONFIG: &str = "config/voicepilot.toml";

#[derive(Debug, Parser)]
#[command(name = "voicepilot", version, about = "Voice and text command runtime for a feeding robot")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a live session. Lines typed on stdin are sent as commands.
    Run {
        #[arg(long, default_value = DEFAULT_CONFIG)]
        config: PathBuf,
        /// Use the mock speech and language backends.
        #[arg(long)]
        mock: bool,
        /// Serve the wire protocol on this port.
        #[arg(long)]
        port: Option<u16>,
        /// Simulate robot time instead of waiting in real time.
        #[arg(long)]
        virtual_clock: bool,
        /// Append every outbound message to this file as JSON lines.
        #[arg(long)]
        event_log: Option<PathBuf>,
    },
    /// Parse and validate a robot program and print its safety report.
    Validate {
        /// Program file, or `-` for stdin.
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Play a scripted session on a virtual clock and print the wire messages.
    Replay {
        transcript: PathBuf,
        #[arg(long, default_value = DEFAULT_CONFIG)]
        config: PathBuf,
        /// Use the mock backends even if the config selects remote ones.
        #[arg(long)]
        mock: bool,
        /// Give up on a program that is still running after this many ticks.
        #[arg(long, default_value_t = 100_000)]
        max_ticks: usize,
    },
}

#[derive(Debug)]
struct PrintSink;

impl CueSink for PrintSink {
    fn play(&mut self, cue: &FeedbackCue) {
        eprintln!("[obi] {}", cue.text);
    }
}

fn choice(mock: bool) -> BackendChoice {
    if mock {
        BackendChoice::ForceMock
    } else {
        BackendChoice::FromConfig
    }
}

fn load_config(path: &Path) -> Result<Config> {
    Config::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(
    config: &Path,
    mock: bool,
    port: Option<u16>,
    virtual_clock: bool,
    event_log: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let clock: Arc<dyn Clock> = if virtual_clock {
        Arc::new(VirtualClock::new(0))
    } else {
        Arc::new(SystemClock::new())
    };
    let mut session = Session::from_config(&cfg, choice(mock), clock)?;
    session.set_sink(Box::new(PrintSink));
    let log = event_log
        .map(|p| {
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(&p)
                .with_context(|| format!("opening {}", p.display()))
        })
        .transpose()?;
    let live = spawn_live(session, log);

    let updates = live.subscribe();
    std::thread::spawn(move || {
        for o in updates {
            match &o.body {
                OutboundBody::Event(SessionEvent::Error { stage, message }) => {
                    eprintln!("[{stage}] {message}");
                }
                OutboundBody::Event(SessionEvent::Transcript { text, .. }) => {
                    eprintln!("heard: {text}");
                }
                OutboundBody::Report(r) => {
                    if let Some(code) = &r.code {
                        println!("{code}");
                    }
                    if !r.report.is_clean() {
                        eprintln!("{}", serde_json::to_string(&r.report).unwrap_or_default());
                    }
                }
                _ => {}
            }
        }
    });

    let server = match port {
        Some(p) => {
            let server = WireServer::bind(("127.0.0.1", p), live.clone())?;
            eprintln!("listening on ws://{}", server.local_addr());
            Some(server.spawn())
        }
        None => None,
    };

    eprintln!("type a command (e.g. \"feed me a bite of granola\"), stop, pause or continue");
    for line in std::io::stdin().lock().lines() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if !live.send(Input::Command(text.to_string())) {
            bail!("session ended");
        }
    }
    match server {
        Some(s) => {
            let _ = s.join();
        }
        None => live.shutdown(),
    }
    Ok(())
}

fn validate_file(file: &Path, config: Option<&Path>) -> Result<bool> {
    let code = if file == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?
    };
    let (spec, pause) = match config {
        Some(p) => {
            let cfg = load_config(p)?;
            (cfg.variables, cfg.pause)
        }
        None if Path::new(DEFAULT_CONFIG).exists() => {
            let cfg = load_config(Path::new(DEFAULT_CONFIG))?;
            (cfg.variables, cfg.pause)
        }
        None => (VariableSpec::default(), PauseConfig::default()),
    };
    let checked = parse(&code)
        .map_err(|e| Rejection::from(&e))
        .and_then(|p| validate(&p, &spec, &pause).map_err(|e| Rejection::from(&e)));
    let (report, program) = match checked {
        Ok((program, report)) => (report, Some(program)),
        Err(r) => (SafetyReport::rejected(r), None),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(p) = program {
        println!("{}", p.pretty());
    }
    Ok(!report.is_rejected())
}

fn replay(transcript: &Path, config: &Path, mock: bool, max_ticks: usize) -> Result<()> {
    let cfg = load_config(config)?;
    let src = std::fs::read_to_string(transcript)
        .with_context(|| format!("reading {}", transcript.display()))?;
    let steps = parse_script(&src)?;
    let clock = VirtualClock::new(0);
    let mut session = Session::from_config(&cfg, choice(mock), Arc::new(clock.clone()))?;
    for o in run_script(&mut session, &clock, &steps, max_ticks) {
        println!("{}", ServerMessage::from(&o).to_json());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            mock,
            port,
            virtual_clock,
            event_log,
        } => run(&config, mock, port, virtual_clock, event_log).map(|_| true),
        Command::Validate { file, config } => validate_file(&file, config.as_deref()),
        Command::Replay {
            transcript,
            config,
            mock,
            max_ticks,
        } => replay(&transcript, &config, mock, max_ticks).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
