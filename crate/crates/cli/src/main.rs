//! `cosma` command-line front end.
//!
//! Exit status: 0 success, 1 some query is false, 2 parse, validation or
//! usage error, 3 internal or audit failure.

use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cosma_core::frontend::{ParseDiagnostic, ParsedSystem};
use cosma_core::mc::check_suite_with;
use cosma_core::reach::{build_rg_explicit_with, RgDump};
use cosma_core::{assets, build_rg_symbolic, generate, parse_queries, parse_system, structural_audit};
use cosma_core::{CodegenOptions, Exec, StateEncoding};

#[derive(Parser)]
#[command(name = "cosma", version, about = "Concurrent state machine analysis and VHDL generation")]
struct Cli {
    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a system, printing diagnostics.
    Lint { file: PathBuf },
    /// Build the reachability graph.
    Rg {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::Explicit)]
        engine: Engine,
        /// Write Graphviz output to this file (`-` for stdout).
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Print a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Check a query file against a system.
    Check {
        file: PathBuf,
        /// Query file.
        #[arg(long, short)]
        queries: PathBuf,
        /// Print a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Generate VHDL.
    Vhdl {
        file: PathBuf,
        /// Output file; stdout if absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// binary, onehot or width:N
        #[arg(long, default_value = "binary")]
        state_encoding: StateEncoding,
        /// Delay between cycles when no clock is used.
        #[arg(long, default_value_t = 10)]
        delay_ns: u64,
        /// Entity name; defaults to the system name.
        #[arg(long)]
        entity: Option<String>,
        /// Latch on a rising clock edge instead of a fixed delay.
        #[arg(long)]
        clock: bool,
    },
    /// Write the bundled example files.
    Examples {
        #[arg(long)]
        emit: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Explicit,
    Bdd,
    Both,
}

enum Failure {
    Usage(String),
    Diagnostics(Vec<ParseDiagnostic>),
    Internal(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn detect() -> Self {
        let color = match std::env::var("COSMA_COLOR").as_deref() {
            Ok("1") => true,
            Ok("0") => false,
            _ => std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none(),
        };
        Style { color }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_owned()
        }
    }

    fn diag(&self, d: &ParseDiagnostic) -> String {
        let (code, sev) = if d.is_error() { ("1;31", "error") } else { ("1;33", "warning") };
        format!("{}: {}: {}", d.span, self.paint(code, sev), d.message)
    }
}

fn read_source(path: &Path) -> Result<(String, String), Failure> {
    let label = path.display().to_string();
    match fs::read_to_string(path) {
        Ok(text) => Ok((text, label)),
        Err(e) => {
            // bundled assets can be named directly without emitting them first
            let bundled = path.file_name().and_then(|n| n.to_str()).and_then(assets::get);
            match (bundled, path.components().count()) {
                (Some(text), 1) => {
                    eprintln!("note: {label} not found here, using the bundled copy");
                    Ok((text.to_owned(), label))
                }
                _ => Err(Failure::Usage(format!("{label}: {e}"))),
            }
        }
    }
}

fn load(path: &Path, style: &Style) -> Result<ParsedSystem, Failure> {
    let (text, label) = read_source(path)?;
    let parsed = parse_system(&text, &label).map_err(Failure::Diagnostics)?;
    for w in &parsed.warnings {
        eprintln!("{}", style.diag(w));
    }
    Ok(parsed)
}

fn plural(n: impl Into<u128>, word: &str) -> String {
    let n = n.into();
    if n == 1 {
        format!("1 {word}")
    } else {
        let suffix = if word.ends_with('s') { "es" } else { "s" };
        format!("{n} {word}{suffix}")
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    if path == Path::new("-") {
        print!("{text}");
        Ok(())
    } else {
        fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn lint(file: &Path, style: &Style) -> Result<ExitCode, Failure> {
    let parsed = load(file, style)?;
    let sys = &parsed.system;
    let sizes: Vec<String> = sys.machines.iter().map(|m| format!("{} ({})", m.name(), m.states().len())).collect();
    println!("system {}: {}", sys.name, sizes.join(", "));
    println!("0 errors, {}", plural(parsed.warnings.len() as u128, "warning"));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RgReport {
    system: String,
    product_size: u128,
    reachable: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    explicit: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symbolic: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symbolic_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    graph: Option<RgDump>,
}

fn rg(file: &Path, engine: Engine, dot: Option<&Path>, json: bool, exec: Exec, style: &Style) -> Result<ExitCode, Failure> {
    let parsed = load(file, style)?;
    let sys = &parsed.system;
    let internal = |e: cosma_core::InvalidSystem| Failure::Internal(e.to_string());
    let mut lines = Vec::new();
    let explicit = if engine != Engine::Bdd || dot.is_some() {
        let t = Instant::now();
        let g = build_rg_explicit_with(sys, exec).map_err(internal)?;
        if engine != Engine::Bdd {
            lines.push(format!(
                "explicit: {}, {} in {:.1?}",
                plural(g.node_count() as u128, "state"),
                plural(g.edge_count() as u128, "edge"),
                t.elapsed()
            ));
        }
        Some(g)
    } else {
        None
    };
    let symbolic = if engine != Engine::Explicit {
        let t = Instant::now();
        let s = build_rg_symbolic(sys).map_err(internal)?;
        lines.push(format!(
            "symbolic: {}, {} fixpoint iterations in {:.1?}",
            plural(s.reachable_count, "state"),
            s.iterations,
            t.elapsed()
        ));
        Some(s)
    } else {
        None
    };
    let e_count = explicit.as_ref().filter(|_| engine != Engine::Bdd).map(|g| g.node_count() as u128);
    let s_count = symbolic.as_ref().map(|s| s.reachable_count);
    if let (Some(a), Some(b)) = (e_count, s_count) {
        if a != b {
            return Err(Failure::Internal(format!("engines disagree: explicit {a}, symbolic {b}")));
        }
    }
    let reachable = e_count.or(s_count).unwrap_or_default();
    if let (Some(path), Some(g)) = (dot, &explicit) {
        write_out(path, &g.to_dot())?;
    }
    if json {
        let report = RgReport {
            system: sys.name.clone(),
            product_size: sys.product_size(),
            reachable,
            explicit: e_count,
            symbolic: s_count,
            symbolic_iterations: symbolic.as_ref().map(|s| s.iterations),
            graph: explicit.as_ref().filter(|_| engine != Engine::Bdd).map(|g| g.dump()),
        };
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Internal(e.to_string()))?);
    } else if dot != Some(Path::new("-")) {
        for l in lines {
            println!("{l}");
        }
        println!("{} out of {} in the product", plural(reachable, "reachable state"), sys.product_size());
    }
    Ok(ExitCode::SUCCESS)
}

fn check(file: &Path, queries: &Path, json: bool, exec: Exec, style: &Style) -> Result<ExitCode, Failure> {
    let parsed = load(file, style)?;
    let sys = &parsed.system;
    let (text, label) = read_source(queries)?;
    let qf = parse_queries(&text, &label, Some(&sys.symbols)).map_err(Failure::Diagnostics)?;
    for w in &qf.warnings {
        eprintln!("{}", style.diag(w));
    }
    let rg = build_rg_explicit_with(sys, exec).map_err(|e| Failure::Internal(e.to_string()))?;
    let report = check_suite_with(&rg, &qf.items, exec).map_err(|e| Failure::Usage(e.to_string()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Internal(e.to_string()))?);
    } else {
        let text = report.render();
        for line in text.lines() {
            let painted = if let Some((name, rest)) = line.split_once(": FALSE") {
                format!("{name}: {}{rest}", style.paint("1;31", "FALSE"))
            } else if let Some((name, rest)) = line.split_once(": true") {
                format!("{name}: {}{rest}", style.paint("32", "true"))
            } else {
                line.to_owned()
            };
            println!("{painted}");
        }
    }
    Ok(if report.all_hold() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn vhdl(file: &Path, output: Option<&Path>, opts: CodegenOptions, style: &Style) -> Result<ExitCode, Failure> {
    let parsed = load(file, style)?;
    let sys = &parsed.system;
    let text = generate(sys, &opts).map_err(|e| Failure::Usage(e.to_string()))?;
    let audit = structural_audit(&text, sys);
    if !audit.passed() {
        return Err(Failure::Internal(format!("generated VHDL failed its audit:\n  {}", audit.failures.join("\n  "))));
    }
    match output {
        Some(p) => {
            write_out(p, &text)?;
            eprintln!("wrote {} ({}, audit passed)", p.display(), plural(audit.processes as u128, "process"));
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn examples(dir: &Path) -> Result<ExitCode, Failure> {
    fs::create_dir_all(dir)?;
    for (name, text) in assets::ALL {
        let path = dir.join(name);
        fs::write(&path, text)?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style::detect();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let result = match &cli.command {
        Command::Lint { file } => lint(file, &style),
        Command::Rg { file, engine, dot, json } => rg(file, *engine, dot.as_deref(), *json, exec, &style),
        Command::Check { file, queries, json } => check(file, queries, *json, exec, &style),
        Command::Vhdl { file, output, state_encoding, delay_ns, entity, clock } => {
            let opts = CodegenOptions {
                encoding: *state_encoding,
                delay_ns: *delay_ns,
                entity_name: entity.clone(),
                clock: *clock,
            };
            vhdl(file, output.as_deref(), opts, &style)
        }
        Command::Examples { emit } => examples(emit),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("{}: {msg}", style.paint("1;31", "error"));
            ExitCode::from(2)
        }
        Err(Failure::Diagnostics(ds)) => {
            for d in &ds {
                eprintln!("{}", style.diag(d));
            }
            let n = ds.iter().filter(|d| d.is_error()).count();
            eprintln!("{}", plural(n as u128, "error"));
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("{}: {msg}", style.paint("1;31", "internal error"));
            ExitCode::from(3)
        }
    }
}
