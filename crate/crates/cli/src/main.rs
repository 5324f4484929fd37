//! `bidsolve`: solve, inspect and play all-pay bidding games.
//!
//! Analysis output is JSON on stdout with every number rounded to nine
//! significant digits. Exit status is 0 on success, 1 on a domain error
//! (reported as JSON on stderr) and 2 on a usage error.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bidsolve_core::dag_solver::{default_x, solve_game, DagError, SolveOptions};
use bidsolve_core::equilibrium::{solve_turn, verify_equilibrium, EquilibriumError};
use bidsolve_core::game_graph::{GameSelector, GraphError};
use bidsolve_core::payoff_matrix::MatrixError;
use bidsolve_core::simulate::simulate;
use bidsolve_core::table_io::{load_table, save_table, solve_cached};
use bidsolve_core::{GameGraph, MixedStrategy, Payoff, Table};
use bidsolve_server::{AppState, ServerConfig};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

const SIG_DIGITS: usize = 9;

#[derive(Parser)]
#[command(name = "bidsolve", version, about = "Equilibria of all-pay bidding games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game for every split of N chips and print the root values.
    Solve {
        #[arg(long)]
        game: GameSelector,
        #[arg(long)]
        chips: u32,
        #[arg(long, value_parser = positive)]
        x: Option<f64>,
        /// Write the full table here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Store equilibrium strategies in the table.
        #[arg(long)]
        strategies: bool,
    },
    /// Equilibrium of one turn given the advantage player's payoff matrix.
    Eq {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_parser = positive)]
        x: Option<f64>,
    },
    /// Dump one vertex's row of a saved table.
    Table {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        vertex: String,
        /// Graph the table belongs to; resolves vertex names.
        #[arg(long, default_value = "ttt")]
        game: GameSelector,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check a candidate strategy pair against a payoff matrix.
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        /// JSON array of column-player probabilities.
        #[arg(long)]
        s_a: String,
        /// JSON array of row-player probabilities.
        #[arg(long)]
        s_b: String,
    },
    /// Seeded self-play from a saved table.
    Simulate {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        game: GameSelector,
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long)]
        chips_a: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the HTTP play service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Game to preload.
        #[arg(long, default_value = "ttt")]
        game: GameSelector,
        #[arg(long, default_value_t = 200)]
        chips: u32,
        /// Table file for `--game`/`--chips`; solved and written if missing.
        #[arg(long)]
        pretable: Option<PathBuf>,
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
        #[arg(long)]
        cors_origin: Option<String>,
        #[arg(long, value_parser = positive)]
        x: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
        }
    }
}

macro_rules! failure_from {
    ($($t:ty => $kind:literal),* $(,)?) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::new($kind, e.to_string())
            }
        })*
    };
}

failure_from! {
    DagError => "solve",
    GraphError => "graph",
    EquilibriumError => "equilibrium",
    MatrixError => "matrix",
    std::io::Error => "io",
    serde_json::Error => "parse",
    bidsolve_server::ApiError => "server",
}

fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.prec$e}", prec = SIG_DIGITS - 1).parse().unwrap_or(v)
}

fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(round_sig(n.as_f64().unwrap_or(0.0))),
        Value::Array(items) => Value::Array(items.into_iter().map(rounded).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

fn emit(v: impl Serialize) -> Result<(), Failure> {
    let v = rounded(serde_json::to_value(v)?);
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn read_matrix(path: &Path) -> Result<Payoff, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn vertex_id(g: &GameGraph, name: Option<&str>) -> Result<usize, Failure> {
    match name {
        Some(n) => Ok(g.id(n)?),
        None => Ok(g.start()),
    }
}

fn solve(game: GameSelector, chips: u32, x: Option<f64>, out: Option<PathBuf>, strategies: bool) -> Result<(), Failure> {
    let g = game.build()?;
    let opts = SolveOptions {
        x: Some(x.unwrap_or_else(|| default_x(&g, chips))),
        store_strategies: strategies,
        ..SolveOptions::default()
    };
    let table = match std::env::var_os("BIDSOLVE_CACHE_DIR") {
        Some(dir) if !dir.is_empty() => solve_cached(&g, chips, &opts, Path::new(&dir))?,
        _ => solve_game(&g, chips, &opts)?,
    };
    if let Some(path) = &out {
        save_table(&table, path)?;
    }
    let root = g.start();
    emit(json!({
        "game": game.to_string(),
        "graph_hash": g.hash(),
        "vertices": g.len(),
        "N": chips,
        "x": table.x,
        "error_bound": table.error_bound(&g),
        "root": g.name(root),
        "values": table.row(root),
        "lengths": (0..=chips).map(|a| table.length(root, a)).collect::<Vec<_>>(),
        "table": out.map(|p| p.display().to_string()),
    }))
}

fn eq(matrix: PathBuf, x: Option<f64>) -> Result<(), Failure> {
    let m = read_matrix(&matrix)?;
    let m = match x {
        Some(x) => m.adjust_precision(&x),
        None => m,
    };
    let r = solve_turn(&m)?;
    emit(json!({
        "value": r.value,
        "length": r.length,
        "s_a": r.s_a,
        "s_b": r.s_b,
        "best_response_gap": r.best_response_gap,
    }))
}

fn table(input: PathBuf, vertex: String, game: GameSelector, format: Format) -> Result<(), Failure> {
    let g = game.build()?;
    let t: Table = load_table(&input, Some(g.hash()))?;
    let v = g.id(&vertex)?;
    let lengths: Vec<Option<u32>> = (0..=t.total).map(|a| t.length(v, a)).collect();
    match format {
        Format::Json => emit(json!({
            "vertex": vertex,
            "N": t.total,
            "x": t.x,
            "values": t.row(v),
            "lengths": lengths,
        })),
        Format::Csv => {
            println!("a,value,length");
            for (a, val) in t.row(v).iter().enumerate() {
                println!("{a},{},{}", round_sig(*val), lengths[a].unwrap_or(0));
            }
            Ok(())
        }
    }
}

fn verify(matrix: PathBuf, s_a: String, s_b: String) -> Result<(), Failure> {
    let m = read_matrix(&matrix)?;
    let s_a = MixedStrategy::new(serde_json::from_str(&s_a)?);
    let s_b = MixedStrategy::new(serde_json::from_str(&s_b)?);
    let report = verify_equilibrium(&m, &s_a, &s_b)?;
    let passed = report.passed();
    emit(json!({
        "passed": passed,
        "equalized": report.equalized(),
        "is_equilibrium": report.is_equilibrium(),
        "structural": report.structural(),
        "report": report,
    }))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::new("verification", "candidate is not an equilibrium"))
    }
}

fn simulate_cmd(
    table: PathBuf,
    game: GameSelector,
    vertex: Option<String>,
    chips_a: u32,
    trials: u64,
    seed: u64,
) -> Result<(), Failure> {
    let g = game.build()?;
    let t: Table = load_table(&table, Some(g.hash()))?;
    let v = vertex_id(&g, vertex.as_deref())?;
    let r = simulate(&g, &t, v, chips_a, trials, seed)?;
    let expected = t
        .value(v, chips_a)
        .copied()
        .ok_or_else(|| Failure::new("solve", "chip count out of range"))?;
    let sigma = (expected.clamp(0.0, 1.0) * (1.0 - expected.clamp(0.0, 1.0)) / trials as f64).sqrt();
    emit(json!({
        "vertex": g.name(v),
        "chips_a": chips_a,
        "seed": seed,
        "trials": r.trials,
        "wins_a": r.wins_a,
        "win_rate": r.win_rate,
        "std_error": r.std_error,
        "table_value": expected,
        "deviation_sigmas": if sigma > 0.0 { (r.win_rate - expected).abs() / sigma } else { 0.0 },
    }))
}

#[allow(clippy::too_many_arguments)]
fn serve(
    port: u16,
    host: std::net::IpAddr,
    game: GameSelector,
    chips: u32,
    pretable: Option<PathBuf>,
    snapshot_dir: Option<PathBuf>,
    cors_origin: Option<String>,
    x: Option<f64>,
) -> Result<(), Failure> {
    let cache_dir = std::env::var_os("BIDSOLVE_CACHE_DIR")
        .filter(|d| !d.is_empty())
        .map(PathBuf::from);
    let state = AppState::new(ServerConfig {
        x,
        snapshot_dir,
        cache_dir,
        cors_origin,
        ..ServerConfig::default()
    });
    if let Some(path) = pretable {
        if !path.exists() {
            let g = game.build()?;
            let opts = SolveOptions {
                x,
                ..SolveOptions::default()
            };
            eprintln!("solving {game} at {chips} chips into {}", path.display());
            save_table(&solve_game(&g, chips, &opts)?, &path)?;
        }
        state.preload(&game, &path)?;
    }
    let restored = state.restore_snapshots()?;
    let addr = SocketAddr::new(host, port);
    eprintln!("listening on http://{addr}/v1 ({restored} sessions restored)");
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(bidsolve_server::serve(state, addr))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            game,
            chips,
            x,
            out,
            strategies,
        } => solve(game, chips, x, out, strategies),
        Command::Eq { matrix, x } => eq(matrix, x),
        Command::Table {
            input,
            vertex,
            game,
            format,
        } => table(input, vertex, game, format),
        Command::Verify { matrix, s_a, s_b } => verify(matrix, s_a, s_b),
        Command::Simulate {
            table,
            game,
            vertex,
            chips_a,
            trials,
            seed,
        } => simulate_cmd(table, game, vertex, chips_a, trials, seed),
        Command::Serve {
            port,
            host,
            game,
            chips,
            pretable,
            snapshot_dir,
            cors_origin,
            x,
        } => serve(port, host, game, chips, pretable, snapshot_dir, cors_origin, x),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": { "kind": f.kind, "message": f.message } }));
            ExitCode::from(1)
        }
    }
}
