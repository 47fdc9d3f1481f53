use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};

use fracflow_cli::commands::{EXIT_CONFIG, EXIT_IO};
use fracflow_cli::config::help_table;
use fracflow_cli::{merge, run_subcommand, Subcommand};

#[derive(Parser)]
#[command(name = "fracflow", version, about = "Fractional curvature flow laboratory", after_help = help_table())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Evolve a convex curve by volume-preserving fractional curvature flow
    Flow(Common),
    /// Fractional curvature of one shape by one or all methods
    Curvature(Common),
    /// Fractional heat equation with forcing: maximum principle and Schauder ratios
    Spectral(Common),
    /// Hölder and Littlewood–Paley norms on a function corpus
    Norms(Common),
    /// Run the property suite; exit 0 iff every check passes
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// key=value lines or a JSON object
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// override any key, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(short = 's', long)]
    s: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(short = 'n', long = "grid", value_name = "N")]
    n: Option<String>,
    #[arg(short = 't', long = "horizon", value_name = "T")]
    t: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(short = 'o', long = "output", value_name = "DIR")]
    output: Option<String>,
    /// worker threads (default: FRACFLOW_THREADS, then all cores)
    #[arg(long, env = "FRACFLOW_THREADS")]
    threads: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>, String> {
        let mut out = Vec::new();
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
            out.push((k.to_string(), v.to_string()));
        }
        let flags = [
            ("s", &self.s),
            ("alpha", &self.alpha),
            ("N", &self.n),
            ("T", &self.t),
            ("dt", &self.dt),
            ("shape", &self.shape),
            ("seed", &self.seed),
            ("method", &self.method),
            ("output_dir", &self.output),
        ];
        out.extend(flags.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))));
        Ok(out)
    }
}

fn fail(code: i32, cause: &str, message: &str) -> ExitCode {
    eprintln!("{}", serde_json::json!({"error": cause, "message": message}));
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, common) = match &cli.command {
        Command::Flow(c) => (Subcommand::Flow, c),
        Command::Curvature(c) => (Subcommand::Curvature, c),
        Command::Spectral(c) => (Subcommand::Spectral, c),
        Command::Norms(c) => (Subcommand::Norms, c),
        Command::Verify(c) => (Subcommand::Verify, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(EXIT_CONFIG, "threads", &e.to_string());
        }
    }
    let file = match &common.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => return fail(EXIT_IO, "io", &format!("{}: {e}", p.display())),
        },
        None => None,
    };
    let overrides = match common.overrides() {
        Ok(o) => o,
        Err(e) => return fail(EXIT_CONFIG, "config", &e),
    };
    let cfg = match merge(file.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, &format!("config:{}", e.key), &e.message),
    };
    if let Some(want) = cfg.subcommand {
        if want != sub {
            return fail(EXIT_CONFIG, "config:subcommand", &format!("config is for '{want}', invoked '{sub}'"));
        }
    }
    match run_subcommand(&cfg, sub) {
        Ok(o) => {
            println!("{}", o.summary);
            println!("artifacts in {}", cfg.output_dir.display());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => fail(e.exit_code(), e.code(), &e.to_string()),
    }
}
