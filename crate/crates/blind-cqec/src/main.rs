use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use blind_cqec::bench::{run_command, write_output, BenchmarkConfig, Runner, COMMANDS};
use blind_cqec::Error;
use clap::Parser;

/// Blind catalytic QEC benchmarks. Writes CSV tables, JSON sidecars and a run manifest.
#[derive(Parser, Debug)]
#[command(name = "blind-cqec", version)]
struct Cli {
    /// sweep-noise, sweep-dim, sweep-copies, sensitivity, mixed-hybrid, qem-compare,
    /// correlation, vqe, circuit-sanity, crossover or all
    subcommand: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated dimension list for the chosen subcommand.
    #[arg(long)]
    dims: Option<String>,
    /// Override any config entry, e.g. `--set sweep-dim.states=5`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Exit with status 1 if any acceptance threshold fails.
    #[arg(long)]
    check: bool,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn dims_key(subcommand: &str) -> Option<&'static str> {
    Some(match subcommand {
        "sweep-noise" => "sweep-noise.dims",
        "sweep-dim" | "all" => "sweep-dim.dims",
        "sensitivity" => "sensitivity.dims",
        "mixed-hybrid" => "mixed-hybrid.hybrid_dims",
        "qem-compare" => "qem-compare.dims",
        "crossover" => "crossover.dims",
        _ => return None,
    })
}

fn load_config(cli: &Cli) -> Result<BenchmarkConfig, Error> {
    if cli.subcommand != "all" && !COMMANDS.contains(&cli.subcommand.as_str()) {
        return Err(Error::Config(format!("unknown subcommand `{}`", cli.subcommand)));
    }
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            BenchmarkConfig::from_text(&text)?
        }
        None => BenchmarkConfig::default(),
    };
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set {o}: expected KEY=VALUE")))?;
        let k = k.trim();
        let path = if k.contains('.') {
            k.to_string()
        } else {
            format!("global.{k}")
        };
        cfg.set(&path, v.trim())?;
    }
    if let Some(d) = &cli.dims {
        let key = dims_key(&cli.subcommand)
            .ok_or_else(|| Error::Config(format!("--dims does not apply to {}", cli.subcommand)))?;
        cfg.set(key, d)?;
    }
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if cfg.workers == 0 {
        return Err(Error::Config("workers must be positive".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("blind-cqec: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let start = Instant::now();
    let result = Runner::new(cfg.workers)
        .and_then(|r| run_command(&cli.subcommand, &cfg, &r))
        .and_then(|out| write_output(&out, &cfg, &cfg.out_dir).map(|paths| (out, paths)));
    let (out, paths) = match result {
        Ok(x) => x,
        Err(e) => {
            eprintln!("blind-cqec: {e}");
            return ExitCode::from(if matches!(e, Error::Config(_)) {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            });
        }
    };
    for p in &paths {
        println!("wrote {}", p.display());
    }
    if cli.check {
        for c in &out.checks {
            println!(
                "{} C{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.criterion,
                c.name,
                c.detail
            );
        }
    }
    eprintln!("{} finished in {:.1} s", cli.subcommand, start.elapsed().as_secs_f64());
    if cli.check && !out.passed() {
        return ExitCode::from(EXIT_CHECK_FAILED);
    }
    ExitCode::SUCCESS
}
