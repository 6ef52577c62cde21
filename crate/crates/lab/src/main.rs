use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavegauge_lab::config::parse_config;
use wavegauge_lab::recipes::{emit, recipe, run_recipe};
use wavegauge_lab::{commands, LabResult};

#[derive(Parser)]
#[command(
    name = "wavegauge",
    version,
    about = "Wave-gauge small-data experiments"
)]
struct Cli {
    /// Output directory (overrides WAVEGAUGE_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; only meaningful with the `parallel` feature.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// Write the configs of a recipe, and optionally run them.
    Recipe {
        name: String,
        #[arg(long)]
        run: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> LabResult<u8> {
    set_threads(cli.threads);
    let out = cli
        .out
        .or_else(|| std::env::var_os("WAVEGAUGE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match cli.cmd {
        Cmd::Run { config } => {
            let mut exp = parse_config(&config)?;
            if let Some(s) = cli.seed {
                exp = exp.with_seed(s);
            }
            let o = commands::run(&exp, &out)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&o.summary).expect("json")
            );
            for f in &o.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(o.exit_code())
        }
        Cmd::Recipe { name, run: false } => {
            for f in emit(&recipe(&name)?, &out)? {
                println!("{}", f.display());
            }
            Ok(0)
        }
        Cmd::Recipe { name, run: true } => {
            let (_, failed) = run_recipe(&name, &out, cli.seed)?;
            Ok(u8::from(failed))
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: Option<usize>) {
    if let Some(n) = n {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: Option<usize>) {
    if n.is_some_and(|n| n > 1) {
        eprintln!("warning: --threads ignored (built without the `parallel` feature)");
    }
}
