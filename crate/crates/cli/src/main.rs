use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rym_cli::{cmd_classify, cmd_evolve, cmd_spectrum, cmd_verify, render_checks, RunConfig, RunSummary};

/// Ricci Yang-Mills flow laboratory.
#[derive(Debug, Parser)]
#[command(name = "rym", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Perturbation seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the flow from a perturbed fixed point on the torus.
    Evolve,
    /// Linearized spectrum at a fixed point on the torus or sphere.
    Spectrum,
    /// Sphere stability verdicts over a range of Chern numbers.
    Classify,
    /// Structural, linearization and conservation checks.
    Verify {
        #[arg(long, hide = true)]
        debug_flip_coupling: bool,
    },
}

fn describe(s: &RunSummary) -> String {
    let mut parts = vec![format!("{}: {:?}", s.command, s.status).to_lowercase()];
    if let Some(c) = s.converged {
        parts.push(format!("converged={c}"));
    }
    if let Some(t) = s.final_time {
        parts.push(format!("t={t:.4}"));
    }
    if let (Some(rate), Some(gap)) = (s.fitted_decay_rate, s.spectral_gap) {
        parts.push(format!("rate={rate:.6} gap={gap:.6}"));
    }
    if let Some(sp) = &s.spectrum {
        parts.push(format!("max={:.6e} zero_dim={}", sp.max_eigenvalue, sp.zero_dim));
    }
    if let Some(v) = &s.verdict {
        parts.push(format!("verdict={}({})", v.kind, v.value));
    }
    if let Some(rows) = &s.classifications {
        let v: Vec<String> = rows.iter().map(|r| format!("{}:{}", r.chern, r.verdict.kind)).collect();
        parts.push(v.join(" "));
    }
    parts.join(" ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let result = match cli.command {
        Command::Evolve => cmd_evolve(&cfg),
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Classify => cmd_classify(&cfg),
        Command::Verify { debug_flip_coupling } => cmd_verify(&cfg, debug_flip_coupling),
    };
    match result {
        Ok(summary) => {
            if !cli.quiet {
                if let Some(checks) = &summary.checks {
                    print!("{}", render_checks(checks));
                }
                println!("{}", describe(&summary));
            }
            if let Some(reason) = &summary.failure {
                eprintln!("error: {reason}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
