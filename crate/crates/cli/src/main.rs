use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use anyhow::Result;
use belief_cli::{estimate, impact, io::write_json, pay, serve, simulate};
use belief_core::estimation::{BiasKind, ClassifyOptions, Correction};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "belief", version, about = "Belief-updating bias pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrectionArg {
    None,
    Sidak,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate subjects and write one session file each, plus a manifest
    Simulate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 88)]
        subjects: usize,
        /// JSON profile mixture; defaults to noisy Bayesian agents
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Give every subject the same urns and sequences
        #[arg(long)]
        fixed_plan: bool,
        #[arg(long, default_value = "sim")]
        out: PathBuf,
    },
    /// Fit baseline and complete models, classify biases, write tables
    Estimate {
        /// Directory of session files (or one containing `sessions/`)
        sessions: PathBuf,
        /// Ground-truth manifest for a recovery report
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "none")]
        correction: CorrectionArg,
        /// Also test alpha_pref against beta_pref (good/bad news)
        #[arg(long)]
        news: bool,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Gross and net impact of detected biases
    Impact {
        sessions: PathBuf,
        /// Output directory of `estimate`
        #[arg(long, default_value = "results")]
        fits: PathBuf,
        /// Keep tasks whose counterfactual shape hit the floor
        #[arg(long)]
        include_clamped: bool,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Settle a completed session and print the payment breakdown
    Pay {
        session: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the elicitation endpoints and static assets
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Where session logs, documents and payments are kept
        #[arg(long, default_value = "data")]
        data: PathBuf,
        /// Directory of static files for the browser task
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            seed,
            subjects,
            profiles,
            fixed_plan,
            out,
        } => {
            let mixture = match profiles {
                Some(p) => simulate::load_mixture(&p)?,
                None => simulate::default_mixture(),
            };
            let m = simulate::run(&simulate::SimulateOptions {
                seed,
                subjects,
                mixture,
                fixed_plan,
                out: out.clone(),
            })?;
            println!("wrote {} sessions to {}", m.subjects.len(), out.join("sessions").display());
        }
        Command::Estimate {
            sessions,
            manifest,
            alpha,
            correction,
            news,
            out,
        } => {
            anyhow::ensure!(alpha > 0.0 && alpha < 1.0, "--alpha must be in (0, 1)");
            let classify = ClassifyOptions {
                alpha,
                correction: match correction {
                    CorrectionArg::None => Correction::None,
                    CorrectionArg::Sidak => Correction::Sidak,
                },
                include_news: news,
            };
            let s = estimate::run(&estimate::EstimateOptions {
                sessions,
                manifest,
                classify,
                out: out.clone(),
            })?;
            println!(
                "{} sessions, {} rows, {} excluded, {} files skipped",
                s.sessions,
                s.rows,
                s.exclusions,
                s.file_errors.len()
            );
            if let Some(e) = &s.population_error {
                println!("population fit failed: {e}");
            }
            println!(
                "threshold p < {:.6}: {} of {} subjects without bias",
                s.threshold, s.complete_tally.no_bias, s.complete_tally.subjects
            );
            for kind in BiasKind::ALL {
                let n = s.complete_tally.by_kind[&kind].total();
                if n > 0 {
                    println!("  {:<22} {n}", kind.label());
                }
            }
            println!("tables in {}", out.display());
        }
        Command::Impact {
            sessions,
            fits,
            include_clamped,
            out,
        } => {
            let table = impact::run(&impact::ImpactOptions {
                sessions,
                fits,
                include_clamped,
                out: out.clone(),
            })?;
            for kind in table.ranking_by_gross_e() {
                let r = table.get(kind);
                println!(
                    "{:<22} gross dE {:.4}  net dE {:.4}  subjects {}",
                    kind.label(),
                    r.gross_delta_e,
                    r.net_delta_e,
                    r.significance_count
                );
            }
            println!("tables in {}", out.display());
        }
        Command::Pay { session, seed, out } => {
            let payment = pay::run(&session, seed)?;
            match out {
                Some(path) => write_json(&path, &payment)?,
                None => {
                    let text = serde_json::to_string_pretty(&payment)? + "\n";
                    match std::io::stdout().write_all(text.as_bytes()) {
                        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                        other => other?,
                    }
                }
            }
        }
        Command::Serve {
            port,
            host,
            data,
            static_dir,
        } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve::run(SocketAddr::new(host, port), data, static_dir))?;
        }
    }
    Ok(())
}
