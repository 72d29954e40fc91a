use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gridbench_core::agent::backend::http_backend;
use gridbench_core::agent::{BackendConfig, LlmAgentFactory, ScriptedKind};
use gridbench_core::expver::{training_loop, TrainingConfig, TruthRepository};
use gridbench_core::harness::{aggregate, read_log_dir, replay_check, run_suite, EpisodeLog, Flags, MetricsReport};
use gridbench_core::levelgen::{generate_suite, load_suite, write_suite};
use gridbench_core::maze::ExplorBasis;
use gridbench_core::session::SessionManager;
use gridbench_core::{AgentFactory, Game, Instance, Level};

#[derive(Parser)]
#[command(name = "gridbench", version, about = "Maze and match-2 benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance suite and its manifest.
    Gen {
        #[arg(long)]
        game: Game,
        #[arg(long, value_delimiter = ',', default_value = "easy,medium,hard")]
        levels: Vec<Level>,
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run agents over a suite and write logs and reports.
    Run {
        #[arg(long)]
        suite: PathBuf,
        /// Scripted agents (bfs, frontier, greedy) or `llm`.
        #[arg(long, value_delimiter = ',', required = true)]
        agents: Vec<String>,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        flags: FlagArgs,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a truth repository with the experience/verify/organize loop.
    Expver {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Player agent: a scripted agent or `llm`.
        #[arg(long, default_value = "llm")]
        agent: String,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        flags: FlagArgs,
        #[arg(long, default_value_t = 4)]
        rounds: u32,
        /// Append verified truths verbatim instead of organizing them.
        #[arg(long)]
        no_organizer: bool,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[arg(long)]
        repo: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a directory of episode logs into a report.
    Metrics {
        #[arg(long)]
        logs: PathBuf,
        /// Also write report.csv and report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute logged episodes and compare every step.
    Replay {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Serve the human play API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long)]
        log_dir: Option<PathBuf>,
        /// Browser client files served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1800)]
        idle_timeout_secs: u64,
    },
}

#[derive(Args)]
struct BackendArgs {
    /// JSON backend config (endpoint, model, token_env, ...).
    #[arg(long)]
    backend: Option<PathBuf>,
}

impl BackendArgs {
    fn config(&self) -> Result<BackendConfig> {
        match &self.backend {
            Some(p) => Ok(BackendConfig::load(p)?),
            None => Ok(BackendConfig::default()),
        }
    }
}

#[derive(Args)]
struct FlagArgs {
    #[arg(long)]
    full_vision: bool,
    #[arg(long)]
    no_props: bool,
    /// Exploration rate over non-wall cells instead of all 81.
    #[arg(long)]
    explor_non_wall: bool,
}

impl FlagArgs {
    fn flags(&self) -> Flags {
        Flags {
            full_vision: self.full_vision,
            no_props: self.no_props,
            explor_basis: if self.explor_non_wall { ExplorBasis::NonWall } else { ExplorBasis::AllCells },
        }
    }
}

fn agent(name: &str, backend: &BackendArgs) -> Result<Box<dyn AgentFactory>> {
    if name.eq_ignore_ascii_case("llm") {
        let b = http_backend(&backend.config()?)?;
        return Ok(Box::new(LlmAgentFactory::new(Arc::new(b))));
    }
    Ok(Box::new(name.parse::<ScriptedKind>()?))
}

fn suite(path: &Path) -> Result<Vec<Instance>> {
    let (_, instances) = load_suite(path).with_context(|| format!("loading {}", path.display()))?;
    if instances.is_empty() {
        bail!("{} lists no instances", path.display());
    }
    Ok(instances)
}

fn print_report(report: &MetricsReport) {
    let rows: Vec<Vec<String>> = std::iter::once(report.columns().iter().map(|c| c.to_string()).collect())
        .chain(report.rows.iter().map(|r| report.cells(r)))
        .collect();
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    for row in rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        println!("{}", line.join("  ").trim_end());
    }
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Gen {
            game,
            levels,
            count,
            seed,
            out,
        } => {
            let instances = generate_suite(game, &levels, count, seed)?;
            let manifest = write_suite(&out, seed, &instances)?;
            println!("wrote {} instances to {}", manifest.entries.len(), out.display());
        }
        Command::Run {
            suite: path,
            agents,
            backend,
            flags,
            workers,
            out,
        } => {
            let instances = suite(&path)?;
            let factories = agents.iter().map(|a| agent(a, &backend)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&dyn AgentFactory> = factories.iter().map(|f| f.as_ref()).collect();
            let outcome = run_suite(&instances, &refs, flags.flags(), workers, &out)?;
            print_report(&outcome.report);
            for a in &outcome.manifest.aborted {
                eprintln!("aborted: {} on {}: {}", a.agent, a.instance, a.reason);
            }
        }
        Command::Expver {
            train,
            test,
            agent: name,
            backend,
            flags,
            rounds,
            no_organizer,
            workers,
            repo,
            out,
        } => {
            let (train, test) = (suite(&train)?, suite(&test)?);
            let player = agent(&name, &backend)?;
            let llm = http_backend(&backend.config()?)?;
            let mut truths = TruthRepository::load_or_default(&repo)?;
            let cfg = TrainingConfig {
                rounds,
                flags: flags.flags(),
                truthweaver: !no_organizer,
                workers,
                log_dir: Some(out.join("logs")),
                repo_path: Some(repo.clone()),
                ..TrainingConfig::default()
            };
            let report = training_loop(&train, &test, player.as_ref(), &llm, &mut truths, &cfg)?;
            std::fs::create_dir_all(&out)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            std::fs::write(out.join("training_report.json"), text)?;
            for r in &report.rows {
                println!(
                    "round {} {:?} suc_rate {:.2} a_score {:.2} repo v{}",
                    r.round, r.outcome, r.suc_rate, r.a_score, r.repo_version
                );
            }
            if let Some(reason) = report.aborted {
                bail!("training aborted: {reason}");
            }
        }
        Command::Metrics { logs, out } => {
            let logs = read_log_dir(&logs)?;
            let report = aggregate(&logs)?;
            print_report(&report);
            if let Some(out) = out {
                std::fs::create_dir_all(&out)?;
                std::fs::write(out.join("report.csv"), report.to_csv())?;
                std::fs::write(
                    out.join("report.json"),
                    serde_json::to_string_pretty(&report.to_table_json())? + "\n",
                )?;
            }
        }
        Command::Replay { logs } => {
            let mut bad = 0;
            for path in &logs {
                let log = EpisodeLog::read(path)?;
                match replay_check(&log) {
                    Ok(()) => println!("ok   {}", path.display()),
                    Err(d) => {
                        bad += 1;
                        println!("FAIL {}: {d:?}", path.display());
                    }
                }
            }
            if bad > 0 {
                bail!("{bad} of {} logs diverged", logs.len());
            }
        }
        Command::Serve {
            addr,
            log_dir,
            static_dir,
            idle_timeout_secs,
        } => {
            let timeout = Duration::from_secs(idle_timeout_secs);
            let manager = Arc::new(SessionManager::with_timeout(log_dir, timeout));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                gridbench_cli::spawn_reaper(manager.clone(), (timeout / 4).max(Duration::from_secs(1)));
                let listener = tokio::net::TcpListener::bind(&addr).await?;
                tracing::info!(%addr, "serving");
                axum::serve(listener, gridbench_cli::router(manager, static_dir))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}
