use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use thermsense_service::cli::{self, Cli, CliError, Command};
use thermsense_service::server;
use tracing_subscriber::EnvFilter;

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(4, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let summary = match &cli.command {
        Command::Synth(args) => cli::synth(args)?,
        Command::Process(args) => cli::process(&cli.global, args)?,
        Command::Rate(args) => cli::rate(&cli.global, args)?,
        Command::Rvs(args) => cli::rvs(&cli.global, args)?,
        Command::Serve(args) => {
            let (seq, cfg) = cli::serve_setup(&cli.global, args)?;
            let addr = format!("{}:{}", args.host, cli.global.port);
            let rt = tokio::runtime::Runtime::new().context("starting the async runtime")?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .with_context(|| format!("binding {addr}"))?;
                tracing::info!("listening on http://{}", listener.local_addr()?);
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                server::serve(listener, seq, cfg, shutdown).await.context("serving")
            })?;
            String::new()
        }
    };
    if !summary.is_empty() {
        println!("{summary}");
    }
    Ok(())
}
