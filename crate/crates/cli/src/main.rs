use std::net::SocketAddr;
use std::process::ExitCode;

use clap::Parser;
use logichart_cli::args::{Cli, Command, ServeArgs};
use logichart_cli::run::{run, EXIT_USAGE};
use logichart_cli::serve;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run(&args).unwrap_or_else(|e| {
            eprintln!("logichart: {e:#}");
            EXIT_USAGE
        }),
        Command::Serve(args) => serve_main(args),
    };
    ExitCode::from(code)
}

fn serve_main(args: ServeArgs) -> u8 {
    let config = args.layout.config();
    if args.stdio {
        return match serve::stdio(config) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("logichart: {e}");
                1
            }
        };
    }
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let addr: SocketAddr = match format!("{}:{}", args.host, args.port).parse() {
        Ok(addr) => addr,
        Err(e) => {
            eprintln!("logichart: bad address {}:{}: {e}", args.host, args.port);
            return EXIT_USAGE;
        }
    };
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    runtime.block_on(async move {
        let listener = match serve::bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("logichart: cannot listen on {addr}: {e}");
                return EXIT_USAGE;
            }
        };
        tracing::info!("listening on http://{}", listener.local_addr().unwrap_or(addr));
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        };
        match serve::serve(listener, serve::router(config, args.assets), shutdown).await {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("logichart: {e}");
                1
            }
        }
    })
}
