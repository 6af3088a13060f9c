use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;

use newsxai_cli::{commands, Cli};

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match commands::execute(&cli.command) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors often repeat their source in their own message
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
