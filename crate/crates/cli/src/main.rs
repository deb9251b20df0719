use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use alglab_cli::{emit, exit_code, resolve, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = std::env::var("ALGLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialisation only happens in tests; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let result = resolve(cli).and_then(|cfg| {
        let rep = run(&cfg)?;
        let text = emit(&rep, &cfg)?;
        Ok((rep, text))
    });
    match result {
        Ok((rep, text)) => {
            if let Some(t) = text {
                let _ = std::io::stdout().write_all(t.as_bytes());
            }
            ExitCode::from(exit_code(&rep) as u8)
        }
        Err(e) => {
            eprintln!("alglab: {}", e);
            ExitCode::from(2)
        }
    }
}
