use std::io::Write;

use clap::Parser;
use heisenmeasure_cli::{run, Args};

fn main() {
    let args = Args::parse();
    let outcome = run(&args);
    if let (Some(report), None) = (&outcome.report, &outcome.written_to) {
        let mut out = std::io::stdout().lock();
        if out.write_all(report.as_bytes()).and_then(|_| out.flush()).is_err() {
            std::process::exit(4);
        }
    }
    if let Some(msg) = &outcome.message {
        eprintln!("{msg}");
    }
    std::process::exit(outcome.exit_code);
}
