//! `holodyn` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error or unknown system, 2 contract
//! violation or unsupported input, 3 non-convergence.

mod cli;
mod report;
mod run;

use holodyn::Error;
use std::process::ExitCode;
use std::time::Instant;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownSystem(_) => 1,
        Error::NonConvergence { .. } => 3,
        _ => 2,
    }
}

fn write(path: Option<&std::path::Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let parsed = match cli::parse(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(cli::ArgError::Display(s)) => {
            print!("{s}");
            return ExitCode::SUCCESS;
        }
        Err(cli::ArgError::Usage(s)) => {
            eprint!("{s}");
            return ExitCode::from(1);
        }
    };
    if let Ok(v) = std::env::var("HOLODYN_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool set once");
            }
            _ => {
                eprintln!("holodyn: HOLODYN_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }
    let cmd = &parsed.command;
    let start = Instant::now();
    let report = match run::run(cmd) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("holodyn {}: {e}", cmd.name());
            if let Error::UnknownSystem(_) = e {
                eprintln!("known systems: {}", holodyn::zoo::registry_names().join(", "));
            }
            return ExitCode::from(exit_code(&e));
        }
    };
    let common = cmd.common();
    if let Err(e) = write(common.out.as_deref(), &report.render()) {
        eprintln!("holodyn: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if let Some(path) = &common.csv {
        match &report.curve {
            Some(csv) => {
                if let Err(e) = std::fs::write(path, csv.render()) {
                    eprintln!("holodyn: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            None => eprintln!("holodyn: {} has no curve; no CSV written", cmd.name()),
        }
    }
    eprintln!("holodyn {} on {}: wall time {:.3} s", cmd.name(), report.system, start.elapsed().as_secs_f64());
    ExitCode::SUCCESS
}
