//! Library half of the command-line front end; `main` stays a thin shell so
//! integration tests can exercise everything in-process.

pub mod cli;
pub mod commands;
pub mod plot;
pub mod report;

use clap::Parser;

pub use cli::Cli;

/// Runs a parsed invocation and returns the process exit code.
/// 0: success (and convergence where that applies); 2: usage or input
/// validation; 3: numerical non-convergence; 4: i/o failure.
pub fn run(cli: &Cli) -> i32 {
    if let Some(threads) = effective_threads(cli.threads) {
        // Ignore the error if a global pool already exists (tests call run
        // repeatedly in one process).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let outcome = match &cli.command {
        cli::Command::Gen(args) => commands::gen::run(&args.kind),
        cli::Command::Eigen(args) => commands::eigen::run(args),
        cli::Command::Singular(args) => commands::singular::run(args),
        cli::Command::Check(args) => commands::check::run(&args.kind),
    };
    match outcome {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            exit_code_for(&error)
        }
    }
}

pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            2
        }
    }
}

fn effective_threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("GROUNDMETRIC_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn exit_code_for(error: &anyhow::Error) -> i32 {
    if let Some(core) = error.downcast_ref::<groundmetric::Error>() {
        return match core {
            groundmetric::Error::Io { .. }
            | groundmetric::Error::CsvParse { .. }
            | groundmetric::Error::IdxMagic { .. }
            | groundmetric::Error::IdxTruncated { .. } => 4,
            groundmetric::Error::ScalingCap { .. }
            | groundmetric::Error::ScalingOverflow
            | groundmetric::Error::SolverStall { .. }
            | groundmetric::Error::EigenFailure(_) => 3,
            _ => 2,
        };
    }
    if error.downcast_ref::<std::io::Error>().is_some() {
        return 4;
    }
    2
}
