use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = groundmetric_cli::Cli::parse();
    std::process::ExitCode::from(groundmetric_cli::run(&cli) as u8)
}
