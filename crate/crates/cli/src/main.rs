use clap::Parser;
use dpolar_cli::args::Cli;
use dpolar_cli::commands;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = commands::run(cli.command) {
        eprintln!("dpolar: {}", e);
        std::process::exit(e.exit_code());
    }
}
