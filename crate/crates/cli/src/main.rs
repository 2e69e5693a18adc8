use clap::Parser;

fn main() {
    let cli = tenkit_cli::Cli::parse();
    if let Err(failure) = tenkit_cli::run(cli) {
        eprintln!("error: {failure:#}");
        std::process::exit(failure.exit_code());
    }
}
