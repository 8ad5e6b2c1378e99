use clap::Parser;

fn main() {
    let cli = edc::cli::Cli::parse();
    let stdout = std::io::stdout();
    if let Err(e) = edc::cli::run(cli, &mut stdout.lock()) {
        eprintln!("edc: {e}");
        std::process::exit(e.exit_code());
    }
}
