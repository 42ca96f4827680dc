use clap::Parser;

fn main() {
    let cli = a2rid::cli::Cli::parse();
    let stdout = std::io::stdout();
    if let Err(e) = a2rid::cli::run(cli, &mut stdout.lock()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
