use clap::Parser;

fn main() {
    let cli = wordsig_cli::Cli::parse();
    if let Err(failure) = wordsig_cli::run(cli) {
        eprintln!("{}", failure.to_json());
        std::process::exit(failure.kind.exit_code());
    }
}
