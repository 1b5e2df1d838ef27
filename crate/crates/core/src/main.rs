use clap::Parser;

fn main() {
    let cli = koppelman::cli::Cli::parse();
    std::process::exit(koppelman::cli::run(cli));
}
