use clap::Parser;

fn main() {
    let cli = orbitlab::cli::Cli::parse();
    std::process::exit(orbitlab::cli::run(cli));
}
