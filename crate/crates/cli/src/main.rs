use clap::Parser;

fn main() {
    let cli = lossphase_cli::Cli::parse();
    std::process::exit(lossphase_cli::run(cli));
}
