use clap::Parser;

fn main() {
    let cli = pim_cli::Cli::parse();
    std::process::exit(pim_cli::run(cli));
}
