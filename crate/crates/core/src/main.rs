use clap::Parser;

fn main() {
    let cli = wps::cli::Cli::parse();
    std::process::exit(wps::cli::main_with(&cli));
}
