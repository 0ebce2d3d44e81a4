use clap::Parser;

fn main() {
    std::process::exit(stripes_cli::main_with(stripes_cli::Cli::parse()));
}
