use clap::Parser;

fn main() {
    let cli = nsbox::cli::Cli::parse();
    std::process::exit(nsbox::cli::run(cli));
}
