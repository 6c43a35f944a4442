use clap::Parser;

fn main() {
    let args = koiter_wrinkle::cli::Args::parse();
    std::process::exit(koiter_wrinkle::cli::run(args));
}
