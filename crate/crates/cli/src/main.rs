fn main() {
    std::process::exit(annuity_cli::run(std::env::args_os().collect()));
}
