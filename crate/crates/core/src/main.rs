fn main() {
    std::process::exit(hjlab_core::cli::run_cli(std::env::args_os()));
}
