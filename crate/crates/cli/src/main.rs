fn main() {
    std::process::exit(courant_cli::run_cli(std::env::args_os()));
}
