fn main() {
    std::process::exit(pqcm_cli::run_cli(std::env::args_os()));
}
