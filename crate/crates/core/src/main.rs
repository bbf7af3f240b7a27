fn main() {
    std::process::exit(repro_core::cli::run_cli(std::env::args_os()));
}
