fn main() {
    std::process::exit(geosigma_cli::run_from_args(std::env::args_os()));
}
