fn main() {
    std::process::exit(qmsan::cli::run_from_args(std::env::args_os()));
}
