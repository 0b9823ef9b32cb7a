fn main() {
    std::process::exit(mpdsim::cli::main_with_args(std::env::args_os()));
}
