fn main() {
    std::process::exit(pwishart::cli::main_with_args(std::env::args_os()));
}
