fn main() {
    std::process::exit(qevo::cli::main_with_args(std::env::args_os()));
}
