fn main() {
    std::process::exit(emaxpk::cli::main_with_args(std::env::args_os()));
}
