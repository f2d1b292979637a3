fn main() {
    std::process::exit(abc_core::cli::main_with_args(std::env::args_os()));
}
