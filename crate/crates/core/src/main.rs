fn main() {
    std::process::exit(pfa_core::cli::main_with_args(std::env::args_os()));
}
