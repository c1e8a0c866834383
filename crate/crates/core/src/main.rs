fn main() {
    std::process::exit(charflow::harness::cli::main_with_args(std::env::args_os()));
}
