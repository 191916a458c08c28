fn main() {
    std::process::exit(zerosum_cli::main_with_args(std::env::args_os()));
}
