fn main() {
    std::process::exit(wbary_cli::main_with_args(std::env::args_os()));
}
