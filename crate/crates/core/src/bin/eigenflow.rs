fn main() {
    std::process::exit(eigenflow::cli::main_with_args(std::env::args_os()));
}
