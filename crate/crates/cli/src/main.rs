fn main() {
    std::process::exit(qkmeans_cli::main_with_args(std::env::args_os()));
}
