fn main() {
    std::process::exit(vqaudit::cli::main_with_args(std::env::args_os()));
}
