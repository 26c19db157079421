fn main() {
    std::process::exit(schedarena::cli::main_with_args(std::env::args_os()));
}
