fn main() {
    std::process::exit(supfield::cli::main_with_args(std::env::args_os()));
}
