fn main() {
    std::process::exit(dephasing::cli::main_with_args(std::env::args_os()));
}
