fn main() {
    std::process::exit(svnet::cli::main_with_args(std::env::args_os()));
}
