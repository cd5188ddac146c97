fn main() {
    std::process::exit(groupfair::cli::main_with_args(std::env::args_os()));
}
