fn main() {
    std::process::exit(calibr::cli::main_with_args(std::env::args_os()));
}
