fn main() {
    std::process::exit(extrad::cli::main_with_args(std::env::args_os()));
}
