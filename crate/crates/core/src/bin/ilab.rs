fn main() {
    std::process::exit(ilab_core::cli::main_with_args(std::env::args_os()));
}
