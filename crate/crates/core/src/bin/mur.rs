fn main() {
    std::process::exit(mur::cli::main_with_args(std::env::args_os()));
}
