fn main() {
    std::process::exit(robust_kmedians::cli::main_with_args(std::env::args_os()));
}
