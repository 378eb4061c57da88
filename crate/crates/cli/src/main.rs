fn main() {
    std::process::exit(afmm_cli::main_with_args(std::env::args_os().collect()));
}
