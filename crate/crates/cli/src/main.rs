fn main() {
    std::process::exit(fas_kl_cli::main_with_args(std::env::args_os()));
}
