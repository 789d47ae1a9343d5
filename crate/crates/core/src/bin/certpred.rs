fn main() {
    std::process::exit(certpred::cli::main_with_args(std::env::args_os()));
}
