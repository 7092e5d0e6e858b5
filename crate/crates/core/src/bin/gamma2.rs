fn main() {
    std::process::exit(gamma2_core::cli::run(std::env::args_os()));
}
