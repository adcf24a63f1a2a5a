fn main() {
    std::process::exit(qclp::cli::run(std::env::args_os()));
}
