fn main() {
    std::process::exit(lagnerve::cli::run(std::env::args_os()));
}
