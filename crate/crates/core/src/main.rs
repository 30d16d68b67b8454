fn main() {
    std::process::exit(slsync::cli::run(std::env::args_os()));
}
