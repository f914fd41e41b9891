fn main() {
    std::process::exit(pkecd::cli::run(std::env::args_os()));
}
