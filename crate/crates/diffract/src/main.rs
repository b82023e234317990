fn main() {
    std::process::exit(diffract::cli::run(std::env::args_os()));
}
