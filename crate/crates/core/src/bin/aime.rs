fn main() {
    std::process::exit(aime::cli::run(std::env::args_os()));
}
