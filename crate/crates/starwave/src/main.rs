fn main() {
    std::process::exit(starwave::cli::run(std::env::args_os()));
}
