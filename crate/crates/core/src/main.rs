fn main() {
    std::process::exit(hopfdde::cli::run(std::env::args_os()));
}
