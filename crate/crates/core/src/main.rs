fn main() {
    std::process::exit(bdpoisson::cli::run(std::env::args_os()));
}
