fn main() {
    std::process::exit(camoforge::cli::run(std::env::args_os()));
}
