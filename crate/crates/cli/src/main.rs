fn main() {
    std::process::exit(phonoprobe_cli::run(std::env::args_os()));
}
