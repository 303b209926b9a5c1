fn main() {
    std::process::exit(lmoment_cli::run(std::env::args_os()));
}
