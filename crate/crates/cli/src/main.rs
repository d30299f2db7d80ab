fn main() {
    std::process::exit(pfreg_cli::run(std::env::args_os()));
}
