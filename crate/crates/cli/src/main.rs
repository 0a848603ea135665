fn main() {
    std::process::exit(glyphalign_cli::run(std::env::args_os()));
}
