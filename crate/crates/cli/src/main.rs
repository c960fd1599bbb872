fn main() {
    std::process::exit(gitmap_cli::run(std::env::args_os()));
}
