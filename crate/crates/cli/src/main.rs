fn main() {
    std::process::exit(selfmod_cli::run(std::env::args_os()));
}
