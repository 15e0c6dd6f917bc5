fn main() {
    std::process::exit(reachctl_cli::run(std::env::args_os()));
}
