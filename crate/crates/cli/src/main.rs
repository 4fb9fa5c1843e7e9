fn main() {
    std::process::exit(qgl_cli::run_cli(std::env::args_os()));
}
