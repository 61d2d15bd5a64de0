fn main() {
    std::process::exit(pframe_cli::run(std::env::args_os()));
}
