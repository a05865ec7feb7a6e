fn main() {
    std::process::exit(dialsearch_cli::run(std::env::args_os()));
}
