fn main() {
    std::process::exit(grokklab_cli::run(std::env::args_os()));
}
