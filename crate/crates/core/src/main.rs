fn main() {
    std::process::exit(charnet::cli::run(std::env::args_os()));
}
