fn main() {
    std::process::exit(liquid_drop::cli::run(std::env::args_os()));
}
