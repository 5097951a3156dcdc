fn main() {
    std::process::exit(perfseg::cli::run(std::env::args_os()));
}
