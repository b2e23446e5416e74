fn main() {
    std::process::exit(qrd::cli::run(std::env::args_os()));
}
