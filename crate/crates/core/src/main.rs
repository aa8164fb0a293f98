fn main() {
    std::process::exit(mrsne::cli::run(std::env::args_os()));
}
