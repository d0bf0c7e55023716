fn main() {
    std::process::exit(laxkit::cli::run(std::env::args_os()));
}
