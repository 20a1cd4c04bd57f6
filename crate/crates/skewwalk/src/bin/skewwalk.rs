fn main() {
    std::process::exit(skewwalk::cli::run(std::env::args_os()));
}
