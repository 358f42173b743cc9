fn main() {
    std::process::exit(exact_wkb::cli::run(std::env::args_os()));
}
