fn main() {
    std::process::exit(crhls::cli::run(std::env::args_os()));
}
