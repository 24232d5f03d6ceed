fn main() {
    std::process::exit(freesub::cli::run(std::env::args_os()));
}
