fn main() {
    std::process::exit(degenkernel::cli::run_from(std::env::args_os()));
}
