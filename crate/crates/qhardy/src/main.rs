fn main() {
    std::process::exit(qhardy::cli::run_from(std::env::args_os()));
}
