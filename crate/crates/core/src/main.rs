fn main() {
    std::process::exit(gridplan::cli::run(std::env::args_os()));
}
