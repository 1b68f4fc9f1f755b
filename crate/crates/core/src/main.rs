fn main() {
    std::process::exit(hysat::cli::run(std::env::args_os()));
}
