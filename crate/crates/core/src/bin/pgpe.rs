fn main() {
    std::process::exit(pgpe::cli::run(std::env::args_os()));
}
