fn main() {
    std::process::exit(kanvex::cli::run(std::env::args_os()));
}
