fn main() {
    std::process::exit(relgraph::cli::run(std::env::args_os()));
}
