fn main() {
    std::process::exit(pqext::cli::cli_main(std::env::args()));
}
