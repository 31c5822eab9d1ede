fn main() {
    std::process::exit(peershare::cli::cli_main(std::env::args_os()));
}
