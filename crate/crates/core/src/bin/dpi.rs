fn main() {
    std::process::exit(dpi::cli::cli_main(std::env::args_os()));
}
