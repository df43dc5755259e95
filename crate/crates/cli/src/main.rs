fn main() {
    std::process::exit(powervac_cli::cli_main(std::env::args_os()));
}
