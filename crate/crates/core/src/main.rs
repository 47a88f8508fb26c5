fn main() {
    std::process::exit(thermocrack::cli::run_cli(std::env::args_os()));
}
