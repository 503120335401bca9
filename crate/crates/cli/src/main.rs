fn main() {
    std::process::exit(isac_ee_cli::run_from_args(std::env::args_os()));
}
