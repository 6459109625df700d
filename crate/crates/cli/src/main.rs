fn main() {
    std::process::exit(fplap_cli::run(std::env::args_os()));
}
