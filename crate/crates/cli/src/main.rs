fn main() {
    std::process::exit(fracap_cli::run());
}
