fn main() {
    std::process::exit(finsler_cli::run());
}
