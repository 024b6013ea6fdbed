fn main() {
    std::process::exit(benchforge_cli::run());
}
