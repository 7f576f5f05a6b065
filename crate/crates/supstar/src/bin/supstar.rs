fn main() {
    std::process::exit(supstar::cli::run());
}
