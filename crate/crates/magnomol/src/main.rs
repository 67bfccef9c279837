fn main() {
    std::process::exit(magnomol::cli::run());
}
