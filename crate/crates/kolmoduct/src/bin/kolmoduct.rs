fn main() {
    std::process::exit(kolmoduct::cli::run());
}
