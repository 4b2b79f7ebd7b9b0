fn main() {
    std::process::exit(regmod::cli::run());
}
