fn main() {
    std::process::exit(stabrank::cli::run());
}
