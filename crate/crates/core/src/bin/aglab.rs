fn main() {
    std::process::exit(aglab::cli::run());
}
