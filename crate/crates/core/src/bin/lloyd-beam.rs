fn main() {
    std::process::exit(lloyd_beam::cli::run());
}
