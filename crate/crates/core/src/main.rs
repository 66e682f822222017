fn main() {
    std::process::exit(topophase::cli::main());
}
