fn main() {
    std::process::exit(shrubs::cli::main());
}
