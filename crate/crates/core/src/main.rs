fn main() {
    std::process::exit(lm05_decoy::cli::main());
}
