fn main() {
    std::process::exit(lamperti::cli::main());
}
