fn main() {
    std::process::exit(epsqueeze::cli::main());
}
